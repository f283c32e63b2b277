#include "fdl/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

#include "fdl/codec.hpp"
#include "fdl/color.hpp"

namespace fdl {

const char* regime_name(Regime r) { return r == Regime::kAnywhere ? "anywhere" : "high_only"; }

Regime regime_from_name(const std::string& name) {
    if (name == "anywhere") return Regime::kAnywhere;
    if (name == "high_only") return Regime::kHighOnly;
    throw ConfigError("unknown regime '" + name + "'");
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<SignatureChannel> eligible_pool(Regime regime) {
    std::vector<SignatureChannel> pool;
    for (int comp = 0; comp < kComponents; ++comp)
        for (int idx = 1; idx < kChannelsPerComponent; ++idx) {  // DC excluded
            const int u = idx / 8, v = idx % 8;
            if (regime == Regime::kHighOnly) {
                // High frequencies that 2x box averaging annihilates exactly:
                // pairs of cos((2i+1)pi/4) samples cancel, so any channel on
                // the u=4 or v=4 Nyquist cross vanishes from the downsampled
                // image. Other u+v >= 8 channels merely attenuate and leak
                // class signal through as aliased texture.
                if (u + v < 8 || (u != 4 && v != 4)) continue;
            }
            pool.push_back({comp, idx});
        }
    return pool;
}

void run_parallel(int count, int threads, const std::function<void(int)>& fn) {
    if (threads <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace

std::vector<std::vector<SignatureChannel>> draw_signatures(const BandDatasetConfig& cfg) {
    if (cfg.classes < 1) throw ConfigError("gen-data: need at least one class");
    if (cfg.signature_size < 1) throw ConfigError("gen-data: signature size must be positive");
    std::vector<SignatureChannel> pool = eligible_pool(cfg.regime);
    const int need = cfg.classes * cfg.signature_size;
    if (need > static_cast<int>(pool.size()))
        throw ConfigError("gen-data: cannot draw " + std::to_string(need) +
                          " disjoint signature channels from a pool of " + std::to_string(pool.size()));
    Rng rng = Rng(cfg.seed).stream(Rng::kSignature);
    // Partial Fisher-Yates: the first `need` entries are a uniform draw.
    for (int i = 0; i < need; ++i) {
        const auto j = i + static_cast<int>(rng.below(pool.size() - static_cast<size_t>(i)));
        std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(j)]);
    }
    std::vector<std::vector<SignatureChannel>> out(static_cast<size_t>(cfg.classes));
    for (int k = 0; k < cfg.classes; ++k) {
        auto& sig = out[static_cast<size_t>(k)];
        sig.assign(pool.begin() + k * cfg.signature_size, pool.begin() + (k + 1) * cfg.signature_size);
        std::sort(sig.begin(), sig.end(),
                  [](const SignatureChannel& a, const SignatureChannel& b) { return a.global() < b.global(); });
    }
    return out;
}

namespace {

RgbImage render_sample(const BandDatasetConfig& cfg, const std::vector<SignatureChannel>& signature, Rng rng) {
    const int bh = cfg.height / 8, bw = cfg.width / 8;
    std::array<BlockGrid, kComponents> grids;
    for (auto& g : grids) g = BlockGrid(bh, bw);

    // Noise on every coefficient of every component, then the class signature
    // at +-A with an independent sign per block.
    for (int comp = 0; comp < kComponents; ++comp)
        for (int by = 0; by < bh; ++by)
            for (int bx = 0; bx < bw; ++bx) {
                Block8& b = grids[static_cast<size_t>(comp)].at(by, bx);
                for (int c = 0; c < kChannelsPerComponent; ++c)
                    b(c / 8, c % 8) = cfg.sigma * rng.gaussian();
            }
    for (const SignatureChannel& sc : signature)
        for (int by = 0; by < bh; ++by)
            for (int bx = 0; bx < bw; ++bx) {
                const double sign = rng.below(2) ? 1.0 : -1.0;
                grids[static_cast<size_t>(sc.component)].at(by, bx)(sc.index / 8, sc.index % 8) +=
                    sign * cfg.amplitude;
            }

    YcbcrPlanes planes;
    planes.y = idct_plane(grids[0]);
    planes.cb = idct_plane(grids[1]);
    planes.cr = idct_plane(grids[2]);
    return ycbcr_to_rgb(planes);
}

}  // namespace

DatasetManifest gen_band_dataset(const BandDatasetConfig& cfg, const std::string& out_dir) {
    if (cfg.height % 8 != 0 || cfg.width % 8 != 0)
        throw ConfigError("gen-data: extents must be multiples of 8");
    if (cfg.per_class < 1) throw ConfigError("gen-data: need at least one sample per class");

    DatasetManifest m;
    m.classes = cfg.classes;
    m.signature_size = cfg.signature_size;
    m.amplitude = cfg.amplitude;
    m.sigma = cfg.sigma;
    m.height = cfg.height;
    m.width = cfg.width;
    m.seed = cfg.seed;
    m.regime = cfg.regime;
    m.signatures = draw_signatures(cfg);

    std::filesystem::create_directories(out_dir);
    const std::uint64_t split_tag = fnv1a(cfg.split);
    const Rng base = Rng(cfg.seed).stream(Rng::kSample, split_tag);

    const int total = cfg.classes * cfg.per_class;
    m.samples.resize(static_cast<size_t>(total));
    run_parallel(total, cfg.threads, [&](int i) {
        const int label = i / cfg.per_class;
        const int ordinal = i % cfg.per_class;
        char name[64];
        std::snprintf(name, sizeof name, "%s_%d_%04d.ppm", cfg.split.c_str(), label, ordinal);
        const RgbImage img = render_sample(cfg, m.signatures[static_cast<size_t>(label)],
                                           base.stream(Rng::kSample, static_cast<std::uint64_t>(i)));
        ppm_write_file((std::filesystem::path(out_dir) / name).string(), img);
        m.samples[static_cast<size_t>(i)] = {name, label};
    });
    m.validate();
    return m;
}

void DatasetManifest::validate() const {
    if (classes < 1) throw ConfigError("manifest: class count must be positive");
    if (static_cast<int>(signatures.size()) != classes)
        throw ConfigError("manifest: signature list does not match class count");
    std::set<int> seen;
    for (const auto& sig : signatures) {
        if (static_cast<int>(sig.size()) != signature_size)
            throw ConfigError("manifest: signature size mismatch");
        for (const SignatureChannel& sc : sig) {
            if (sc.component < 0 || sc.component >= kComponents || sc.index < 0 ||
                sc.index >= kChannelsPerComponent)
                throw ConfigError("manifest: signature channel out of range");
            if (!seen.insert(sc.global()).second)
                throw ConfigError("manifest: signature channels overlap across classes");
        }
    }
    if (height % 8 != 0 || width % 8 != 0 || height <= 0 || width <= 0)
        throw ConfigError("manifest: extents must be positive multiples of 8");
    for (const Sample& s : samples)
        if (s.label < 0 || s.label >= classes)
            throw ConfigError("manifest: sample label out of range: " + std::to_string(s.label));
}

std::string DatasetManifest::serialize() const {
    char buf[256];
    std::snprintf(buf, sizeof buf, "FDDATA 1 %d %d %.17g %.17g %d %d %llu %s\n", classes, signature_size,
                  amplitude, sigma, height, width, static_cast<unsigned long long>(seed), regime_name(regime));
    std::string out = buf;
    for (int k = 0; k < classes; ++k)
        for (const SignatureChannel& sc : signatures[static_cast<size_t>(k)]) {
            std::snprintf(buf, sizeof buf, "SIG %d %s %d\n", k, component_name(sc.component), sc.index);
            out += buf;
        }
    for (const Sample& s : samples) {
        std::snprintf(buf, sizeof buf, "SAMPLE %s %d\n", s.path.c_str(), s.label);
        out += buf;
    }
    return out;
}

DatasetManifest DatasetManifest::parse(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    DatasetManifest m;
    bool header_seen = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (!header_seen) {
            int version = 0;
            std::string regime;
            unsigned long long seed = 0;
            if (tag != "FDDATA" ||
                !(ls >> version >> m.classes >> m.signature_size >> m.amplitude >> m.sigma >> m.height >>
                  m.width >> seed >> regime) ||
                version != 1)
                throw ParseError("manifest line " + std::to_string(lineno) + ": expected FDDATA 1 header");
            m.seed = seed;
            m.regime = regime_from_name(regime);
            m.signatures.assign(static_cast<size_t>(m.classes), {});
            header_seen = true;
        } else if (tag == "SIG") {
            int cls, idx;
            std::string comp;
            if (!(ls >> cls >> comp >> idx))
                throw ParseError("manifest line " + std::to_string(lineno) + ": malformed SIG line");
            if (cls < 0 || cls >= m.classes)
                throw ParseError("manifest line " + std::to_string(lineno) + ": SIG class out of range");
            const int k = component_from_name(comp);
            if (k < 0) throw ParseError("manifest line " + std::to_string(lineno) + ": bad component tag");
            m.signatures[static_cast<size_t>(cls)].push_back({k, idx});
        } else if (tag == "SAMPLE") {
            Sample s;
            if (!(ls >> s.path >> s.label))
                throw ParseError("manifest line " + std::to_string(lineno) + ": malformed SAMPLE line");
            m.samples.push_back(std::move(s));
        } else {
            throw ParseError("manifest line " + std::to_string(lineno) + ": unknown tag '" + tag + "'");
        }
    }
    if (!header_seen) throw ParseError("manifest: missing FDDATA header");
    m.validate();
    return m;
}

DatasetManifest manifest_read_file(const std::string& path) {
    return DatasetManifest::parse(read_file_text(path));
}

void manifest_write_file(const std::string& path, const DatasetManifest& m) {
    write_file_text(path, m.serialize());
}

std::vector<int> DatasetManifest::signature_globals() const {
    std::vector<int> out;
    for (const auto& sig : signatures)
        for (const SignatureChannel& sc : sig) out.push_back(sc.global());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> DatasetManifest::signature_globals(int label) const {
    std::vector<int> out;
    for (const SignatureChannel& sc : signatures[static_cast<size_t>(label)]) out.push_back(sc.global());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace fdl
