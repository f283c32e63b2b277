#include "fdl/checkpoint.hpp"

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "fdl/tensor_io.hpp"

namespace fdl {

namespace fs = std::filesystem;

void save_checkpoint(const std::string& dir, const Model& model, const SelectionMask* mask,
                     const ChannelStats* stats, bool scatter_to_full) {
    fs::create_directories(dir);
    char buf[256];
    std::string manifest = "FDCKPT 1\n";
    manifest += std::string("kind ") + model_kind_name(model.spec.kind) + "\n";
    std::snprintf(buf, sizeof buf, "input %d %d %d\n", model.spec.input_h, model.spec.input_w,
                  model.spec.input_c);
    manifest += buf;
    manifest += "classes " + std::to_string(model.spec.classes) + "\n";
    manifest += std::string("gate ") + (model.spec.gate ? "on" : "off") + "\n";
    manifest += "reduction " + std::to_string(model.spec.gate_reduction) + "\n";
    std::snprintf(buf, sizeof buf, "tau %.17g\n", model.spec.tau);
    manifest += buf;
    std::snprintf(buf, sizeof buf, "lambda %.17g\n", model.spec.lambda);
    manifest += buf;
    std::snprintf(buf, sizeof buf, "seed %llu\n", static_cast<unsigned long long>(model.spec.seed));
    manifest += buf;
    manifest += std::string("scatter ") + (scatter_to_full ? "on" : "off") + "\n";
    if (mask) {
        manifest += "mask mask.txt\n";
        write_file_text((fs::path(dir) / "mask.txt").string(), mask->serialize());
    }
    if (stats) {
        manifest += "stats stats.txt\n";
        write_file_text((fs::path(dir) / "stats.txt").string(), stats->serialize());
    }
    manifest += "tensors " + std::to_string(model.params.size()) + "\n";
    for (size_t i = 0; i < model.params.size(); ++i) {
        const std::string file = model.roles[i] + ".fdt";
        manifest += model.roles[i] + " " + file + "\n";
        tensor_write_file((fs::path(dir) / file).string(), model.graph.value(model.params[i]));
    }
    write_file_text((fs::path(dir) / "manifest.txt").string(), manifest);
}

Checkpoint load_checkpoint(const std::string& dir) {
    const std::string text = read_file_text((fs::path(dir) / "manifest.txt").string());
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "FDCKPT 1") throw ParseError("checkpoint: bad manifest header");

    ModelSpec spec;
    std::string mask_file, stats_file;
    bool scatter = false;
    int tensor_count = -1;
    std::vector<std::pair<std::string, std::string>> tensor_files;

    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        if (key == "kind") {
            std::string v;
            ls >> v;
            spec.kind = model_kind_from_name(v);
        } else if (key == "input") {
            ls >> spec.input_h >> spec.input_w >> spec.input_c;
        } else if (key == "classes") {
            ls >> spec.classes;
        } else if (key == "gate") {
            std::string v;
            ls >> v;
            spec.gate = v == "on";
        } else if (key == "reduction") {
            ls >> spec.gate_reduction;
        } else if (key == "tau") {
            ls >> spec.tau;
        } else if (key == "lambda") {
            ls >> spec.lambda;
        } else if (key == "seed") {
            unsigned long long s = 0;
            ls >> s;
            spec.seed = s;
        } else if (key == "scatter") {
            std::string v;
            ls >> v;
            scatter = v == "on";
        } else if (key == "mask") {
            ls >> mask_file;
        } else if (key == "stats") {
            ls >> stats_file;
        } else if (key == "tensors") {
            ls >> tensor_count;
            break;
        } else {
            throw ParseError("checkpoint: unknown manifest key '" + key + "'");
        }
    }
    if (tensor_count < 0) throw ParseError("checkpoint: missing tensors section");
    for (int i = 0; i < tensor_count; ++i) {
        if (!std::getline(in, line)) throw ParseError("checkpoint: truncated tensor list");
        std::istringstream ls(line);
        std::string role, file;
        if (!(ls >> role >> file)) throw ParseError("checkpoint: malformed tensor entry");
        tensor_files.emplace_back(role, file);
    }

    Checkpoint ck;
    ck.scatter_to_full = scatter;
    ck.model = spec.kind == ModelSpec::Kind::kFreq ? build_freqnet(spec) : build_spatialnet(spec);
    if (tensor_files.size() != ck.model.roles.size())
        throw ParseError("checkpoint: tensor count does not match the architecture");
    for (size_t i = 0; i < tensor_files.size(); ++i) {
        if (tensor_files[i].first != ck.model.roles[i])
            throw ParseError("checkpoint: unexpected tensor role '" + tensor_files[i].first + "'");
        Tensor t = tensor_read_file((fs::path(dir) / tensor_files[i].second).string());
        if (t.dims() != ck.model.graph.value(ck.model.params[i]).dims())
            throw ParseError("checkpoint: tensor shape mismatch for role '" + tensor_files[i].first + "'");
        ck.model.graph.set_value(ck.model.params[i], std::move(t));
    }
    if (!mask_file.empty())
        ck.mask = SelectionMask::parse(read_file_text((fs::path(dir) / mask_file).string()));
    if (!stats_file.empty())
        ck.stats = ChannelStats::parse(read_file_text((fs::path(dir) / stats_file).string()));
    return ck;
}

}  // namespace fdl
