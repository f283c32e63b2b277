#include "fdl/image.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fdl {

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string next_token(const std::vector<std::uint8_t>& bytes, size_t& pos) {
    while (pos < bytes.size()) {
        char c = static_cast<char>(bytes[pos]);
        if (c == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++pos;
        } else {
            break;
        }
    }
    std::string tok;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        tok.push_back(static_cast<char>(bytes[pos]));
        ++pos;
    }
    return tok;
}

int parse_header_int(const std::vector<std::uint8_t>& bytes, size_t& pos, const char* what) {
    const std::string tok = next_token(bytes, pos);
    if (tok.empty()) throw ParseError(std::string("ppm: missing ") + what);
    for (char c : tok)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw ParseError(std::string("ppm: bad ") + what + " '" + tok + "'");
    return std::stoi(tok);
}

}  // namespace

RgbImage ppm_read(const std::vector<std::uint8_t>& bytes) {
    size_t pos = 0;
    const std::string magic = next_token(bytes, pos);
    if (magic != "P6")
        throw FormatError("ppm: unsupported magic '" + magic + "' (only binary P6 is supported)");
    const int w = parse_header_int(bytes, pos, "width");
    const int h = parse_header_int(bytes, pos, "height");
    const int maxval = parse_header_int(bytes, pos, "maxval");
    if (w <= 0 || h <= 0) throw ParseError("ppm: nonpositive extents");
    if (maxval != 255) throw FormatError("ppm: only maxval 255 is supported");
    if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
        throw ParseError("ppm: missing whitespace before payload");
    ++pos;  // exactly one whitespace byte separates header and payload
    const size_t need = static_cast<size_t>(w) * h * 3;
    if (bytes.size() - pos < need)
        throw ParseError("ppm: truncated payload at offset " + std::to_string(bytes.size()) + ", need " +
                         std::to_string(pos + need) + " bytes");
    RgbImage img(h, w);
    std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
              bytes.begin() + static_cast<std::ptrdiff_t>(pos + need), img.pixels.begin());
    return img;
}

std::vector<std::uint8_t> ppm_write(const RgbImage& img) {
    if (img.height <= 0 || img.width <= 0 || img.pixels.size() != static_cast<size_t>(img.height) * img.width * 3)
        throw ShapeError("ppm: invalid image");
    std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

RgbImage ppm_read_file(const std::string& path) { return ppm_read(read_file_bytes(path)); }

void ppm_write_file(const std::string& path, const RgbImage& img) { write_file_bytes(path, ppm_write(img)); }

void pgm_write_file(const std::string& path, int height, int width, const std::vector<std::uint8_t>& gray) {
    if (gray.size() != static_cast<size_t>(height) * width) throw ShapeError("pgm: payload size mismatch");
    std::string header = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), gray.begin(), gray.end());
    write_file_bytes(path, out);
}

RgbImage downsample2x(const RgbImage& img) {
    if (img.height % 2 != 0 || img.width % 2 != 0) throw ShapeError("downsample2x: extents must be even");
    RgbImage out(img.height / 2, img.width / 2);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            for (int c = 0; c < 3; ++c) {
                const int s = img.at(2 * y, 2 * x, c) + img.at(2 * y, 2 * x + 1, c) +
                              img.at(2 * y + 1, 2 * x, c) + img.at(2 * y + 1, 2 * x + 1, c);
                out.at(y, x, c) = static_cast<std::uint8_t>((s + 2) / 4);  // round to nearest
            }
    return out;
}

RgbImage upsample2x(const RgbImage& img) {
    RgbImage out(img.height * 2, img.width * 2);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.at(y / 2, x / 2, c);
    return out;
}

RgbImage pad_to_multiple_of_8(const RgbImage& img) {
    const int h = (img.height + 7) / 8 * 8;
    const int w = (img.width + 7) / 8 * 8;
    if (h == img.height && w == img.width) return img;
    RgbImage out(h, w);
    for (int y = 0; y < h; ++y) {
        const int sy = y < img.height ? y : img.height - 1;
        for (int x = 0; x < w; ++x) {
            const int sx = x < img.width ? x : img.width - 1;
            for (int c = 0; c < 3; ++c) out.at(y, x, c) = img.at(sy, sx, c);
        }
    }
    return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (f.bad()) throw IoError("read failed: " + path);
    return bytes;
}

void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed: " + path);
}

std::string read_file_text(const std::string& path) {
    auto bytes = read_file_bytes(path);
    return std::string(bytes.begin(), bytes.end());
}

void write_file_text(const std::string& path, const std::string& text) {
    write_file_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

}  // namespace fdl
