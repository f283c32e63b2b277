#include "fdl/tensor_io.hpp"

#include <cstring>

#include "fdl/image.hpp"

namespace fdl {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& bytes, size_t pos) {
    return static_cast<std::uint32_t>(bytes[pos]) | (static_cast<std::uint32_t>(bytes[pos + 1]) << 8) |
           (static_cast<std::uint32_t>(bytes[pos + 2]) << 16) |
           (static_cast<std::uint32_t>(bytes[pos + 3]) << 24);
}

}  // namespace

std::vector<std::uint8_t> tensor_write(const Tensor& t) {
    if (t.rank() == 0) throw ShapeError("tensor_write: empty tensor");
    if (!t.all_finite()) throw DomainError("tensor_write: non-finite values");
    std::vector<std::uint8_t> out = {'F', 'D', 'T', '1'};
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (int d : t.dims()) put_u32(out, static_cast<std::uint32_t>(d));
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        const float f = static_cast<float>(t[i]);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        put_u32(out, bits);
    }
    return out;
}

Tensor tensor_read(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 8 || bytes[0] != 'F' || bytes[1] != 'D' || bytes[2] != 'T' || bytes[3] != '1')
        throw FormatError("tensor_read: bad magic");
    const std::uint32_t rank = get_u32(bytes, 4);
    if (rank == 0 || rank > 8) throw ParseError("tensor_read: implausible rank");
    if (bytes.size() < 8 + 4ull * rank) throw ParseError("tensor_read: truncated header");
    std::vector<int> dims(rank);
    std::uint64_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
        const std::uint32_t d = get_u32(bytes, 8 + 4 * i);
        if (d == 0 || d > (1u << 24)) throw ParseError("tensor_read: bad extent");
        dims[i] = static_cast<int>(d);
        count *= d;
    }
    const size_t payload_start = 8 + 4ull * rank;
    if (bytes.size() != payload_start + 4 * count)
        throw ParseError("tensor_read: payload length does not match extents");
    Tensor t(dims);
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint32_t bits = get_u32(bytes, payload_start + 4 * i);
        float f;
        std::memcpy(&f, &bits, 4);
        t[static_cast<Eigen::Index>(i)] = static_cast<double>(f);
    }
    return t;
}

void tensor_write_file(const std::string& path, const Tensor& t) { write_file_bytes(path, tensor_write(t)); }

Tensor tensor_read_file(const std::string& path) { return tensor_read(read_file_bytes(path)); }

}  // namespace fdl
