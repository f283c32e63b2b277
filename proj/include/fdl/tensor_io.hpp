#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fdl/tensor.hpp"

namespace fdl {

// Binary tensor file: magic "FDT1", then rank and extents as unsigned 32-bit
// little-endian, then the payload as 32-bit IEEE-754 little-endian values in
// row-major order.
std::vector<std::uint8_t> tensor_write(const Tensor& t);
Tensor tensor_read(const std::vector<std::uint8_t>& bytes);

void tensor_write_file(const std::string& path, const Tensor& t);
Tensor tensor_read_file(const std::string& path);

}  // namespace fdl
