#pragma once

#include <Eigen/Dense>

namespace fdl {

using Block8 = Eigen::Matrix<double, 8, 8>;

// Orthonormal 8-point DCT-II basis: row u holds a(u) cos((2i+1) u pi / 16)
// with a(0) = sqrt(1/8) and a(u>0) = sqrt(2/8). The matrix is orthogonal, so
// the inverse transform is its transpose and Parseval holds exactly.
const Block8& dct8_basis();

// 2-D DCT of one pixel block, including the JPEG level shift: the input is
// centered by subtracting 128 before the transform.
Block8 dct8x8(const Block8& pixels);

// Exact inverse of dct8x8 including the +128 unshift.
Block8 idct8x8(const Block8& coeffs);

}  // namespace fdl
