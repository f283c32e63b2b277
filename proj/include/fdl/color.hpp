#pragma once

#include <Eigen/Dense>

#include "fdl/image.hpp"

namespace fdl {

// Full-range (JFIF) YCbCr planes. Values are real, not rounded; Cb/Cr carry
// the +128 offset. Note full-range chroma of saturated pixels can slightly
// exceed [0,255] (e.g. pure red gives Cr = 255.5).
struct YcbcrPlanes {
    Eigen::ArrayXXd y, cb, cr;  // (row, col) = (y, x)

    int height() const { return static_cast<int>(y.rows()); }
    int width() const { return static_cast<int>(y.cols()); }
};

// JFIF full-range forward matrix: [Y;Cb;Cr] = M [R;G;B] + [0;128;128].
const Eigen::Matrix3d& ycbcr_forward_matrix();
// Exact inverse of the forward matrix (computed, not hand-rounded).
const Eigen::Matrix3d& ycbcr_inverse_matrix();

YcbcrPlanes rgb_to_ycbcr(const RgbImage& img);

// Inverse affine map then round-to-nearest and clamp to [0,255].
RgbImage ycbcr_to_rgb(const YcbcrPlanes& planes);

}  // namespace fdl
