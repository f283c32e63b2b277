#include "fdl/color.hpp"

#include <cmath>

namespace fdl {

const Eigen::Matrix3d& ycbcr_forward_matrix() {
    static const Eigen::Matrix3d m = [] {
        Eigen::Matrix3d f;
        f << 0.299, 0.587, 0.114,
            -0.168736, -0.331264, 0.5,
            0.5, -0.418688, -0.081312;
        return f;
    }();
    return m;
}

const Eigen::Matrix3d& ycbcr_inverse_matrix() {
    static const Eigen::Matrix3d inv = ycbcr_forward_matrix().inverse();
    return inv;
}

YcbcrPlanes rgb_to_ycbcr(const RgbImage& img) {
    const Eigen::Matrix3d& m = ycbcr_forward_matrix();
    YcbcrPlanes p;
    p.y.resize(img.height, img.width);
    p.cb.resize(img.height, img.width);
    p.cr.resize(img.height, img.width);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const double r = img.at(y, x, 0), g = img.at(y, x, 1), b = img.at(y, x, 2);
            p.y(y, x) = m(0, 0) * r + m(0, 1) * g + m(0, 2) * b;
            p.cb(y, x) = m(1, 0) * r + m(1, 1) * g + m(1, 2) * b + 128.0;
            p.cr(y, x) = m(2, 0) * r + m(2, 1) * g + m(2, 2) * b + 128.0;
        }
    return p;
}

RgbImage ycbcr_to_rgb(const YcbcrPlanes& planes) {
    if (planes.cb.rows() != planes.y.rows() || planes.cr.rows() != planes.y.rows() ||
        planes.cb.cols() != planes.y.cols() || planes.cr.cols() != planes.y.cols())
        throw ShapeError("ycbcr_to_rgb: plane extents differ");
    const Eigen::Matrix3d& inv = ycbcr_inverse_matrix();
    RgbImage img(planes.height(), planes.width());
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const double yy = planes.y(y, x);
            const double cb = planes.cb(y, x) - 128.0;
            const double cr = planes.cr(y, x) - 128.0;
            for (int c = 0; c < 3; ++c) {
                const double v = inv(c, 0) * yy + inv(c, 1) * cb + inv(c, 2) * cr;
                const double q = std::floor(v + 0.5);
                img.at(y, x, c) = static_cast<std::uint8_t>(q < 0 ? 0 : (q > 255 ? 255 : q));
            }
        }
    return img;
}

}  // namespace fdl
