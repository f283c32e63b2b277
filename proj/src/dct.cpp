#include "fdl/dct.hpp"

#include <cmath>

namespace fdl {

const Block8& dct8_basis() {
    static const Block8 basis = [] {
        constexpr double kPi = 3.14159265358979323846264338327950288;
        Block8 t;
        for (int u = 0; u < 8; ++u) {
            const double a = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
            for (int i = 0; i < 8; ++i) t(u, i) = a * std::cos((2 * i + 1) * u * kPi / 16.0);
        }
        return t;
    }();
    return basis;
}

Block8 dct8x8(const Block8& pixels) {
    const Block8& t = dct8_basis();
    return t * (pixels.array() - 128.0).matrix() * t.transpose();
}

Block8 idct8x8(const Block8& coeffs) {
    const Block8& t = dct8_basis();
    Block8 out = t.transpose() * coeffs * t;
    out.array() += 128.0;
    return out;
}

}  // namespace fdl
