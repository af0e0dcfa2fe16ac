#pragma once

#include <array>
#include <cmath>

#include "gfcsim/common.hpp"

namespace gfcsim {

// Amplitude-invariant Clarke transform: a balanced three-phase set of peak
// value V maps to an alpha-beta vector of norm V.
inline Vec2 clarke(const std::array<double, 3>& abc) {
    constexpr double k = 2.0 / 3.0;
    return {k * (abc[0] - 0.5 * abc[1] - 0.5 * abc[2]),
            k * (std::sqrt(3.0) / 2.0) * (abc[1] - abc[2])};
}

/// Stationary -> rotating frame: rotate by -theta.
inline Vec2 park(Vec2 ab, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * ab.a + s * ab.b, -s * ab.a + c * ab.b};
}

/// Rotating -> stationary frame: rotate by +theta.
inline Vec2 inverse_park(Vec2 dq, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * dq.a - s * dq.b, s * dq.a + c * dq.b};
}

}  // namespace gfcsim
