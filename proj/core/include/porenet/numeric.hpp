#pragma once

#include <cmath>
#include <cstdint>

namespace porenet {

/// Config fractions (0.01, 0.8, percentile/100) are decimal-intent. Their
/// binary-double products can land a few ulp off an integer, which breaks
/// strict-bound / floor / ceil semantics exactly where they matter. Products
/// within a relative 1e-9 of an integer are therefore snapped to it before
/// the comparison.
inline double snap_integer(double q, double rel_tol = 1e-9) {
    double nearest = std::round(q);
    if (std::abs(q - nearest) <= rel_tol * std::max(1.0, std::abs(q))) return nearest;
    return q;
}

inline double clamp01(double v) {
    if (v < 0.0) return 0.0;
    if (v > 1.0) return 1.0;
    return v;
}

inline double sq(double v) { return v * v; }

}  // namespace porenet
