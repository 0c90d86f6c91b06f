// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>

namespace bilagrid {

/// Hat-kernel weights along one grid axis under the align-corners mapping:
/// a unit coordinate t is clamped to [0,1] and mapped to t * (n - 1), so both
/// ends of the interval land on cell centers. Two cells (lo, hi = lo + 1)
/// receive weights (1 - f, f). For n == 1 the single cell gets weight 1.
struct AxisWeights {
    int lo = 0;
    int hi = 0;
    double wLo = 1.0;
    double wHi = 0.0;
    /// d(wHi)/dt = -d(wLo)/dt. Zero on kernel kinks and outside [0,1].
    double slope = 0.0;
};

inline AxisWeights axisWeights(double t, int n) {
    AxisWeights a;
    if (n <= 1) return a;
    const bool inside = t > 0.0 && t < 1.0;
    const double x = std::clamp(t, 0.0, 1.0) * (n - 1);
    a.lo = std::min(static_cast<int>(std::floor(x)), n - 2);
    a.hi = a.lo + 1;
    a.wHi = x - a.lo;
    a.wLo = 1.0 - a.wHi;
    // Subgradient 0 where the hat kernels are not differentiable.
    const bool onKink = a.wHi == 0.0 || a.wHi == 1.0;
    a.slope = (inside && !onKink) ? static_cast<double>(n - 1) : 0.0;
    return a;
}

/// Hat kernel max(1 - |t|, 0).
inline double hat(double t) { return std::max(1.0 - std::abs(t), 0.0); }

}  // namespace bilagrid
