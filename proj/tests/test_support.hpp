// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "bilagrid/grid3d.hpp"
#include "bilagrid/grid4d.hpp"
#include "bilagrid/guidance.hpp"
#include "bilagrid/types.hpp"

namespace bilagrid::testing {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Rgb randomColor(std::mt19937_64& rng, double lo = 0.05, double hi = 0.95) {
    return {uniform(rng, lo, hi), uniform(rng, lo, hi), uniform(rng, lo, hi)};
}

/// Identity plus uniform perturbation of every coefficient.
inline BilateralGrid3D randomGrid3d(int w, int h, int m, std::mt19937_64& rng, double amplitude = 0.3) {
    BilateralGrid3D g(w, h, m);
    for (double& c : g.coeffs()) c += uniform(rng, -amplitude, amplitude);
    return g;
}

inline LowRank4DGrid randomGrid4d(Grid4DDims dims, int rank, std::mt19937_64& rng) {
    LowRank4DGrid g(dims, rank);
    for (double& p : g.params()) p = uniform(rng, -1.0, 1.0);
    return g;
}

inline Guidance randomMlp(std::mt19937_64& rng, double scale = 0.8) {
    MlpGuidance net;
    for (double& p : net.params) p = uniform(rng, -scale, scale);
    return Guidance::mlp(net);
}

inline Image randomImage(int w, int h, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
    Image img(w, h);
    for (auto& px : img.pixels) px = randomColor(rng, lo, hi);
    return img;
}

/// Distance from t * (n - 1) to the nearest integer; queries closer than
/// this to a kernel kink are re-drawn by gradient tests.
inline double kinkDistance(double t, int n) {
    if (n <= 1) return 1.0;
    const double x = t * (n - 1);
    return std::abs(x - std::round(x));
}

/// Fresh, empty directory under the system temp path.
inline std::filesystem::path scratchDir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("bilagrid_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace bilagrid::testing
