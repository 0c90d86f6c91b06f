// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Brute-force references for the slicing kernels: dense hat sums over every
// cell, with no stencil or factor shortcuts.

#include <algorithm>
#include <vector>

#include "bilagrid/grid3d.hpp"
#include "bilagrid/grid4d.hpp"
#include "bilagrid/interp.hpp"

namespace bilagrid::testing {

// Align-corners coordinate t * (n - 1) on every axis.
inline AffineTransform bruteForceSlice3d(const BilateralGrid3D& grid, double u, double v, double g) {
    const double x = std::clamp(u, 0.0, 1.0) * (grid.width() - 1);
    const double y = std::clamp(v, 0.0, 1.0) * (grid.height() - 1);
    const double z = std::clamp(g, 0.0, 1.0) * (grid.depth() - 1);
    AffineTransform out;
    for (int i = 0; i < grid.width(); ++i) {
        for (int j = 0; j < grid.height(); ++j) {
            for (int k = 0; k < grid.depth(); ++k) {
                const double w = hat(x - i) * hat(y - j) * hat(z - k);
                const AffineTransform a = grid.cell(i, j, k);
                for (int c = 0; c < 12; ++c) out.m[c] += w * a.m[c];
            }
        }
    }
    return out;
}

// Dense tensor H[h][i][j][k][c] = sum_r z_r[h] x_r[i] y_r[j] g_r[k] t_r[c], built from the factors.
inline std::vector<double> denseFromFactors(const LowRank4DGrid& grid) {
    const auto& d = grid.dims();
    std::vector<double> h(static_cast<std::size_t>(d.depth) * d.width * d.height * d.guidance * 12, 0.0);
    for (int r = 0; r < grid.rank(); ++r) {
        const auto z = grid.factor(Family::Z, r), x = grid.factor(Family::X, r), y = grid.factor(Family::Y, r),
                   g = grid.factor(Family::Guidance, r), t = grid.factor(Family::Transform, r);
        std::size_t n = 0;
        for (int a = 0; a < d.depth; ++a) {
            for (int b = 0; b < d.width; ++b) {
                for (int c = 0; c < d.height; ++c) {
                    for (int e = 0; e < d.guidance; ++e) {
                        for (int q = 0; q < 12; ++q) h[n++] += z[a] * x[b] * y[c] * g[e] * t[q];
                    }
                }
            }
        }
    }
    return h;
}

inline AffineTransform bruteForceSlice4d(const LowRank4DGrid& grid, double x, double y, double z, double g) {
    const auto& d = grid.dims();
    const auto dense = denseFromFactors(grid);
    const double cz = std::clamp(z, 0.0, 1.0) * (d.depth - 1), cx = std::clamp(x, 0.0, 1.0) * (d.width - 1),
                 cy = std::clamp(y, 0.0, 1.0) * (d.height - 1), cg = std::clamp(g, 0.0, 1.0) * (d.guidance - 1);
    AffineTransform out;
    std::size_t n = 0;
    for (int a = 0; a < d.depth; ++a) {
        for (int b = 0; b < d.width; ++b) {
            for (int c = 0; c < d.height; ++c) {
                for (int e = 0; e < d.guidance; ++e) {
                    const double w = hat(cz - a) * hat(cx - b) * hat(cy - c) * hat(cg - e);
                    for (int q = 0; q < 12; ++q) out.m[q] += w * dense[n++];
                }
            }
        }
    }
    return out;
}

}  // namespace bilagrid::testing
