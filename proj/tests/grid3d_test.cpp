// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "bilagrid/grid3d.hpp"
#include "bilagrid/interp.hpp"
#include "bilagrid/optim.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace bilagrid {
namespace {

using testing::kinkDistance;
using testing::randomColor;
using testing::randomGrid3d;
using testing::uniform;

double luminance(const Rgb& c) { return std::clamp(0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2], 0.0, 1.0); }

TEST(BilateralGrid3DTest, StartsAtIdentity) {
    BilateralGrid3D g(4, 3, 2);
    EXPECT_EQ(g.cellCount(), 24U);
    EXPECT_EQ(g.coeffs().size(), 24U * 12U);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 3; ++j) {
            for (int k = 0; k < 2; ++k) EXPECT_EQ(g.cell(i, j, k).m, AffineTransform::identity().m);
        }
    }
    EXPECT_TRUE(g.finite());
}

TEST(BilateralGrid3DTest, RejectsEmptyDimensions) {
    EXPECT_THROW(BilateralGrid3D(0, 4, 4), std::invalid_argument);
    EXPECT_THROW(BilateralGrid3D(4, -1, 4), std::invalid_argument);
    EXPECT_THROW(BilateralGrid3D(4, 4, 0), std::invalid_argument);
}

TEST(BilateralGrid3DTest, CellLayoutIsXThenYThenGuidance) {
    BilateralGrid3D g(3, 4, 5);
    AffineTransform t;
    for (int c = 0; c < 12; ++c) t.m[c] = c + 1.0;
    g.setCell(2, 1, 3, t);
    const std::size_t base = ((2 * 4 + 1) * 5 + 3) * 12;
    for (int c = 0; c < 12; ++c) EXPECT_EQ(g.coeffs()[base + c], c + 1.0);
    EXPECT_EQ(g.cellIndex(2, 1, 3) * 12, base);
}

TEST(BilateralGrid3DTest, NonFiniteCoefficientIsReported) {
    BilateralGrid3D g(2, 2, 2);
    g.coeffs()[7] = std::nan("");
    EXPECT_FALSE(g.finite());
}

TEST(Slice3DTest, MatchesDenseHatSumOnRandomQueries) {
    std::mt19937_64 rng(11);
    double worst = 0.0;
    for (int trial = 0; trial < 1200; ++trial) {
        const int w = 1 + static_cast<int>(rng() % 9), h = 1 + static_cast<int>(rng() % 9),
                  m = 1 + static_cast<int>(rng() % 6);
        const auto grid = randomGrid3d(w, h, m, rng, 1.0);
        // Include out-of-range queries to exercise clamping.
        const double u = uniform(rng, -0.1, 1.1), v = uniform(rng, -0.1, 1.1), g = uniform(rng, -0.1, 1.1);
        const auto fast = slice3d(grid, u, v, g);
        const auto ref = testing::bruteForceSlice3d(grid, u, v, g);
        for (int c = 0; c < 12; ++c) worst = std::max(worst, std::abs(fast.m[c] - ref.m[c]));
    }
    EXPECT_LT(worst, 1e-8);
}

TEST(Slice3DTest, CornerQueriesReturnCornerCells) {
    std::mt19937_64 rng(3);
    const auto grid = randomGrid3d(5, 4, 3, rng, 1.0);
    const auto a = slice3d(grid, 0.0, 0.0, 0.0);
    const auto b = slice3d(grid, 1.0, 1.0, 1.0);
    EXPECT_EQ(a.m, grid.cell(0, 0, 0).m);
    EXPECT_EQ(b.m, grid.cell(4, 3, 2).m);
}

TEST(Slice3DTest, StencilWeightsFormAPartitionOfUnity) {
    std::mt19937_64 rng(5);
    const BilateralGrid3D grid(8, 8, 4);
    for (int trial = 0; trial < 500; ++trial) {
        const auto s = sliceStencil3d(grid, uniform(rng, -0.2, 1.2), uniform(rng, -0.2, 1.2), uniform(rng, -0.2, 1.2));
        double sum = 0.0;
        for (double w : s.weights) {
            EXPECT_GE(w, 0.0);
            sum += w;
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
    }
}

TEST(ProcessPixelTest, IdentityGridLeavesColorUnchanged) {
    std::mt19937_64 rng(8);
    const BilateralGrid3D grid(8, 8, 4);
    const Guidance lum;
    for (int trial = 0; trial < 200; ++trial) {
        const Rgb c = randomColor(rng, -0.5, 1.5);
        const Rgb out = processPixel(grid, uniform(rng, 0, 1), uniform(rng, 0, 1), c, lum);
        for (int k = 0; k < 3; ++k) EXPECT_NEAR(out[k], c[k], 1e-12);
    }
}

TEST(ProcessPixelTest, AppliesSlicedAffineToHomogeneousColor) {
    std::mt19937_64 rng(9);
    const auto grid = randomGrid3d(6, 5, 4, rng);
    const Guidance lum;
    for (int trial = 0; trial < 100; ++trial) {
        const Rgb c = randomColor(rng);
        const double u = uniform(rng, 0, 1), v = uniform(rng, 0, 1);
        const auto t = testing::bruteForceSlice3d(grid, u, v, luminance(c));
        const Rgb out = processPixel(grid, u, v, c, lum);
        for (int r = 0; r < 3; ++r) {
            const double expect = t.m[r * 4] * c[0] + t.m[r * 4 + 1] * c[1] + t.m[r * 4 + 2] * c[2] + t.m[r * 4 + 3];
            EXPECT_NEAR(out[r], expect, 1e-12);
        }
    }
}

TEST(ProcessPixelTest, OutputIsNotClamped) {
    BilateralGrid3D grid(2, 2, 2);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            for (int k = 0; k < 2; ++k) {
                AffineTransform t = AffineTransform::identity();
                t.m[0] = t.m[5] = t.m[10] = 3.0;
                grid.setCell(i, j, k, t);
            }
        }
    }
    const Rgb out = processPixel(grid, 0.5, 0.5, {0.9, 0.9, 0.9}, Guidance());
    EXPECT_NEAR(out[0], 2.7, 1e-12);
}

struct Query {
    double u, v;
    Rgb c;
};

// Re-draws until no axis coordinate (including the guidance) sits near a kink.
std::optional<Query> offKinkQuery(std::mt19937_64& rng, const BilateralGrid3D& grid, const Guidance& guidance) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
        Query q{uniform(rng, 0.02, 0.98), uniform(rng, 0.02, 0.98), randomColor(rng, 0.1, 0.9)};
        const double g = guidance(q.c);
        if (kinkDistance(q.u, grid.width()) > 1e-2 && kinkDistance(q.v, grid.height()) > 1e-2 &&
            kinkDistance(g, grid.depth()) > 1e-2 && g > 0.01 && g < 0.99) {
            return q;
        }
    }
    // The guidance may saturate for every color; the caller redraws it.
    return std::nullopt;
}

TEST(ProcessPixelGradientTest, GridCoefficientsMatchFiniteDifferences) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        auto grid = randomGrid3d(4, 4, 3, rng);
        const Guidance lum;
        const Query q = *offKinkQuery(rng, grid, lum);
        const Rgb up = randomColor(rng, -1, 1);
        std::vector<double> analytic(grid.coeffs().size(), 0.0);
        gradProcessPixel(grid, q.u, q.v, q.c, lum, up).accumulateGrid(analytic);
        std::vector<double> params(grid.coeffs().begin(), grid.coeffs().end());
        auto f = [&](std::span<const double> p) {
            std::copy(p.begin(), p.end(), grid.coeffs().begin());
            const Rgb o = processPixel(grid, q.u, q.v, q.c, lum);
            return up[0] * o[0] + up[1] * o[1] + up[2] * o[2];
        };
        const auto rep = checkGradients(f, params, analytic);
        EXPECT_LT(rep.maxRelativeError, 1e-4) << "trial " << trial;
    }
}

TEST(ProcessPixelGradientTest, ColorMatchesFiniteDifferencesWithLuminanceGuidance) {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 100; ++trial) {
        const auto grid = randomGrid3d(5, 4, 4, rng);
        const Guidance lum;
        const Query q = *offKinkQuery(rng, grid, lum);
        const Rgb up = randomColor(rng, -1, 1);
        const auto g = gradProcessPixel(grid, q.u, q.v, q.c, lum, up);
        std::vector<double> params(q.c.begin(), q.c.end());
        auto f = [&](std::span<const double> p) {
            const Rgb o = processPixel(grid, q.u, q.v, {p[0], p[1], p[2]}, lum);
            return up[0] * o[0] + up[1] * o[1] + up[2] * o[2];
        };
        const auto rep = checkGradients(f, params, g.color, 1e-6);
        EXPECT_LT(rep.maxRelativeError, 1e-4) << "trial " << trial;
    }
}

TEST(ProcessPixelGradientTest, MlpGuidanceParametersMatchFiniteDifferences) {
    std::mt19937_64 rng(23);
    int checked = 0;
    while (checked < 100) {
        const auto grid = randomGrid3d(4, 4, 4, rng);
        Guidance mlp = testing::randomMlp(rng);
        const auto found = offKinkQuery(rng, grid, mlp);
        if (!found) continue;
        const Query q = *found;
        const Rgb up = randomColor(rng, -1, 1);
        const auto g = gradProcessPixel(grid, q.u, q.v, q.c, mlp, up);
        std::vector<double> params(mlp.params().begin(), mlp.params().end());
        // Skip draws with a hidden pre-activation near the ReLU kink.
        bool nearRelu = false;
        for (int h = 0; h < MlpGuidance::kHidden; ++h) {
            double pre = params[MlpGuidance::kB1 + h];
            for (int k = 0; k < 3; ++k) pre += params[MlpGuidance::kW1 + h * 3 + k] * q.c[k];
            nearRelu = nearRelu || std::abs(pre) < 1e-3;
        }
        if (nearRelu) continue;
        auto f = [&](std::span<const double> p) {
            std::copy(p.begin(), p.end(), mlp.params().begin());
            const Rgb o = processPixel(grid, q.u, q.v, q.c, mlp);
            return up[0] * o[0] + up[1] * o[1] + up[2] * o[2];
        };
        const auto rep = checkGradients(f, params, g.guidance.params, 1e-6);
        EXPECT_LT(rep.maxRelativeError, 1e-4) << "case " << checked;
        ++checked;
    }
}

TEST(ProcessPixelGradientTest, AccumulatingVariantAgreesWithDenseVariant) {
    std::mt19937_64 rng(24);
    const auto grid = randomGrid3d(5, 5, 3, rng);
    const Guidance mlp = testing::randomMlp(rng);
    const Rgb c = randomColor(rng), up = randomColor(rng, -1, 1);
    const auto dense = gradProcessPixel(grid, 0.37, 0.61, c, mlp, up);
    std::vector<double> gridA(grid.coeffs().size(), 0.0), gridB(grid.coeffs().size(), 1.0);
    dense.accumulateGrid(gridA);
    Rgb color{0.5, 0.5, 0.5};
    std::vector<double> params(MlpGuidance::kParamCount, 2.0);
    accumulateProcessPixelGradient(grid, 0.37, 0.61, c, mlp, up, gridB, color, params);
    for (std::size_t n = 0; n < gridA.size(); ++n) EXPECT_NEAR(gridB[n], gridA[n] + 1.0, 1e-12);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(color[k], dense.color[k] + 0.5, 1e-12);
    for (int p = 0; p < MlpGuidance::kParamCount; ++p) EXPECT_NEAR(params[p], dense.guidance.params[p] + 2.0, 1e-12);
}

TEST(ProcessPixelGradientTest, KinkSubgradientIsZeroAlongGuidance) {
    // Guidance exactly on a cell boundary: the slope along the guidance axis is 0.
    BilateralGrid3D grid(2, 2, 3);
    std::mt19937_64 rng(4);
    for (double& c : grid.coeffs()) c = uniform(rng, -1, 1);
    const auto s = sliceStencil3d(grid, 0.3, 0.7, 0.5);
    for (double d : s.guidanceSlopes) EXPECT_EQ(d, 0.0);
    const auto outside = sliceStencil3d(grid, 0.3, 0.7, 1.3);
    for (double d : outside.guidanceSlopes) EXPECT_EQ(d, 0.0);
}

}  // namespace
}  // namespace bilagrid
