// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "bilagrid/losses.hpp"
#include "bilagrid/optim.hpp"
#include "test_support.hpp"

namespace bilagrid {
namespace {

using testing::randomColor;
using testing::randomGrid3d;
using testing::uniform;

TEST(RenderLossTest, IsASumOfSquaredErrorsWithTwiceTheResidualAsGradient) {
    const std::vector<Rgb> pred{{0.1, 0.2, 0.3}, {1.0, 0.0, 0.5}};
    const std::vector<Rgb> target{{0.0, 0.2, 0.5}, {0.5, 0.5, 0.5}};
    const auto r = renderLoss(pred, target);
    EXPECT_NEAR(r.value, 0.01 + 0.04 + 0.25 + 0.25, 1e-15);
    EXPECT_NEAR(r.gradient[0][0], 0.2, 1e-15);
    EXPECT_NEAR(r.gradient[0][2], -0.4, 1e-15);
    EXPECT_NEAR(r.gradient[1][1], -1.0, 1e-15);
}

TEST(RenderLossTest, RejectsLengthMismatch) {
    const std::vector<Rgb> a(3), b(2);
    EXPECT_THROW(renderLoss(a, b), std::invalid_argument);
}

double tvOracle(const BilateralGrid3D& g) {
    double s = 0.0;
    for (int k = 0; k < g.depth(); ++k) {
        for (int j = 0; j < g.height(); ++j) {
            for (int i = 0; i < g.width(); ++i) {
                const auto c = g.cell(i, j, k);
                auto add = [&](const AffineTransform& n) {
                    for (int q = 0; q < 12; ++q) s += (n.m[q] - c.m[q]) * (n.m[q] - c.m[q]);
                };
                if (i + 1 < g.width()) add(g.cell(i + 1, j, k));
                if (j + 1 < g.height()) add(g.cell(i, j + 1, k));
                if (k + 1 < g.depth()) add(g.cell(i, j, k + 1));
            }
        }
    }
    return s / static_cast<double>(g.cellCount());
}

TEST(GridTvTest, MatchesDirectNeighbourSum) {
    std::mt19937_64 rng(61);
    std::vector<BilateralGrid3D> grids{randomGrid3d(4, 3, 5, rng), randomGrid3d(2, 6, 3, rng)};
    const auto tv = tvLossGrids(grids);
    EXPECT_NEAR(tv.value, tvOracle(grids[0]) + tvOracle(grids[1]), 1e-12);
    EXPECT_EQ(tvLossGrids(std::vector<BilateralGrid3D>{BilateralGrid3D(8, 8, 4)}).value, 0.0);
}

TEST(GridTvTest, GradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(62);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<BilateralGrid3D> grids{randomGrid3d(3, 4, 2, rng)};
        const auto tv = tvLossGrids(grids);
        std::vector<double> p(grids[0].coeffs().begin(), grids[0].coeffs().end());
        auto f = [&](std::span<const double> x) {
            std::copy(x.begin(), x.end(), grids[0].coeffs().begin());
            return tvLossGrids(grids).value;
        };
        EXPECT_LT(checkGradients(f, p, tv.gradients[0]).maxRelativeError, 1e-6);
        std::vector<double> acc(p.size(), 1.0);
        std::copy(p.begin(), p.end(), grids[0].coeffs().begin());
        EXPECT_NEAR(accumulateGridTv(grids[0], 3.0, acc), tv.value, 1e-12);
        for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(acc[i], 1.0 + 3.0 * tv.gradients[0][i], 1e-12);
    }
}

// Micro setup: a 3^3 random scene seen by two small cameras.
struct MicroProblem {
    VoxelScene scene{3, 3, 3, SceneBounds()};
    std::vector<Camera> cameras;
    std::vector<BilateralGrid3D> grids;
    std::vector<PixelTarget> batch;
};

MicroProblem microProblem(std::mt19937_64& rng) {
    MicroProblem m;
    for (double& d : m.scene.rawDensity()) d = uniform(rng, -1.0, 1.5);
    for (double& c : m.scene.colors()) c = uniform(rng, 0.1, 0.9);
    m.cameras.push_back(Camera::lookAt({0.2, -0.3, -3.0}, {0, 0, 0}, {0, -1, 0}, 6, 6, 6.0));
    m.cameras.push_back(Camera::lookAt({-2.5, -0.5, -1.5}, {0, 0, 0}, {0, -1, 0}, 6, 6, 6.0));
    m.grids = {randomGrid3d(3, 3, 2, rng, 0.2), randomGrid3d(3, 3, 2, rng, 0.2)};
    for (int n = 0; n < 10; ++n) {
        m.batch.push_back({n % 2, static_cast<int>(rng() % 6), static_cast<int>(rng() % 6), randomColor(rng)});
    }
    return m;
}

TEST(StageOneObjectiveTest, GradientsMatchFiniteDifferences) {
    std::mt19937_64 rng(63);
    for (int trial = 0; trial < 5; ++trial) {
        auto m = microProblem(rng);
        const Guidance lum;
        StageOneGradients g(m.scene, m.grids, true);
        const auto rep = stageOneObjective(m.scene, m.cameras, m.grids, lum, m.batch, 0.5, 16, 11, g);
        EXPECT_NEAR(rep.total, rep.dataTerm + 0.5 * rep.tvTerm, 1e-12);
        auto total = [&] {
            StageOneGradients unused(m.scene, m.grids, false);
            return stageOneObjective(m.scene, m.cameras, m.grids, lum, m.batch, 0.5, 16, 11, unused).total;
        };
        std::vector<double> colors(m.scene.colors().begin(), m.scene.colors().end());
        auto fc = [&](std::span<const double> x) {
            std::copy(x.begin(), x.end(), m.scene.colors().begin());
            return total();
        };
        EXPECT_LT(checkGradients(fc, colors, g.scene.colors, 1e-6).maxRelativeError, 1e-3);
        std::copy(colors.begin(), colors.end(), m.scene.colors().begin());
        std::vector<double> dens(m.scene.rawDensity().begin(), m.scene.rawDensity().end());
        auto fd = [&](std::span<const double> x) {
            std::copy(x.begin(), x.end(), m.scene.rawDensity().begin());
            return total();
        };
        EXPECT_LT(checkGradients(fd, dens, g.scene.rawDensity, 1e-6).maxRelativeError, 1e-3);
        std::copy(dens.begin(), dens.end(), m.scene.rawDensity().begin());
        for (int l = 0; l < 2; ++l) {
            std::vector<double> coeffs(m.grids[l].coeffs().begin(), m.grids[l].coeffs().end());
            auto fg = [&](std::span<const double> x) {
                std::copy(x.begin(), x.end(), m.grids[l].coeffs().begin());
                return total();
            };
            EXPECT_LT(checkGradients(fg, coeffs, g.grids[l], 1e-6).maxRelativeError, 1e-3);
        }
    }
}

TEST(StageOneObjectiveTest, RejectsBadViewIndex) {
    std::mt19937_64 rng(64);
    auto m = microProblem(rng);
    m.batch[3].view = 2;
    StageOneGradients g(m.scene, m.grids, false);
    EXPECT_THROW(stageOneObjective(m.scene, m.cameras, m.grids, Guidance(), m.batch, 0.0, 8, 1, g),
                 std::out_of_range);
}

TEST(StageOneObjectiveTest, IdentityGridsReduceToThePlainRenderLoss) {
    std::mt19937_64 rng(65);
    auto m = microProblem(rng);
    m.grids = {BilateralGrid3D(3, 3, 2), BilateralGrid3D(3, 3, 2)};
    StageOneGradients g(m.scene, m.grids, false);
    const auto rep = stageOneObjective(m.scene, m.cameras, m.grids, Guidance(), m.batch, 10.0, 16, 5, g);
    std::vector<Rgb> rendered, target;
    for (const auto& p : m.batch) {
        rendered.push_back(renderCameraPixel(m.scene, m.cameras[p.view], p.px, p.py, 16, viewSeed(5, p.view)).color);
        target.push_back(p.target);
    }
    EXPECT_NEAR(rep.dataTerm, renderLoss(rendered, target).value, 1e-12);
    EXPECT_EQ(rep.tvTerm, 0.0);
}

struct EditProblem {
    VoxelScene scene{3, 3, 3, SceneBounds()};
    std::vector<EditPixel> pixels;
};

EditProblem editProblem(std::mt19937_64& rng) {
    EditProblem e;
    for (double& d : e.scene.rawDensity()) d = uniform(rng, -0.5, 2.0);
    for (double& c : e.scene.colors()) c = uniform(rng, 0.1, 0.9);
    const Camera cam = Camera::lookAt({0.3, -0.4, -3.0}, {0, 0, 0}, {0, -1, 0}, 5, 5, 5.0);
    e.pixels = prepareEditPixels(e.scene, cam, testing::randomImage(5, 5, rng), 12, 3, 0.0);
    return e;
}

TEST(StageTwoObjectiveTest, GradientsMatchFiniteDifferences) {
    std::mt19937_64 rng(66);
    for (int trial = 0; trial < 5; ++trial) {
        auto e = editProblem(rng);
        auto grid = testing::randomGrid4d({3, 4, 3, 3}, 2, rng);
        Guidance mlp = testing::randomMlp(rng, 0.5);
        const std::vector<std::uint32_t> batch{0, 3, 7, 12, 20, 24};
        StageTwoGradients g(grid, mlp);
        const auto rep = stageTwoObjective(e.scene.bounds(), grid, mlp, e.pixels, batch, 0.7, g);
        EXPECT_NEAR(rep.total, rep.dataTerm + 0.7 * rep.tvTerm, 1e-12);
        auto total = [&] {
            StageTwoGradients unused(grid, mlp);
            return stageTwoObjective(e.scene.bounds(), grid, mlp, e.pixels, batch, 0.7, unused).total;
        };
        std::vector<double> f(grid.params().begin(), grid.params().end());
        auto ff = [&](std::span<const double> x) {
            std::copy(x.begin(), x.end(), grid.params().begin());
            return total();
        };
        EXPECT_LT(checkGradients(ff, f, g.factors, 1e-6).maxRelativeError, 1e-3);
        std::copy(f.begin(), f.end(), grid.params().begin());
        std::vector<double> p(mlp.params().begin(), mlp.params().end());
        auto fp = [&](std::span<const double> x) {
            std::copy(x.begin(), x.end(), mlp.params().begin());
            return total();
        };
        EXPECT_LT(checkGradients(fp, p, g.guidance, 1e-6).maxRelativeError, 1e-3);
    }
}

TEST(StageTwoObjectiveTest, EmptyBatchMeansEveryPixel) {
    std::mt19937_64 rng(67);
    auto e = editProblem(rng);
    const auto grid = testing::randomGrid4d({3, 3, 3, 3}, 2, rng);
    std::vector<std::uint32_t> all(e.pixels.size());
    for (std::uint32_t n = 0; n < all.size(); ++n) all[n] = n;
    StageTwoGradients a(grid, Guidance()), b(grid, Guidance());
    const auto ra = stageTwoObjective(e.scene.bounds(), grid, Guidance(), e.pixels, {}, 0.0, a);
    const auto rb = stageTwoObjective(e.scene.bounds(), grid, Guidance(), e.pixels, all, 0.0, b);
    EXPECT_NEAR(ra.dataTerm, rb.dataTerm, 1e-12);
    EXPECT_TRUE(a.guidance.empty());
}

TEST(StageTwoObjectiveTest, PrepareRejectsResolutionMismatch) {
    const VoxelScene s(2, 2, 2, SceneBounds());
    const Camera cam = Camera::lookAt({0, 0, -3}, {0, 0, 0}, {0, -1, 0}, 5, 5, 5.0);
    EXPECT_THROW(prepareEditPixels(s, cam, Image(4, 5), 8, 1, 0.0), std::invalid_argument);
}

}  // namespace
}  // namespace bilagrid
