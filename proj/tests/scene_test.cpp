// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "bilagrid/optim.hpp"
#include "bilagrid/pipeline.hpp"
#include "bilagrid/scene.hpp"
#include "test_support.hpp"

namespace bilagrid {
namespace {

using testing::uniform;

VoxelScene constantScene(int n, double sigma, const Rgb& c) {
    VoxelScene s(n, n, n, SceneBounds());
    for (double& d : s.rawDensity()) d = softplusInverse(sigma);
    for (std::size_t v = 0; v < s.voxelCount(); ++v) s.setColor(v, c);
    return s;
}

VoxelScene randomScene(int n, std::mt19937_64& rng) {
    VoxelScene s(n, n, n, SceneBounds());
    for (double& d : s.rawDensity()) d = uniform(rng, -1.0, 2.0);
    for (double& c : s.colors()) c = uniform(rng, 0.1, 0.9);
    return s;
}

TEST(SoftplusTest, InverseRoundTrips) {
    for (double y : {1e-6, 0.01, 0.5, 1.0, 7.0, 200.0}) EXPECT_NEAR(softplus(softplusInverse(y)), y, 1e-9 * (1 + y));
    EXPECT_NEAR(softplus(0.0), std::log(2.0), 1e-15);
}

TEST(RenderPixelTest, ConstantSlabMatchesClosedForm) {
    for (double sigma : {0.1, 0.5, 2.0}) {
        const Rgb c{0.2, 0.5, 0.8};
        const auto scene = constantScene(4, sigma, c);
        Ray ray;
        ray.origin = {0.1, -0.2, -3.0};
        ray.direction = {0, 0, 1};
        ray.near = 2.0;
        ray.far = 4.0;
        const auto rec = renderPixel(scene, ray, 256, 7);
        const double a = 1.0 - std::exp(-sigma * 2.0);
        for (int k = 0; k < 3; ++k) EXPECT_NEAR(rec.color[k], a * c[k], 1e-3);
    }
}

TEST(RenderPixelTest, WeightsAreSubStochasticAndDeltasPartitionTheInterval) {
    std::mt19937_64 rng(51);
    const auto scene = randomScene(5, rng);
    for (int trial = 0; trial < 50; ++trial) {
        Ray ray;
        ray.origin = {uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5), -2.0};
        ray.direction = {0, 0, 1};
        ray.near = 1.0;
        ray.far = uniform(rng, 1.5, 3.0);
        const auto rec = renderPixel(scene, ray, 64, rng());
        double wsum = 0.0, dsum = 0.0, prevT = 2.0;
        for (const auto& s : rec.samples) {
            wsum += s.weight;
            dsum += s.delta;
            EXPECT_GE(s.weight, 0.0);
            EXPECT_LE(s.transmittance, prevT);
            EXPECT_GE(s.t, ray.near);
            EXPECT_LE(s.t, ray.far);
            prevT = s.transmittance;
        }
        EXPECT_LE(wsum, 1.0 + 1e-12);
        EXPECT_NEAR(dsum, ray.far - ray.near, 1e-12);
    }
}

TEST(RenderPixelTest, MissIsBlack) {
    const auto scene = constantScene(4, 5.0, {1, 1, 1});
    const Camera cam = Camera::lookAt({0, 0, -5}, {0, 0, -10}, {0, -1, 0}, 16, 16, 10.0);
    const auto rec = renderCameraPixel(scene, cam, 8, 8, 32, 1);
    EXPECT_EQ(rec.color, (Rgb{0, 0, 0}));
    EXPECT_TRUE(rec.samples.empty());
}

TEST(RenderPixelTest, DeterministicPerSeed) {
    std::mt19937_64 rng(52);
    const auto scene = randomScene(4, rng);
    const Camera cam = Camera::lookAt({0, 0, -3}, {0, 0, 0}, {0, -1, 0}, 12, 12, 10.0);
    const Image a = renderView(scene, cam, 32, 9), b = renderView(scene, cam, 32, 9), c = renderView(scene, cam, 32, 10);
    EXPECT_EQ(a.pixels, b.pixels);
    EXPECT_NE(a.pixels, c.pixels);
}

TEST(RenderGradientTest, ColorsAndDensitiesMatchFiniteDifferences) {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 20; ++trial) {
        auto scene = randomScene(3, rng);
        Ray ray;
        ray.origin = {uniform(rng, -0.6, 0.6), uniform(rng, -0.6, 0.6), -2.0};
        ray.direction = {uniform(rng, -0.2, 0.2), uniform(rng, -0.2, 0.2), 1.0};
        const double n = std::sqrt(dot(ray.direction, ray.direction));
        for (double& d : ray.direction) d /= n;
        const auto hit = intersectBounds(ray.origin, ray.direction, scene.bounds());
        ASSERT_TRUE(hit.has_value());
        ray.near = hit->first;
        ray.far = hit->second;
        const std::uint64_t seed = rng();
        const Rgb up = testing::randomColor(rng, -1, 1);
        const auto rec = renderPixel(scene, ray, 24, seed);
        SceneGradient grad(scene, true);
        gradRenderPixel(scene, rec, up, grad);
        auto loss = [&] {
            const Rgb c = renderPixel(scene, ray, 24, seed).color;
            return up[0] * c[0] + up[1] * c[1] + up[2] * c[2];
        };
        std::vector<double> colors(scene.colors().begin(), scene.colors().end());
        auto fc = [&](std::span<const double> x) {
            std::copy(x.begin(), x.end(), scene.colors().begin());
            return loss();
        };
        EXPECT_LT(checkGradients(fc, colors, grad.colors, 1e-5).maxRelativeError, 1e-3);
        std::copy(colors.begin(), colors.end(), scene.colors().begin());
        std::vector<double> dens(scene.rawDensity().begin(), scene.rawDensity().end());
        auto fd = [&](std::span<const double> x) {
            std::copy(x.begin(), x.end(), scene.rawDensity().begin());
            return loss();
        };
        EXPECT_LT(checkGradients(fd, dens, grad.rawDensity, 1e-5).maxRelativeError, 1e-3);
    }
}

TEST(FootprintTest, ReproducesTheRenderedColor) {
    std::mt19937_64 rng(54);
    const auto scene = randomScene(5, rng);
    const Camera cam = Camera::lookAt({0.3, -0.2, -3}, {0, 0, 0}, {0, -1, 0}, 16, 16, 14.0);
    for (int py = 0; py < 16; py += 3) {
        for (int px = 0; px < 16; px += 3) {
            const auto rec = renderCameraPixel(scene, cam, px, py, 48, 4);
            const Rgb c = footprintFromRecord(rec).apply(scene.colors());
            for (int k = 0; k < 3; ++k) EXPECT_NEAR(c[k], rec.color[k], 1e-12);
        }
    }
}

TEST(FootprintTest, CutoffDropsOnlyLowWeightSamples) {
    std::mt19937_64 rng(55);
    const auto scene = randomScene(5, rng);
    const Camera cam = Camera::lookAt({0, 0, -3}, {0, 0, 0}, {0, -1, 0}, 8, 8, 7.0);
    const auto rec = renderCameraPixel(scene, cam, 4, 4, 64, 2);
    double dropped = 0.0;
    std::size_t kept = 0;
    for (const auto& s : rec.samples) {
        if (s.weight < 1e-2) dropped += s.weight;
        else ++kept;
    }
    EXPECT_EQ(weightedPoints(rec, 1e-2).size(), kept);
    const Rgb full = footprintFromRecord(rec).apply(scene.colors());
    const Rgb cut = footprintFromRecord(rec, 1e-2).apply(scene.colors());
    for (int k = 0; k < 3; ++k) EXPECT_LE(full[k] - cut[k], dropped + 1e-12);
}

TEST(CameraTest, LookAtAimsTheOpticalAxisAtTheTarget) {
    const Vec3 eye{0.4, -0.5, -2.0}, target{0.1, 0.2, 0.3};
    const Camera cam = Camera::lookAt(eye, target, {0, -1, 0}, 64, 64, 45.7);
    EXPECT_NO_THROW(cam.validate());
    // The optical axis is the third rotation column.
    Vec3 dir = target - eye;
    const double n = std::sqrt(dot(dir, dir));
    for (int r = 0; r < 3; ++r) EXPECT_NEAR(cam.rotation[r * 3 + 2], dir[r] / n, 1e-12);
    const Ray ray = cam.pixelRay(0, 0);
    EXPECT_NEAR(dot(ray.direction, ray.direction), 1.0, 1e-12);
}

TEST(CameraTest, ValidateRejectsBadIntrinsicsAndRotation) {
    Camera c;
    c.focal = 0.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = Camera();
    c.rotation[0] = 2.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(IntersectTest, ClipsToTheBoxAndReportsMisses) {
    const SceneBounds b;
    const auto hit = intersectBounds({0, 0, -3}, {0, 0, 1}, b);
    ASSERT_TRUE(hit.has_value());
    EXPECT_NEAR(hit->first, 2.0, 1e-12);
    EXPECT_NEAR(hit->second, 4.0, 1e-12);
    const auto inside = intersectBounds({0, 0, 0}, {1, 0, 0}, b);
    ASSERT_TRUE(inside.has_value());
    EXPECT_NEAR(inside->first, 0.0, 1e-12);
    EXPECT_NEAR(inside->second, 1.0, 1e-12);
    EXPECT_FALSE(intersectBounds({0, 3, -3}, {0, 0, 1}, b).has_value());
}

TEST(VoxelSceneTest, ChecksumTracksEveryParameter) {
    std::mt19937_64 rng(56);
    auto s = randomScene(3, rng);
    const auto base = s.checksum();
    EXPECT_EQ(base, s.checksum());
    s.colors()[5] += 1e-12;
    EXPECT_NE(base, s.checksum());
    s.colors()[5] -= 1e-12;
    s.rawDensity()[2] = std::nextafter(s.rawDensity()[2], 10.0);
    EXPECT_NE(base, s.checksum());
}

TEST(VoxelSceneTest, StencilWeightsArePartitionOfUnity) {
    const VoxelScene s(4, 5, 6, SceneBounds());
    std::mt19937_64 rng(57);
    for (int trial = 0; trial < 100; ++trial) {
        std::array<std::uint32_t, 8> v{};
        std::array<double, 8> w{};
        s.stencil({uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)}, v, w);
        EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-12);
        for (auto idx : v) EXPECT_LT(idx, s.voxelCount());
    }
}

TEST(ProceduralSceneTest, IsOpaqueFromEveryCamera) {
    const auto scene = proceduralRoomScene(24);
    const auto cams = hemisphereCameras(4, 16, 16);
    for (const auto& cam : cams) {
        for (int py = 0; py < 16; py += 5) {
            for (int px = 0; px < 16; px += 5) {
                const auto rec = renderCameraPixel(scene, cam, px, py, 128, 3);
                double w = 0.0;
                for (const auto& s : rec.samples) w += s.weight;
                EXPECT_GT(w, 0.99);
            }
        }
    }
}

}  // namespace
}  // namespace bilagrid
