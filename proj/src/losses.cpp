// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#include "bilagrid/losses.hpp"

#include <stdexcept>

namespace bilagrid {

RenderLossResult renderLoss(std::span<const Rgb> predicted, std::span<const Rgb> target) {
    if (predicted.size() != target.size()) throw std::invalid_argument("renderLoss: batch length mismatch");
    RenderLossResult out;
    out.gradient.resize(predicted.size());
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const Rgb d = predicted[i] - target[i];
        out.value += d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        out.gradient[i] = 2.0 * d;
    }
    return out;
}

double accumulateGridTv(const BilateralGrid3D& grid, double scale, std::span<double> grad) {
    constexpr int C = BilateralGrid3D::kCoeffs;
    const int W = grid.width(), H = grid.height(), M = grid.depth();
    const double norm = 1.0 / static_cast<double>(grid.cellCount());
    const auto coeffs = grid.coeffs();
    double value = 0.0;
    auto diff = [&](std::size_t a, std::size_t b) {
        const double* pa = &coeffs[a * C];
        const double* pb = &coeffs[b * C];
        for (int q = 0; q < C; ++q) {
            const double d = pb[q] - pa[q];
            value += norm * d * d;
            if (!grad.empty()) {
                grad[b * C + q] += scale * 2.0 * norm * d;
                grad[a * C + q] -= scale * 2.0 * norm * d;
            }
        }
    };
    for (int i = 0; i < W; ++i) {
        for (int j = 0; j < H; ++j) {
            for (int k = 0; k < M; ++k) {
                const std::size_t here = grid.cellIndex(i, j, k);
                if (i + 1 < W) diff(here, grid.cellIndex(i + 1, j, k));
                if (j + 1 < H) diff(here, grid.cellIndex(i, j + 1, k));
                if (k + 1 < M) diff(here, grid.cellIndex(i, j, k + 1));
            }
        }
    }
    return value;
}

GridTvResult tvLossGrids(std::span<const BilateralGrid3D> grids) {
    GridTvResult out;
    for (const auto& g : grids) {
        out.gradients.emplace_back(g.coeffs().size(), 0.0);
        out.value += accumulateGridTv(g, 1.0, out.gradients.back());
    }
    return out;
}

// ------------------------------------------------------------ stage one

StageOneGradients::StageOneGradients(const VoxelScene& s, std::span<const BilateralGrid3D> gs, bool withDensity)
    : scene(s, withDensity) {
    for (const auto& g : gs) grids.emplace_back(g.coeffs().size(), 0.0);
}

void StageOneGradients::zero() {
    scene.zero();
    for (auto& g : grids) std::fill(g.begin(), g.end(), 0.0);
}

std::uint64_t viewSeed(std::uint64_t seed, int view) {
    std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(view + 1);
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double stageOneDataTerm(std::span<const Rgb> rendered, std::span<const PixelTarget> batch,
                        std::span<const BilateralGrid3D> grids, std::span<const Camera> cameras,
                        const Guidance& guidance, std::span<Rgb> dRendered,
                        std::span<std::vector<double>> gridGrads) {
    if (rendered.size() != batch.size() || dRendered.size() != batch.size()) {
        throw std::invalid_argument("stageOneDataTerm: batch length mismatch");
    }
    double data = 0.0;
    for (std::size_t n = 0; n < batch.size(); ++n) {
        const PixelTarget& p = batch[n];
        if (p.view < 0 || static_cast<std::size_t>(p.view) >= grids.size() ||
            static_cast<std::size_t>(p.view) >= cameras.size()) {
            throw std::out_of_range("stage-one objective: view index out of range");
        }
        const Camera& cam = cameras[p.view];
        const double u = pixelU(p.px, cam.width);
        const double v = pixelU(p.py, cam.height);
        const BilateralGrid3D& grid = grids[p.view];
        const Rgb out = processPixel(grid, u, v, rendered[n], guidance);
        const Rgb d = out - p.target;
        data += d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        const Rgb upstream = 2.0 * d;
        Rgb dColor{0, 0, 0};
        if (gridGrads.empty()) {
            const Rgb c = rendered[n];
            dColor = gradProcessPixel(grid, u, v, c, guidance, upstream).color;
        } else {
            accumulateProcessPixelGradient(grid, u, v, rendered[n], guidance, upstream, gridGrads[p.view], dColor, {});
        }
        dRendered[n] = dColor;
    }
    return data;
}

LossReport stageOneObjective(const VoxelScene& scene, std::span<const Camera> cameras,
                             std::span<const BilateralGrid3D> grids, const Guidance& guidance,
                             std::span<const PixelTarget> batch, double lambdaTv, int nSamples, std::uint64_t seed,
                             StageOneGradients& grads) {
    std::vector<RayRecord> records;
    std::vector<Rgb> rendered;
    records.reserve(batch.size());
    for (const auto& p : batch) {
        if (p.view < 0 || static_cast<std::size_t>(p.view) >= cameras.size() ||
            static_cast<std::size_t>(p.view) >= grids.size()) {
            throw std::out_of_range("stage-one objective: view index out of range");
        }
        records.push_back(renderCameraPixel(scene, cameras[p.view], p.px, p.py, nSamples, viewSeed(seed, p.view)));
        rendered.push_back(records.back().color);
    }
    std::vector<Rgb> dRendered(batch.size());
    LossReport rep;
    rep.lambdaTv = lambdaTv;
    rep.dataTerm = stageOneDataTerm(rendered, batch, grids, cameras, guidance, dRendered, grads.grids);
    for (std::size_t n = 0; n < batch.size(); ++n) gradRenderPixel(scene, records[n], dRendered[n], grads.scene);
    for (std::size_t l = 0; l < grids.size(); ++l) {
        rep.tvTerm += accumulateGridTv(grids[l], lambdaTv, grads.grids.empty() ? std::span<double>{} : grads.grids[l]);
    }
    rep.total = rep.dataTerm + lambdaTv * rep.tvTerm;
    return rep;
}

// ------------------------------------------------------------ stage two

std::vector<EditPixel> prepareEditPixels(const VoxelScene& scene, const Camera& camera, const Image& edited,
                                         int nSamples, std::uint64_t seed, double cutoff) {
    if (edited.width != camera.width || edited.height != camera.height) {
        throw std::invalid_argument("edited image resolution does not match the edit camera");
    }
    std::vector<EditPixel> pixels(edited.size());
    for (int py = 0; py < camera.height; ++py) {
        for (int px = 0; px < camera.width; ++px) {
            const std::size_t n = static_cast<std::size_t>(py) * camera.width + px;
            const RayRecord rec = renderCameraPixel(scene, camera, px, py, nSamples, seed);
            pixels[n].points = weightedPoints(rec, cutoff);
            pixels[n].target = edited.pixels[n];
        }
    }
    return pixels;
}

Rgb finishPixel(std::span<const WeightedPoint> points, const LowRank4DGrid& grid, const Guidance& guidance,
                const SceneBounds& bounds) {
    Rgb c{0, 0, 0};
    for (const auto& pt : points) c = c + pt.weight * applyToPoint(grid, pt.position, pt.color, bounds, guidance);
    return c;
}

StageTwoGradients::StageTwoGradients(const LowRank4DGrid& grid, const Guidance& g) : factors(grid.params().size(), 0.0) {
    if (g.trainable()) guidance.assign(MlpGuidance::kParamCount, 0.0);
}

void StageTwoGradients::zero() {
    std::fill(factors.begin(), factors.end(), 0.0);
    std::fill(guidance.begin(), guidance.end(), 0.0);
}

LossReport stageTwoObjective(const SceneBounds& bounds, const LowRank4DGrid& grid, const Guidance& guidance,
                             std::span<const EditPixel> pixels, std::span<const std::uint32_t> batch,
                             double lambdaTv, StageTwoGradients& grads) {
    LossReport rep;
    rep.lambdaTv = lambdaTv;
    const std::size_t count = batch.empty() ? pixels.size() : batch.size();
    for (std::size_t n = 0; n < count; ++n) {
        const EditPixel& px = pixels[batch.empty() ? n : batch[n]];
        const Rgb out = finishPixel(px.points, grid, guidance, bounds);
        const Rgb d = out - px.target;
        rep.dataTerm += d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        const Rgb upstream = 2.0 * d;
        for (const auto& pt : px.points) {
            Rgb unusedColorGrad{0, 0, 0};
            accumulateApplyToPointGradient(grid, pt.position, pt.color, bounds, guidance, pt.weight * upstream,
                                           grads.factors, unusedColorGrad, grads.guidance);
        }
    }
    const FactorTvResult tv = tvLossFactors(grid);
    rep.tvTerm = tv.value;
    for (std::size_t i = 0; i < tv.gradient.size(); ++i) grads.factors[i] += lambdaTv * tv.gradient[i];
    rep.total = rep.dataTerm + lambdaTv * rep.tvTerm;
    return rep;
}

}  // namespace bilagrid
