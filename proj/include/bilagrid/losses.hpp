// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bilagrid/grid3d.hpp"
#include "bilagrid/grid4d.hpp"
#include "bilagrid/guidance.hpp"
#include "bilagrid/scene.hpp"
#include "bilagrid/types.hpp"

namespace bilagrid {

struct LossReport {
    double total = 0.0;
    double dataTerm = 0.0;
    double tvTerm = 0.0;
    double lambdaTv = 0.0;
};

struct RenderLossResult {
    double value = 0.0;
    std::vector<Rgb> gradient;  // dL/dpredicted
};

/// Sum over the batch of squared L2 color errors (a sum, not a mean).
/// Throws std::invalid_argument on a length mismatch.
RenderLossResult renderLoss(std::span<const Rgb> predicted, std::span<const Rgb> target);

struct GridTvResult {
    double value = 0.0;
    std::vector<std::vector<double>> gradients;  // one per grid, shaped like coeffs()
};

/// For each grid, (1 / cellCount) times the sum of squared forward
/// differences along x, y and guidance over all 12 channels; summed over grids.
GridTvResult tvLossGrids(std::span<const BilateralGrid3D> grids);

/// Adds scale * TV(grid) gradient into grad and returns TV(grid).
double accumulateGridTv(const BilateralGrid3D& grid, double scale, std::span<double> grad);

// ------------------------------------------------------------ stage one

/// One supervised pixel: the view it belongs to, its normalized image
/// coordinates and the processed color it should reproduce.
struct PixelTarget {
    int view = 0;
    int px = 0;
    int py = 0;
    Rgb target{0, 0, 0};
};

/// Normalized image coordinate of a pixel center.
inline double pixelU(int px, int width) { return (px + 0.5) / width; }

struct StageOneGradients {
    SceneGradient scene;
    std::vector<std::vector<double>> grids;

    StageOneGradients() = default;
    StageOneGradients(const VoxelScene& scene, std::span<const BilateralGrid3D> grids, bool withDensity);
    void zero();
};

/// Data term and grid part of the joint objective given already-rendered
/// colors: sum ||processPixel(A^view, rendered) - target||^2. Writes
/// dL/drendered and, when gridGrads is non-empty, accumulates grid gradients.
double stageOneDataTerm(std::span<const Rgb> rendered, std::span<const PixelTarget> batch,
                        std::span<const BilateralGrid3D> grids, std::span<const Camera> cameras,
                        const Guidance& guidance, std::span<Rgb> dRendered,
                        std::span<std::vector<double>> gridGrads);

/// Full joint objective: render each batch pixel (renderCameraPixel with the
/// per-view seed viewSeed(seed, view)), process it with its view's grid,
/// compare to the target, add lambdaTv * tvLossGrids. Gradients reach both
/// the scene (colors, and densities if grads.scene.rawDensity is non-empty)
/// and every grid. Throws std::out_of_range for a bad view index.
LossReport stageOneObjective(const VoxelScene& scene, std::span<const Camera> cameras,
                             std::span<const BilateralGrid3D> grids, const Guidance& guidance,
                             std::span<const PixelTarget> batch, double lambdaTv, int nSamples, std::uint64_t seed,
                             StageOneGradients& grads);

std::uint64_t viewSeed(std::uint64_t seed, int view);

// ------------------------------------------------------------ stage two

/// Cached compositing samples of one pixel of the (frozen) edit view, with
/// the edited color it should reproduce.
struct EditPixel {
    std::vector<WeightedPoint> points;
    Rgb target{0, 0, 0};
};

/// Renders every pixel of the edit camera once and keeps samples with
/// compositing weight above `cutoff`.
std::vector<EditPixel> prepareEditPixels(const VoxelScene& scene, const Camera& camera, const Image& edited,
                                         int nSamples, std::uint64_t seed, double cutoff);

/// Composites grid-processed sample radiance: sum_j w_j * applyToPoint(x_j, c_j).
Rgb finishPixel(std::span<const WeightedPoint> points, const LowRank4DGrid& grid, const Guidance& guidance,
                const SceneBounds& bounds);

struct StageTwoGradients {
    std::vector<double> factors;
    std::vector<double> guidance;  // empty unless the guidance is trainable

    StageTwoGradients() = default;
    StageTwoGradients(const LowRank4DGrid& grid, const Guidance& guidance);
    void zero();
};

/// Finishing objective over a batch of edit-view pixels (indices into
/// `pixels`; empty batch = all pixels): sum of squared errors of
/// finishPixel against the edited colors plus lambdaTv * tvLossFactors.
/// The scene is only read (bounds); no gradient is formed for it.
LossReport stageTwoObjective(const SceneBounds& bounds, const LowRank4DGrid& grid, const Guidance& guidance,
                             std::span<const EditPixel> pixels, std::span<const std::uint32_t> batch,
                             double lambdaTv, StageTwoGradients& grads);

}  // namespace bilagrid
