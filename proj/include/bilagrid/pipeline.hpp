// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bilagrid/grid3d.hpp"
#include "bilagrid/grid4d.hpp"
#include "bilagrid/guidance.hpp"
#include "bilagrid/isp.hpp"
#include "bilagrid/losses.hpp"
#include "bilagrid/scene.hpp"
#include "bilagrid/types.hpp"

namespace bilagrid {

// ------------------------------------------------------------ synthetic data

/// Closed room filling the scene box (opaque walls, floor and ceiling) with
/// three colored objects near the floor. z is up. Every ray cast from inside
/// the room terminates on an opaque surface.
VoxelScene proceduralRoomScene(int resolution = 32);

/// Cameras inside the room on a hemisphere around `target`, looking at it.
/// Azimuths are evenly spaced; elevations alternate between two rings.
std::vector<Camera> hemisphereCameras(int count, int width, int height, double radius = 0.75,
                                      Vec3 target = {0.0, 0.0, -0.6}, double azimuthOffset = 0.0);

/// Clean render, processed image and the chain that produced it. The chain is
/// bookkeeping for evaluation; fitters never receive it.
struct ViewRecord {
    int id = 0;
    Camera camera;
    Image clean;
    Image processed;
    IspChain chain;
};

/// Renders every camera (seed viewSeed(seed, id)) and applies an independently
/// sampled ISP chain per view. Requires at least 3 cameras.
std::vector<ViewRecord> synthesizeDataset(const VoxelScene& scene, const std::vector<Camera>& cameras,
                                          const IspConfig& isp, std::uint64_t seed, int nSamples = 128);

// ------------------------------------------------------------ stage one

/// What the stage-one fitter sees of a view: its camera and its image.
struct TrainingView {
    Camera camera;
    Image image;
};

std::vector<TrainingView> trainingViews(const std::vector<ViewRecord>& records);

struct StageOneConfig {
    int gridWidth = 8;
    int gridHeight = 8;
    int gridDepth = 4;
    double lambdaTv = 10.0;
    int steps = 5000;
    int batchSize = 4096;
    double lrGrid = 1e-2;
    double lrScene = 5e-3;
    double lrDensity = 1e-2;
    /// Grids stay at identity for this many initial steps while the field
    /// absorbs the shared (average) appearance.
    int gridWarmupSteps = 500;
    /// Keep every grid at identity for the whole run (no-grid baseline).
    bool freezeGrids = false;
    bool trainDensity = false;
    bool cosineDecay = false;
    int nSamples = 128;
    /// Samples with compositing weight at or below this are dropped from the
    /// cached per-pixel footprints (frozen-density path only).
    double weightCutoff = 1e-6;
    std::uint64_t seed = 0;
    /// Initial color for every voxel of the fitted field.
    double initialColor = 0.5;
    /// A loss above divergenceFactor * max(first loss, 1) counts as divergence.
    double divergenceFactor = 1e4;
};

struct LossRecord {
    int step = 0;
    LossReport report;
};

struct StageOneResult {
    VoxelScene scene;
    std::vector<BilateralGrid3D> grids;
    std::vector<LossRecord> history;
};

/// Jointly optimizes voxel colors (and densities when enabled) of sceneInit
/// with one bilateral grid per view. Throws DivergenceError on a non-finite or
/// exploding loss.
StageOneResult fitStageOne(const std::vector<TrainingView>& views, const VoxelScene& sceneInit,
                           const StageOneConfig& config);

struct SceneFitResult {
    VoxelScene scene;
    std::vector<LossRecord> history;
};

/// Plain radiance-field fit without any per-view processing model; draws the
/// same pixel batches as fitStageOne for equal seeds. Grid settings are ignored.
SceneFitResult fitScene(const std::vector<TrainingView>& views, const VoxelScene& sceneInit,
                        const StageOneConfig& config);

/// Renders the camera and processes every pixel with the grid.
Image reapplyProcessing(const VoxelScene& scene, const BilateralGrid3D& grid, const Camera& camera, int nSamples,
                        std::uint64_t seed, const Guidance& guidance = {});

// ------------------------------------------------------------ stage two

struct LiftConfig {
    Grid4DDims dims{16, 16, 16, 8};
    int rank = 5;
    double noiseScale = 1e-3;
    double lambdaTv = 1.0;
    int steps = 2500;
    int batchSize = 4096;
    double lr = 1e-2;
    double lrGuidance = 1e-3;
    bool learnGuidance = false;
    bool cosineDecay = false;
    int nSamples = 128;
    double weightCutoff = 1e-6;
    std::uint64_t seed = 0;
    ParafacOptions parafac;
    double divergenceFactor = 1e4;
};

struct LiftResult {
    LowRank4DGrid grid;
    Guidance guidance;
    std::vector<LossRecord> history;
    ParafacReport init;
    /// Data term over the whole edit view after the last step.
    double finalDataLoss = 0.0;
};

/// Fits a low-rank 4D grid (PARAFAC identity init) so that the frozen scene,
/// with every quadrature sample processed by the grid, reproduces the edited
/// view. The scene is never modified.
LiftResult liftEdit(const VoxelScene& frozenScene, const Image& edited, const Camera& editCamera,
                    const LiftConfig& config);

/// Renders the camera with per-sample 4D-grid processing before compositing.
Image renderFinished(const VoxelScene& scene, const LowRank4DGrid& grid, const Guidance& guidance,
                     const Camera& camera, int nSamples, std::uint64_t seed);

// ------------------------------------------------------------ edits and diagnostics

/// Per-pixel affine recolor c -> gains * c + offset.
Image affineEdit(const Image& img, const Rgb& gains, const Rgb& offset);

/// Two-region edit decided by the expected surface point of every pixel:
/// points with dot(normal, p) > offset get `positive`, the others `negative`,
/// blended with a sigmoid of width `falloff` (world units).
Image regionEdit(const VoxelScene& scene, const Camera& camera, const Image& clean, const Vec3& normal,
                 double offset, const AffineTransform& positive, const AffineTransform& negative, double falloff,
                 int nSamples, std::uint64_t seed);

/// Largest |slice - identity| entry over a lattice of `n` queries per axis.
/// n = 0 queries exactly the grid nodes; slices are convex combinations of
/// node transforms, so that value bounds every query.
double maxIdentityDeviation(const BilateralGrid3D& grid, int n = 0);
double maxIdentityDeviation(const LowRank4DGrid& grid, int n = 0);

/// Population variance of the translation entries across all cells of the
/// grids (pooled over the three channels).
double translationVariance(const std::vector<BilateralGrid3D>& grids);

std::string lossHistoryCsv(const std::vector<LossRecord>& history);

}  // namespace bilagrid
