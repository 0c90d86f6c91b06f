// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "bilagrid/types.hpp"

namespace bilagrid {

struct Ray {
    Vec3 origin{0, 0, 0};
    Vec3 direction{0, 0, 1};
    double near = 0.0;
    double far = 1.0;
};

/// Pinhole camera, OpenCV convention (x right, y down, z forward).
struct Camera {
    int width = 64;
    int height = 64;
    double focal = 50.0;
    double cx = 32.0;
    double cy = 32.0;
    /// World-from-camera rotation, row-major 3x3.
    std::array<double, 9> rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};
    /// Camera center in world units.
    Vec3 position{0, 0, 0};

    /// Throws std::invalid_argument if focal <= 0, sizes < 1 or rotation is not orthonormal (1e-6).
    void validate() const;

    /// Unit-direction ray through the center of pixel (px, py); near/far unset.
    Ray pixelRay(int px, int py) const;

    static Camera lookAt(const Vec3& eye, const Vec3& target, const Vec3& up, int width, int height, double focal);
};

/// Voxel radiance field with Lambertian colors. Densities are stored raw and
/// exposed through softplus; samples are trilinear between voxel centers
/// (voxel (i,j,k) sits at bounds.min + (i + 0.5) * extent / n).
class VoxelScene {
public:
    VoxelScene(int nx, int ny, int nz, SceneBounds bounds);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nz() const { return nz_; }
    std::size_t voxelCount() const { return static_cast<std::size_t>(nx_) * ny_ * nz_; }
    const SceneBounds& bounds() const { return bounds_; }

    std::size_t voxelIndex(int i, int j, int k) const { return (static_cast<std::size_t>(k) * ny_ + j) * nx_ + i; }

    std::span<double> rawDensity() { return rawDensity_; }
    std::span<const double> rawDensity() const { return rawDensity_; }
    /// 3 entries per voxel.
    std::span<double> colors() { return colors_; }
    std::span<const double> colors() const { return colors_; }

    bool trainableColors = true;

    double density(std::size_t voxel) const;
    Rgb color(std::size_t voxel) const {
        return {colors_[voxel * 3], colors_[voxel * 3 + 1], colors_[voxel * 3 + 2]};
    }
    void setColor(std::size_t voxel, const Rgb& c);

    /// Trilinear stencil of a world point: 8 voxels and weights.
    void stencil(const Vec3& p, std::array<std::uint32_t, 8>& voxels, std::array<double, 8>& weights) const;

    /// FNV-1a hash of the raw parameter bytes; used to verify frozen fields.
    std::uint64_t checksum() const;

private:
    int nx_, ny_, nz_;
    SceneBounds bounds_;
    std::vector<double> rawDensity_;
    std::vector<double> colors_;
};

double softplus(double x);
/// Inverse of softplus for y > 0.
double softplusInverse(double y);

/// Ray-box intersection. Returns [near, far] clipped to t >= 0, or nullopt on a miss.
std::optional<std::pair<double, double>> intersectBounds(const Vec3& origin, const Vec3& direction,
                                                         const SceneBounds& bounds);

struct RenderSample {
    double t = 0.0;
    double delta = 0.0;
    Vec3 position{0, 0, 0};
    std::array<std::uint32_t, 8> voxels{};
    std::array<double, 8> trilinear{};
    double sigma = 0.0;
    double transmittance = 1.0;  // T_j
    double weight = 0.0;         // T_j (1 - exp(-sigma_j delta_j))
    Rgb color{0, 0, 0};
};

/// Forward result of one ray plus everything the backward pass needs.
struct RayRecord {
    Rgb color{0, 0, 0};
    std::vector<RenderSample> samples;
};

/// Emission-absorption quadrature along the ray. Sample j sits at a
/// stratified, jittered position inside the j-th of nSamples equal bins of
/// [near, far]; its interval delta_j is the midpoint partition of [near, far],
/// so the deltas sum to far - near. The jitter stream is seeded by jitterSeed.
RayRecord renderPixel(const VoxelScene& scene, const Ray& ray, int nSamples, std::uint64_t jitterSeed);

/// Like renderPixel but clips the ray to the scene bounds first; a miss is black.
RayRecord renderCameraPixel(const VoxelScene& scene, const Camera& camera, int px, int py, int nSamples,
                            std::uint64_t seed);

struct SceneGradient {
    std::vector<double> colors;
    std::vector<double> rawDensity;  // empty when density gradients are not requested

    SceneGradient() = default;
    SceneGradient(const VoxelScene& scene, bool withDensity);
    void zero();
};

/// Backward of renderPixel for upstream dL/dC. Always fills color gradients;
/// raw-density gradients when grad.rawDensity is non-empty.
void gradRenderPixel(const VoxelScene& scene, const RayRecord& record, const Rgb& upstream, SceneGradient& grad);

/// Per-pixel render of a camera view. Deterministic in (scene, camera, nSamples, seed).
Image renderView(const VoxelScene& scene, const Camera& camera, int nSamples, std::uint64_t seed);

/// Seed of the jitter stream used for pixel (px, py) of a view rendered with `seed`.
std::uint64_t pixelSeed(std::uint64_t seed, int px, int py);

/// Sparse linear map from voxel colors to one pixel color, valid while
/// densities stay fixed: color = sum(weight * voxelColor[voxel]).
struct PixelFootprint {
    std::vector<std::uint32_t> voxels;
    std::vector<double> weights;

    Rgb apply(std::span<const double> colors) const;
    void accumulateGradient(const Rgb& upstream, std::span<double> colorGrad) const;
};

/// Merges a ray's samples into a footprint, dropping samples whose
/// compositing weight is below `cutoff`.
PixelFootprint footprintFromRecord(const RayRecord& record, double cutoff = 0.0);

/// A compositing sample with its radiance, for per-point processing.
struct WeightedPoint {
    Vec3 position;
    Rgb color;
    double weight;
};

std::vector<WeightedPoint> weightedPoints(const RayRecord& record, double cutoff = 0.0);

/// Sum over samples of weight * position: the expected termination point.
Vec3 expectedPoint(const RayRecord& record);

}  // namespace bilagrid
