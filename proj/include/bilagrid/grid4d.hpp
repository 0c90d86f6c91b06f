// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bilagrid/guidance.hpp"
#include "bilagrid/types.hpp"

namespace bilagrid {

/// Factor families of the CP-factored 4D grid, in storage order.
enum class Family : int { Z = 0, X = 1, Y = 2, Guidance = 3, Transform = 4 };
inline constexpr int kFamilyCount = 5;

struct Grid4DDims {
    int depth = 16;     // D, scene z
    int width = 16;     // W, scene x
    int height = 16;    // H, scene y
    int guidance = 8;   // M
};

/// Low-rank D x W x H x M x 12 bilateral grid held as R rank-one terms
///   sum_r z_r (x) x_r (x) y_r (x) g_r (x) t_r.
/// All factors live in one flat buffer, family-major then rank-major:
/// [z_0..z_{R-1} | x_0.. | y_0.. | g_0.. | t_0..].
class LowRank4DGrid {
public:
    LowRank4DGrid(Grid4DDims dims, int rank);

    const Grid4DDims& dims() const { return dims_; }
    int rank() const { return rank_; }
    int familyLength(Family f) const;

    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }

    std::span<double> factor(Family f, int r);
    std::span<const double> factor(Family f, int r) const;
    std::size_t factorOffset(Family f, int r) const;

    /// Dense D*W*H*M*12 tensor, row-major over (z, x, y, g, coefficient).
    std::vector<double> materialize() const;

    bool finite() const;

    /// Rank-one grid with all-ones spatial factors and the identity transform.
    static LowRank4DGrid identityRankOne(Grid4DDims dims);

private:
    Grid4DDims dims_;
    int rank_;
    std::array<std::size_t, kFamilyCount + 1> familyOffsets_{};
    std::vector<double> params_;
};

/// Factored slice at normalized (x, y, z) and guidance g, all clamped to [0,1].
/// The hat kernel is separable, so each rank's quadrilinear interpolation of
/// z_h x_i y_j g_k collapses to the product of four 1D interpolations.
AffineTransform slice4d(const LowRank4DGrid& grid, double x, double y, double z, double g);

/// Normalizes p into the bounds, slices at guidance(c), applies to c.
Rgb applyToPoint(const LowRank4DGrid& grid, const Vec3& p, const Rgb& c, const SceneBounds& bounds,
                 const Guidance& guidance);

/// Accumulates the backward of applyToPoint into factorGrad (shaped like
/// grid.params()), colorGrad and guidanceGrad (may be empty).
void accumulateApplyToPointGradient(const LowRank4DGrid& grid, const Vec3& p, const Rgb& c, const SceneBounds& bounds,
                                    const Guidance& guidance, const Rgb& upstream, std::span<double> factorGrad,
                                    Rgb& colorGrad, std::span<double> guidanceGrad);

struct ApplyToPointGradient {
    std::vector<double> factors;
    Rgb color{0, 0, 0};
    std::vector<double> guidance;
};

ApplyToPointGradient gradApplyToPoint(const LowRank4DGrid& grid, const Vec3& p, const Rgb& c,
                                      const SceneBounds& bounds, const Guidance& guidance, const Rgb& upstream);

/// CP-ALS settings used by identityInit.
struct ParafacOptions {
    int maxIterations = 200;
    double tolerance = 1e-6;
    int restarts = 3;
    double ridge = 1e-9;
};

struct ParafacReport {
    double relativeError = 0.0;
    std::vector<double> restartErrors;
    int iterations = 0;
};

/// Builds the dense identity-transform tensor, perturbs it with uniform noise
/// in [-noiseScale, noiseScale], and fits R components with CP-ALS keeping
/// the best of several restarts. Throws DivergenceError if every restart
/// yields non-finite factors.
LowRank4DGrid identityInit(Grid4DDims dims, int rank, double noiseScale, std::uint64_t seed,
                           const ParafacOptions& options = {}, ParafacReport* report = nullptr);

struct FactorTvResult {
    double value = 0.0;
    std::vector<double> gradient;
};

/// Sum over the four spatial families and all ranks of
///   (1 / len) * sum_i (f[i+1] - f[i])^2.
FactorTvResult tvLossFactors(const LowRank4DGrid& grid);

}  // namespace bilagrid
