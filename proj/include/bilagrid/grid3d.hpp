// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "bilagrid/guidance.hpp"
#include "bilagrid/types.hpp"

namespace bilagrid {

/// W x H x M grid of 3x4 affine color transforms over (screen-x, screen-y,
/// guidance). Coefficients are row-major over (x, y, guidance, 12): the cell
/// (i, j, k) starts at ((i * H + j) * M + k) * 12.
class BilateralGrid3D {
public:
    static constexpr int kCoeffs = 12;

    /// Identity-initialized grid. Throws std::invalid_argument if any dim < 1.
    BilateralGrid3D(int width, int height, int depth);

    int width() const { return width_; }
    int height() const { return height_; }
    int depth() const { return depth_; }
    std::size_t cellCount() const { return static_cast<std::size_t>(width_) * height_ * depth_; }

    std::size_t cellIndex(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * height_ + j) * depth_ + k;
    }

    std::span<double> coeffs() { return coeffs_; }
    std::span<const double> coeffs() const { return coeffs_; }

    AffineTransform cell(int i, int j, int k) const;
    void setCell(int i, int j, int k, const AffineTransform& t);

    /// True if every coefficient is finite.
    bool finite() const;

private:
    int width_;
    int height_;
    int depth_;
    std::vector<double> coeffs_;
};

/// The 8 cells touched by a slice and their trilinear weights, plus the
/// derivative of each weight with respect to the guidance coordinate.
struct SliceStencil3D {
    std::array<std::size_t, 8> cells{};
    std::array<double, 8> weights{};
    std::array<double, 8> guidanceSlopes{};
};

SliceStencil3D sliceStencil3d(const BilateralGrid3D& grid, double u, double v, double g);

/// Trilinear hat-kernel interpolation of the grid at (u, v, g), each clamped to [0,1].
AffineTransform slice3d(const BilateralGrid3D& grid, double u, double v, double g);

/// applyAffine(slice3d(grid, u, v, guidance(c)), c).
Rgb processPixel(const BilateralGrid3D& grid, double u, double v, const Rgb& c, const Guidance& guidance);

/// Backward of processPixel for one pixel. The grid gradient is sparse over
/// at most 8 cells: cell n receives weights[n] * transformGrad.
struct ProcessPixelGradient {
    SliceStencil3D stencil;
    AffineTransform transformGrad;
    Rgb color{0, 0, 0};
    GuidanceGradient guidance;

    /// Adds the sparse grid gradient into a dense buffer shaped like grid.coeffs().
    void accumulateGrid(std::span<double> gridGrad) const;
};

ProcessPixelGradient gradProcessPixel(const BilateralGrid3D& grid, double u, double v, const Rgb& c,
                                      const Guidance& guidance, const Rgb& upstream);

/// Accumulating variant used in the training loops: adds into grid, color and
/// guidance-parameter buffers (guidanceGrad may be empty).
void accumulateProcessPixelGradient(const BilateralGrid3D& grid, double u, double v, const Rgb& c,
                                    const Guidance& guidance, const Rgb& upstream, std::span<double> gridGrad,
                                    Rgb& colorGrad, std::span<double> guidanceGrad);

}  // namespace bilagrid
