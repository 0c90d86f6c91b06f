// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#include "bilagrid/grid3d.hpp"

#include <cmath>
#include <stdexcept>

#include "bilagrid/interp.hpp"

namespace bilagrid {

BilateralGrid3D::BilateralGrid3D(int width, int height, int depth) : width_(width), height_(height), depth_(depth) {
    if (width < 1 || height < 1 || depth < 1) {
        throw std::invalid_argument("bilateral grid dimensions must be >= 1");
    }
    coeffs_.resize(cellCount() * kCoeffs);
    const auto id = AffineTransform::identity();
    for (std::size_t c = 0; c < cellCount(); ++c) {
        std::copy(id.m.begin(), id.m.end(), coeffs_.begin() + static_cast<std::ptrdiff_t>(c * kCoeffs));
    }
}

AffineTransform BilateralGrid3D::cell(int i, int j, int k) const {
    AffineTransform t;
    const double* src = &coeffs_[cellIndex(i, j, k) * kCoeffs];
    std::copy(src, src + kCoeffs, t.m.begin());
    return t;
}

void BilateralGrid3D::setCell(int i, int j, int k, const AffineTransform& t) {
    std::copy(t.m.begin(), t.m.end(), coeffs_.begin() + static_cast<std::ptrdiff_t>(cellIndex(i, j, k) * kCoeffs));
}

bool BilateralGrid3D::finite() const {
    for (double c : coeffs_) {
        if (!std::isfinite(c)) return false;
    }
    return true;
}

SliceStencil3D sliceStencil3d(const BilateralGrid3D& grid, double u, double v, double g) {
    const AxisWeights ax = axisWeights(u, grid.width());
    const AxisWeights ay = axisWeights(v, grid.height());
    const AxisWeights ag = axisWeights(g, grid.depth());
    SliceStencil3D s;
    int n = 0;
    for (int di = 0; di < 2; ++di) {
        const int i = di ? ax.hi : ax.lo;
        const double wx = di ? ax.wHi : ax.wLo;
        for (int dj = 0; dj < 2; ++dj) {
            const int j = dj ? ay.hi : ay.lo;
            const double wy = dj ? ay.wHi : ay.wLo;
            for (int dk = 0; dk < 2; ++dk, ++n) {
                const int k = dk ? ag.hi : ag.lo;
                const double wg = dk ? ag.wHi : ag.wLo;
                s.cells[n] = grid.cellIndex(i, j, k);
                s.weights[n] = wx * wy * wg;
                s.guidanceSlopes[n] = wx * wy * (dk ? ag.slope : -ag.slope);
            }
        }
    }
    return s;
}

namespace {

AffineTransform interpolate(std::span<const double> coeffs, const std::array<std::size_t, 8>& cells,
                            const std::array<double, 8>& weights) {
    AffineTransform t;
    for (int n = 0; n < 8; ++n) {
        if (weights[n] == 0.0) continue;
        const double* src = &coeffs[cells[n] * BilateralGrid3D::kCoeffs];
        for (int q = 0; q < BilateralGrid3D::kCoeffs; ++q) t.m[q] += weights[n] * src[q];
    }
    return t;
}

}  // namespace

AffineTransform slice3d(const BilateralGrid3D& grid, double u, double v, double g) {
    const SliceStencil3D s = sliceStencil3d(grid, u, v, g);
    return interpolate(grid.coeffs(), s.cells, s.weights);
}

Rgb processPixel(const BilateralGrid3D& grid, double u, double v, const Rgb& c, const Guidance& guidance) {
    return applyAffine(slice3d(grid, u, v, guidance(c)), c);
}

void ProcessPixelGradient::accumulateGrid(std::span<double> gridGrad) const {
    for (int n = 0; n < 8; ++n) {
        if (stencil.weights[n] == 0.0) continue;
        double* dst = &gridGrad[stencil.cells[n] * BilateralGrid3D::kCoeffs];
        for (int q = 0; q < BilateralGrid3D::kCoeffs; ++q) dst[q] += stencil.weights[n] * transformGrad.m[q];
    }
}

namespace {

// Shared backward: returns dL/dg and fills the pieces common to both entry points.
double backwardCore(const BilateralGrid3D& grid, const SliceStencil3D& s, const Rgb& c, const Rgb& upstream,
                    AffineTransform& transformGrad, Rgb& colorGrad) {
    const AffineTransform t = interpolate(grid.coeffs(), s.cells, s.weights);
    transformGrad = affineTransformGradient(c, upstream);
    colorGrad = colorGrad + affineColorGradient(t, upstream);
    double dg = 0.0;
    for (int n = 0; n < 8; ++n) {
        if (s.guidanceSlopes[n] == 0.0) continue;
        const double* src = &grid.coeffs()[s.cells[n] * BilateralGrid3D::kCoeffs];
        double proj = 0.0;
        for (int q = 0; q < BilateralGrid3D::kCoeffs; ++q) proj += src[q] * transformGrad.m[q];
        dg += s.guidanceSlopes[n] * proj;
    }
    return dg;
}

}  // namespace

ProcessPixelGradient gradProcessPixel(const BilateralGrid3D& grid, double u, double v, const Rgb& c,
                                      const Guidance& guidance, const Rgb& upstream) {
    ProcessPixelGradient out;
    out.stencil = sliceStencil3d(grid, u, v, guidance(c));
    if (guidance.trainable()) out.guidance.params.assign(MlpGuidance::kParamCount, 0.0);
    const double dg = backwardCore(grid, out.stencil, c, upstream, out.transformGrad, out.color);
    guidance.accumulateBackward(c, dg, out.color, out.guidance.params);
    out.guidance.color = guidance.backward(c, dg).color;
    return out;
}

void accumulateProcessPixelGradient(const BilateralGrid3D& grid, double u, double v, const Rgb& c,
                                    const Guidance& guidance, const Rgb& upstream, std::span<double> gridGrad,
                                    Rgb& colorGrad, std::span<double> guidanceGrad) {
    const SliceStencil3D s = sliceStencil3d(grid, u, v, guidance(c));
    AffineTransform transformGrad;
    const double dg = backwardCore(grid, s, c, upstream, transformGrad, colorGrad);
    guidance.accumulateBackward(c, dg, colorGrad, guidanceGrad);
    for (int n = 0; n < 8; ++n) {
        if (s.weights[n] == 0.0) continue;
        double* dst = &gridGrad[s.cells[n] * BilateralGrid3D::kCoeffs];
        for (int q = 0; q < BilateralGrid3D::kCoeffs; ++q) dst[q] += s.weights[n] * transformGrad.m[q];
    }
}

}  // namespace bilagrid
