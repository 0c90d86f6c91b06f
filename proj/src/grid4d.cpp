// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#include "bilagrid/grid4d.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "bilagrid/cp_als.hpp"
#include "bilagrid/interp.hpp"

namespace bilagrid {

namespace {

constexpr int kCoeffs = 12;

std::array<int, kFamilyCount> familyLengths(const Grid4DDims& d) {
    return {d.depth, d.width, d.height, d.guidance, kCoeffs};
}

}  // namespace

LowRank4DGrid::LowRank4DGrid(Grid4DDims dims, int rank) : dims_(dims), rank_(rank) {
    if (dims.depth < 1 || dims.width < 1 || dims.height < 1 || dims.guidance < 1) {
        throw std::invalid_argument("4D grid dimensions must be >= 1");
    }
    if (rank < 1) throw std::invalid_argument("4D grid rank must be >= 1");
    const auto lens = familyLengths(dims);
    familyOffsets_[0] = 0;
    for (int f = 0; f < kFamilyCount; ++f) {
        familyOffsets_[f + 1] = familyOffsets_[f] + static_cast<std::size_t>(lens[f]) * rank;
    }
    params_.assign(familyOffsets_[kFamilyCount], 0.0);
}

int LowRank4DGrid::familyLength(Family f) const { return familyLengths(dims_)[static_cast<int>(f)]; }

std::size_t LowRank4DGrid::factorOffset(Family f, int r) const {
    return familyOffsets_[static_cast<int>(f)] + static_cast<std::size_t>(r) * familyLength(f);
}

std::span<double> LowRank4DGrid::factor(Family f, int r) {
    return std::span<double>(params_).subspan(factorOffset(f, r), familyLength(f));
}

std::span<const double> LowRank4DGrid::factor(Family f, int r) const {
    return std::span<const double>(params_).subspan(factorOffset(f, r), familyLength(f));
}

bool LowRank4DGrid::finite() const {
    for (double p : params_) {
        if (!std::isfinite(p)) return false;
    }
    return true;
}

std::vector<double> LowRank4DGrid::materialize() const {
    const int D = dims_.depth, W = dims_.width, H = dims_.height, M = dims_.guidance;
    std::vector<double> dense(static_cast<std::size_t>(D) * W * H * M * kCoeffs, 0.0);
    for (int r = 0; r < rank_; ++r) {
        const auto fz = factor(Family::Z, r);
        const auto fx = factor(Family::X, r);
        const auto fy = factor(Family::Y, r);
        const auto fg = factor(Family::Guidance, r);
        const auto ft = factor(Family::Transform, r);
        std::size_t e = 0;
        for (int h = 0; h < D; ++h) {
            for (int i = 0; i < W; ++i) {
                for (int j = 0; j < H; ++j) {
                    for (int k = 0; k < M; ++k) {
                        const double s = fz[h] * fx[i] * fy[j] * fg[k];
                        for (int q = 0; q < kCoeffs; ++q) dense[e++] += s * ft[q];
                    }
                }
            }
        }
    }
    return dense;
}

LowRank4DGrid LowRank4DGrid::identityRankOne(Grid4DDims dims) {
    LowRank4DGrid g(dims, 1);
    for (Family f : {Family::Z, Family::X, Family::Y, Family::Guidance}) {
        for (double& v : g.factor(f, 0)) v = 1.0;
    }
    const auto id = AffineTransform::identity();
    std::copy(id.m.begin(), id.m.end(), g.factor(Family::Transform, 0).begin());
    return g;
}

namespace {

// Per-rank 1D interpolations along the four spatial/guidance axes.
struct Factored4DSlice {
    std::array<AxisWeights, 4> axes;  // z, x, y, g
    std::vector<std::array<double, 4>> interp;  // per rank: interpolated z, x, y, g factor values
    std::vector<double> scalars;  // per rank: product of the four
    AffineTransform transform;
};

Factored4DSlice factoredSlice(const LowRank4DGrid& grid, double x, double y, double z, double g) {
    Factored4DSlice s;
    const auto& d = grid.dims();
    s.axes = {axisWeights(z, d.depth), axisWeights(x, d.width), axisWeights(y, d.height), axisWeights(g, d.guidance)};
    const int R = grid.rank();
    s.interp.resize(R);
    s.scalars.resize(R);
    for (int r = 0; r < R; ++r) {
        double prod = 1.0;
        for (int a = 0; a < 4; ++a) {
            const auto f = grid.factor(static_cast<Family>(a), r);
            const AxisWeights& w = s.axes[a];
            const double v = w.wLo * f[w.lo] + (w.wHi != 0.0 ? w.wHi * f[w.hi] : 0.0);
            s.interp[r][a] = v;
            prod *= v;
        }
        s.scalars[r] = prod;
        const auto ft = grid.factor(Family::Transform, r);
        for (int q = 0; q < kCoeffs; ++q) s.transform.m[q] += prod * ft[q];
    }
    return s;
}

}  // namespace

AffineTransform slice4d(const LowRank4DGrid& grid, double x, double y, double z, double g) {
    return factoredSlice(grid, x, y, z, g).transform;
}

Rgb applyToPoint(const LowRank4DGrid& grid, const Vec3& p, const Rgb& c, const SceneBounds& bounds,
                 const Guidance& guidance) {
    const Vec3 n = bounds.normalize(p);
    return applyAffine(slice4d(grid, n[0], n[1], n[2], guidance(c)), c);
}

void accumulateApplyToPointGradient(const LowRank4DGrid& grid, const Vec3& p, const Rgb& c, const SceneBounds& bounds,
                                    const Guidance& guidance, const Rgb& upstream, std::span<double> factorGrad,
                                    Rgb& colorGrad, std::span<double> guidanceGrad) {
    const Vec3 n = bounds.normalize(p);
    const Factored4DSlice s = factoredSlice(grid, n[0], n[1], n[2], guidance(c));
    const AffineTransform dT = affineTransformGradient(c, upstream);
    colorGrad = colorGrad + affineColorGradient(s.transform, upstream);

    double dg = 0.0;
    const AxisWeights& wg = s.axes[3];
    for (int r = 0; r < grid.rank(); ++r) {
        const auto ft = grid.factor(Family::Transform, r);
        double dScalar = 0.0;
        for (int q = 0; q < kCoeffs; ++q) dScalar += ft[q] * dT.m[q];

        const std::size_t tOff = grid.factorOffset(Family::Transform, r);
        for (int q = 0; q < kCoeffs; ++q) factorGrad[tOff + q] += s.scalars[r] * dT.m[q];
        if (dScalar == 0.0) continue;

        const auto& iv = s.interp[r];
        for (int a = 0; a < 4; ++a) {
            double others = 1.0;
            for (int b = 0; b < 4; ++b) {
                if (b != a) others *= iv[b];
            }
            const double dInterp = dScalar * others;
            const AxisWeights& w = s.axes[a];
            const std::size_t off = grid.factorOffset(static_cast<Family>(a), r);
            factorGrad[off + w.lo] += dInterp * w.wLo;
            if (w.wHi != 0.0) factorGrad[off + w.hi] += dInterp * w.wHi;
            if (a == 3 && wg.slope != 0.0) {
                const auto fg = grid.factor(Family::Guidance, r);
                dg += dInterp * wg.slope * (fg[wg.hi] - fg[wg.lo]);
            }
        }
    }
    guidance.accumulateBackward(c, dg, colorGrad, guidanceGrad);
}

ApplyToPointGradient gradApplyToPoint(const LowRank4DGrid& grid, const Vec3& p, const Rgb& c,
                                      const SceneBounds& bounds, const Guidance& guidance, const Rgb& upstream) {
    ApplyToPointGradient out;
    out.factors.assign(grid.params().size(), 0.0);
    if (guidance.trainable()) out.guidance.assign(MlpGuidance::kParamCount, 0.0);
    accumulateApplyToPointGradient(grid, p, c, bounds, guidance, upstream, out.factors, out.color, out.guidance);
    return out;
}

LowRank4DGrid identityInit(Grid4DDims dims, int rank, double noiseScale, std::uint64_t seed,
                           const ParafacOptions& options, ParafacReport* report) {
    if (rank < 1) throw std::invalid_argument("identityInit: rank must be >= 1");
    if (!(noiseScale >= 0.0)) throw std::invalid_argument("identityInit: noiseScale must be >= 0");

    DenseTensor target;
    target.shape = {dims.depth, dims.width, dims.height, dims.guidance, kCoeffs};
    target.data.assign(target.size(), 0.0);
    const auto id = AffineTransform::identity();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> noise(-noiseScale, noiseScale);
    for (std::size_t e = 0; e < target.data.size(); ++e) {
        target.data[e] = id.m[e % kCoeffs] + (noiseScale > 0.0 ? noise(rng) : 0.0);
    }

    CpAlsOptions als;
    als.maxIterations = options.maxIterations;
    als.tolerance = options.tolerance;
    als.ridge = options.ridge;

    ParafacReport rep;
    double bestError = std::numeric_limits<double>::infinity();
    CpModel best;
    for (int attempt = 0; attempt < std::max(options.restarts, 1); ++attempt) {
        CpModel init = randomCpModel(target.shape, rank, seed * 1000003ULL + 7919ULL * (attempt + 1));
        CpAlsResult res = cpAls(target, std::move(init), als);
        if (!res.finite) {
            rep.restartErrors.push_back(std::numeric_limits<double>::infinity());
            continue;
        }
        rep.restartErrors.push_back(res.relativeError);
        if (res.relativeError < bestError) {
            bestError = res.relativeError;
            best = std::move(res.model);
            rep.iterations = res.iterations;
        }
    }
    if (best.factors.empty()) throw DivergenceError("identityInit: CP-ALS produced non-finite factors on every restart");

    balanceCpModel(best);
    LowRank4DGrid grid(dims, rank);
    for (int f = 0; f < kFamilyCount; ++f) {
        for (int r = 0; r < rank; ++r) {
            auto dst = grid.factor(static_cast<Family>(f), r);
            for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = best.factors[f](static_cast<Eigen::Index>(i), r);
        }
    }

    // Report the exact error of the returned factors against the noisy tensor.
    const std::vector<double> dense = grid.materialize();
    double num = 0.0, den = 0.0;
    for (std::size_t e = 0; e < dense.size(); ++e) {
        const double d = dense[e] - target.data[e];
        num += d * d;
        den += target.data[e] * target.data[e];
    }
    rep.relativeError = std::sqrt(num / den);
    if (report) *report = std::move(rep);
    return grid;
}

FactorTvResult tvLossFactors(const LowRank4DGrid& grid) {
    FactorTvResult out;
    out.gradient.assign(grid.params().size(), 0.0);
    for (Family f : {Family::Z, Family::X, Family::Y, Family::Guidance}) {
        const int len = grid.familyLength(f);
        const double norm = 1.0 / len;
        for (int r = 0; r < grid.rank(); ++r) {
            const auto v = grid.factor(f, r);
            const std::size_t off = grid.factorOffset(f, r);
            for (int i = 0; i + 1 < len; ++i) {
                const double d = v[i + 1] - v[i];
                out.value += norm * d * d;
                out.gradient[off + i + 1] += 2.0 * norm * d;
                out.gradient[off + i] -= 2.0 * norm * d;
            }
        }
    }
    return out;
}

}  // namespace bilagrid
