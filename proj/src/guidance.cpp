// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#include "bilagrid/guidance.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace bilagrid {

MlpGuidance MlpGuidance::initialized(std::uint64_t seed, double scale) {
    MlpGuidance net;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-scale, scale);
    for (int i = 0; i < kHidden * 3; ++i) net.params[kW1 + i] = dist(rng);
    return net;
}

Guidance Guidance::mlp(MlpGuidance net) {
    if (net.params.size() != static_cast<std::size_t>(MlpGuidance::kParamCount)) {
        throw std::invalid_argument("MLP guidance: wrong parameter count");
    }
    for (double p : net.params) {
        if (!std::isfinite(p)) throw std::invalid_argument("MLP guidance: non-finite parameter");
    }
    Guidance g;
    g.kind_ = Kind::Mlp;
    g.mlp_ = std::move(net);
    return g;
}

namespace {

struct MlpForward {
    std::array<double, MlpGuidance::kHidden> pre{};
    std::array<double, MlpGuidance::kHidden> hidden{};
    double tanhOut = 0.0;
    double out = 0.0;
};

MlpForward mlpForward(std::span<const double> p, const Rgb& c) {
    MlpForward f;
    double s = p[MlpGuidance::kB2];
    for (int h = 0; h < MlpGuidance::kHidden; ++h) {
        const double* w = &p[MlpGuidance::kW1 + h * 3];
        f.pre[h] = w[0] * c[0] + w[1] * c[1] + w[2] * c[2] + p[MlpGuidance::kB1 + h];
        f.hidden[h] = f.pre[h] > 0.0 ? f.pre[h] : 0.0;
        s += p[MlpGuidance::kW2 + h] * f.hidden[h];
    }
    f.tanhOut = std::tanh(2.0 * s);
    f.out = 0.5 * f.tanhOut + 0.5;
    return f;
}

double luminanceRaw(const Rgb& c) {
    const auto& k = LuminanceGuidance::kCoefficients;
    return k[0] * c[0] + k[1] * c[1] + k[2] * c[2];
}

}  // namespace

double Guidance::operator()(const Rgb& c) const {
    if (kind_ == Kind::Luminance) return clamp01(luminanceRaw(c));
    return mlpForward(mlp_.params, c).out;
}

void Guidance::accumulateBackward(const Rgb& c, double upstream, Rgb& colorGrad, std::span<double> paramGrad) const {
    if (upstream == 0.0) return;
    if (kind_ == Kind::Luminance) {
        const double raw = luminanceRaw(c);
        if (raw > 0.0 && raw < 1.0) {
            for (int k = 0; k < 3; ++k) colorGrad[k] += upstream * LuminanceGuidance::kCoefficients[k];
        }
        return;
    }
    const auto& p = mlp_.params;
    const MlpForward f = mlpForward(p, c);
    // d out / d s = (1 - tanh^2(2s)) * 2 / 2
    const double ds = upstream * (1.0 - f.tanhOut * f.tanhOut);
    const bool withParams = !paramGrad.empty();
    if (withParams) paramGrad[MlpGuidance::kB2] += ds;
    for (int h = 0; h < MlpGuidance::kHidden; ++h) {
        if (withParams) paramGrad[MlpGuidance::kW2 + h] += ds * f.hidden[h];
        if (f.pre[h] <= 0.0) continue;
        const double dpre = ds * p[MlpGuidance::kW2 + h];
        const int w = MlpGuidance::kW1 + h * 3;
        if (withParams) {
            paramGrad[MlpGuidance::kB1 + h] += dpre;
            for (int k = 0; k < 3; ++k) paramGrad[w + k] += dpre * c[k];
        }
        for (int k = 0; k < 3; ++k) colorGrad[k] += dpre * p[w + k];
    }
}

GuidanceGradient Guidance::backward(const Rgb& c, double upstream) const {
    GuidanceGradient g;
    if (kind_ == Kind::Mlp) g.params.assign(MlpGuidance::kParamCount, 0.0);
    accumulateBackward(c, upstream, g.color, g.params);
    return g;
}

}  // namespace bilagrid
