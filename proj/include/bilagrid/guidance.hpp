// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "bilagrid/types.hpp"

namespace bilagrid {

/// Fixed gray-scale guidance: dot((0.299, 0.587, 0.114), c), clamped to [0,1].
struct LuminanceGuidance {
    static constexpr std::array<double, 3> kCoefficients{0.299, 0.587, 0.114};
};

/// Two-layer guidance network with a hidden width of 8:
///   g(c) = tanh(2 * (W2 * relu(W1 * c + b1) + b2)) / 2 + 0.5
/// Parameters are stored flat as [W1 (8x3 row-major) | b1 (8) | W2 (8) | b2].
struct MlpGuidance {
    static constexpr int kHidden = 8;
    static constexpr int kW1 = 0;
    static constexpr int kB1 = kW1 + kHidden * 3;
    static constexpr int kW2 = kB1 + kHidden;
    static constexpr int kB2 = kW2 + kHidden;
    static constexpr int kParamCount = kB2 + 1;

    std::vector<double> params = std::vector<double>(kParamCount, 0.0);

    /// W1 uniform in [-scale, scale], everything else zero: the network starts
    /// as the constant 0.5 plane.
    static MlpGuidance initialized(std::uint64_t seed, double scale = 0.1);
};

struct GuidanceGradient {
    Rgb color{0, 0, 0};
    /// Empty for luminance guidance; MlpGuidance::kParamCount entries otherwise.
    std::vector<double> params;
};

/// Guidance function g(.) selecting the grid's third (range) axis.
class Guidance {
public:
    enum class Kind { Luminance, Mlp };

    Guidance() = default;
    static Guidance luminance() { return Guidance(); }
    static Guidance mlp(MlpGuidance net);

    Kind kind() const { return kind_; }
    bool trainable() const { return kind_ == Kind::Mlp; }

    /// Trainable parameters; empty for luminance guidance.
    std::span<double> params() { return trainable() ? std::span<double>(mlp_.params) : std::span<double>(); }
    std::span<const double> params() const {
        return trainable() ? std::span<const double>(mlp_.params) : std::span<const double>();
    }
    const MlpGuidance& network() const { return mlp_; }

    /// Output always lies in [0,1].
    double operator()(const Rgb& c) const;

    /// Chain rule of upstream * g(c) with respect to c and the network parameters.
    GuidanceGradient backward(const Rgb& c, double upstream) const;

    /// Same as backward() but accumulates into existing buffers; paramGrad may
    /// be empty for luminance guidance.
    void accumulateBackward(const Rgb& c, double upstream, Rgb& colorGrad, std::span<double> paramGrad) const;

private:
    Kind kind_ = Kind::Luminance;
    MlpGuidance mlp_;
};

}  // namespace bilagrid
