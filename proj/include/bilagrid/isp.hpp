// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bilagrid/types.hpp"

namespace bilagrid {

/// Simulated camera-processing operators applied to float images.
namespace isp {

struct ExposureGain {
    double gain = 1.0;
};

/// c -> max(c, 0)^gamma per channel.
struct Gamma {
    double gamma = 1.0;
};

struct WhiteBalance {
    Rgb gains{1, 1, 1};
};

/// c -> c + strength * c (1 - c) (2c - 1) on [0,1], identity outside.
struct SCurve {
    double strength = 0.0;
};

/// Spatially varying gain over normalized image coordinates. The gain is
/// outer + (inner - outer) * sigmoid(-d / falloff) where d is the signed
/// distance to a line (half-plane) or to a circle of `radius` (radial).
struct LocalToneMap {
    enum class Shape { HalfPlane, Radial };
    Shape shape = Shape::HalfPlane;
    double centerU = 0.5;
    double centerV = 0.5;
    double angle = 0.0;   // half-plane normal direction, radians
    double radius = 0.3;  // radial only
    double innerGain = 1.0;
    double outerGain = 1.0;
    double falloff = 0.1;

    double gainAt(double u, double v) const;
};

}  // namespace isp

using IspOp = std::variant<isp::ExposureGain, isp::Gamma, isp::WhiteBalance, isp::SCurve, isp::LocalToneMap>;
using IspChain = std::vector<IspOp>;

/// Throws std::invalid_argument if a parameter is out of its domain
/// (non-positive gains, gamma or falloff).
void validateIspOp(const IspOp& op);

Rgb applyIspOp(const IspOp& op, const Rgb& c, double u, double v);

/// Applies the chain in order to every pixel (u, v at pixel centers).
Image applyIspChain(const IspChain& chain, const Image& clean);

/// Sampling ranges for per-view chains. Disabled stages are skipped, so the
/// default-constructed config is the identity.
struct IspConfig {
    bool exposure = false;
    double gainMin = 0.5, gainMax = 2.0;
    bool gamma = false;
    double gammaMin = 0.8, gammaMax = 1.4;
    bool whiteBalance = false;
    double wbMin = 0.85, wbMax = 1.15;
    bool sCurve = false;
    double sCurveMin = 0.0, sCurveMax = 0.5;
    bool localToneMap = false;
    double localGainMin = 0.6, localGainMax = 1.6;
    double falloffMin = 0.08, falloffMax = 0.2;

    /// Exposure + gamma + one half-plane local tone map per view.
    static IspConfig variedDefault();
};

IspChain sampleIspChain(const IspConfig& config, std::mt19937_64& rng);

nlohmann::json ispOpToJson(const IspOp& op);
IspOp ispOpFromJson(const nlohmann::json& j);
nlohmann::json ispConfigToJson(const IspConfig& c);
/// Rejects unknown keys.
IspConfig ispConfigFromJson(const nlohmann::json& j);

}  // namespace bilagrid
