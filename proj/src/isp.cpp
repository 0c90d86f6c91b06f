// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#include "bilagrid/isp.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace bilagrid {

namespace isp {

double LocalToneMap::gainAt(double u, double v) const {
    double d = 0.0;
    if (shape == Shape::HalfPlane) {
        d = (u - centerU) * std::cos(angle) + (v - centerV) * std::sin(angle);
    } else {
        d = std::hypot(u - centerU, v - centerV) - radius;
    }
    const double s = 1.0 / (1.0 + std::exp(d / falloff));
    return outerGain + (innerGain - outerGain) * s;
}

}  // namespace isp

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

void validateIspOp(const IspOp& op) {
    std::visit(Overloaded{
                   [](const isp::ExposureGain& o) {
                       if (!(o.gain > 0)) throw std::invalid_argument("exposure gain must be > 0");
                   },
                   [](const isp::Gamma& o) {
                       if (!(o.gamma > 0)) throw std::invalid_argument("gamma must be > 0");
                   },
                   [](const isp::WhiteBalance& o) {
                       for (double g : o.gains) {
                           if (!(g > 0)) throw std::invalid_argument("white-balance gains must be > 0");
                       }
                   },
                   [](const isp::SCurve& o) {
                       if (!std::isfinite(o.strength)) throw std::invalid_argument("s-curve strength must be finite");
                   },
                   [](const isp::LocalToneMap& o) {
                       if (!(o.innerGain > 0) || !(o.outerGain > 0)) {
                           throw std::invalid_argument("local tone-map gains must be > 0");
                       }
                       if (!(o.falloff > 0)) throw std::invalid_argument("local tone-map falloff must be > 0");
                   },
               },
               op);
}

Rgb applyIspOp(const IspOp& op, const Rgb& c, double u, double v) {
    return std::visit(Overloaded{
                          [&](const isp::ExposureGain& o) { return o.gain * c; },
                          [&](const isp::Gamma& o) {
                              Rgb out;
                              for (int k = 0; k < 3; ++k) out[k] = std::pow(std::max(c[k], 0.0), o.gamma);
                              return out;
                          },
                          [&](const isp::WhiteBalance& o) {
                              return Rgb{o.gains[0] * c[0], o.gains[1] * c[1], o.gains[2] * c[2]};
                          },
                          [&](const isp::SCurve& o) {
                              Rgb out = c;
                              for (int k = 0; k < 3; ++k) {
                                  const double x = c[k];
                                  if (x > 0.0 && x < 1.0) out[k] = x + o.strength * x * (1.0 - x) * (2.0 * x - 1.0);
                              }
                              return out;
                          },
                          [&](const isp::LocalToneMap& o) { return o.gainAt(u, v) * c; },
                      },
                      op);
}

Image applyIspChain(const IspChain& chain, const Image& clean) {
    for (const auto& op : chain) validateIspOp(op);
    Image out = clean;
    for (int y = 0; y < clean.height; ++y) {
        for (int x = 0; x < clean.width; ++x) {
            const double u = (x + 0.5) / clean.width;
            const double v = (y + 0.5) / clean.height;
            Rgb c = clean.at(x, y);
            for (const auto& op : chain) c = applyIspOp(op, c, u, v);
            out.at(x, y) = c;
        }
    }
    return out;
}

IspConfig IspConfig::variedDefault() {
    IspConfig c;
    c.exposure = true;
    c.gamma = true;
    c.localToneMap = true;
    return c;
}

IspChain sampleIspChain(const IspConfig& cfg, std::mt19937_64& rng) {
    auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    // Gains are drawn log-uniformly so that brightening and darkening are equally likely.
    auto logUniform = [&](double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); };
    IspChain chain;
    if (cfg.exposure) chain.push_back(isp::ExposureGain{logUniform(cfg.gainMin, cfg.gainMax)});
    if (cfg.whiteBalance) {
        chain.push_back(isp::WhiteBalance{{uniform(cfg.wbMin, cfg.wbMax), 1.0, uniform(cfg.wbMin, cfg.wbMax)}});
    }
    if (cfg.gamma) chain.push_back(isp::Gamma{uniform(cfg.gammaMin, cfg.gammaMax)});
    if (cfg.sCurve) chain.push_back(isp::SCurve{uniform(cfg.sCurveMin, cfg.sCurveMax)});
    if (cfg.localToneMap) {
        isp::LocalToneMap ltm;
        ltm.shape = isp::LocalToneMap::Shape::HalfPlane;
        ltm.centerU = uniform(0.3, 0.7);
        ltm.centerV = uniform(0.3, 0.7);
        ltm.angle = uniform(0.0, 2.0 * std::numbers::pi);
        ltm.innerGain = logUniform(cfg.localGainMin, cfg.localGainMax);
        ltm.outerGain = logUniform(cfg.localGainMin, cfg.localGainMax);
        ltm.falloff = uniform(cfg.falloffMin, cfg.falloffMax);
        chain.push_back(ltm);
    }
    return chain;
}

nlohmann::json ispOpToJson(const IspOp& op) {
    using nlohmann::json;
    return std::visit(Overloaded{
                          [](const isp::ExposureGain& o) { return json{{"op", "exposure_gain"}, {"gain", o.gain}}; },
                          [](const isp::Gamma& o) { return json{{"op", "gamma"}, {"gamma", o.gamma}}; },
                          [](const isp::WhiteBalance& o) {
                              return json{{"op", "white_balance"}, {"gains", {o.gains[0], o.gains[1], o.gains[2]}}};
                          },
                          [](const isp::SCurve& o) { return json{{"op", "s_curve"}, {"strength", o.strength}}; },
                          [](const isp::LocalToneMap& o) {
                              return json{{"op", "local_tone_map"},
                                          {"shape", o.shape == isp::LocalToneMap::Shape::HalfPlane ? "half_plane"
                                                                                                     : "radial"},
                                          {"center", {o.centerU, o.centerV}},
                                          {"angle", o.angle},
                                          {"radius", o.radius},
                                          {"inner_gain", o.innerGain},
                                          {"outer_gain", o.outerGain},
                                          {"falloff", o.falloff}};
                          },
                      },
                      op);
}

IspOp ispOpFromJson(const nlohmann::json& j) {
    const std::string kind = j.at("op").get<std::string>();
    IspOp op;
    if (kind == "exposure_gain") {
        op = isp::ExposureGain{j.at("gain").get<double>()};
    } else if (kind == "gamma") {
        op = isp::Gamma{j.at("gamma").get<double>()};
    } else if (kind == "white_balance") {
        const auto g = j.at("gains");
        op = isp::WhiteBalance{{g.at(0).get<double>(), g.at(1).get<double>(), g.at(2).get<double>()}};
    } else if (kind == "s_curve") {
        op = isp::SCurve{j.at("strength").get<double>()};
    } else if (kind == "local_tone_map") {
        isp::LocalToneMap o;
        const std::string shape = j.at("shape").get<std::string>();
        if (shape != "half_plane" && shape != "radial") throw std::invalid_argument("unknown tone-map shape: " + shape);
        o.shape = shape == "radial" ? isp::LocalToneMap::Shape::Radial : isp::LocalToneMap::Shape::HalfPlane;
        o.centerU = j.at("center").at(0).get<double>();
        o.centerV = j.at("center").at(1).get<double>();
        o.angle = j.at("angle").get<double>();
        o.radius = j.at("radius").get<double>();
        o.innerGain = j.at("inner_gain").get<double>();
        o.outerGain = j.at("outer_gain").get<double>();
        o.falloff = j.at("falloff").get<double>();
        op = o;
    } else {
        throw std::invalid_argument("unknown ISP op: " + kind);
    }
    validateIspOp(op);
    return op;
}

nlohmann::json ispConfigToJson(const IspConfig& c) {
    return {{"exposure", c.exposure},          {"gain_range", {c.gainMin, c.gainMax}},
            {"gamma", c.gamma},                {"gamma_range", {c.gammaMin, c.gammaMax}},
            {"white_balance", c.whiteBalance}, {"wb_range", {c.wbMin, c.wbMax}},
            {"s_curve", c.sCurve},             {"s_curve_range", {c.sCurveMin, c.sCurveMax}},
            {"local_tone_map", c.localToneMap}, {"local_gain_range", {c.localGainMin, c.localGainMax}},
            {"falloff_range", {c.falloffMin, c.falloffMax}}};
}

IspConfig ispConfigFromJson(const nlohmann::json& j) {
    static const std::set<std::string> known{"exposure",      "gain_range",    "gamma",          "gamma_range",
                                             "white_balance", "wb_range",      "s_curve",        "s_curve_range",
                                             "local_tone_map", "local_gain_range", "falloff_range"};
    if (!j.is_object()) throw std::invalid_argument("isp config must be an object");
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key)) throw std::invalid_argument("unknown isp config key: " + key);
    }
    IspConfig c;
    auto range = [&j](const char* key, double& lo, double& hi) {
        if (!j.contains(key)) return;
        const auto& r = j.at(key);
        if (!r.is_array() || r.size() != 2) throw std::invalid_argument(std::string(key) + " must be [min, max]");
        lo = r.at(0).get<double>();
        hi = r.at(1).get<double>();
        if (!(hi >= lo)) throw std::invalid_argument(std::string(key) + ": max < min");
    };
    auto flag = [&j](const char* key, bool& v) {
        if (j.contains(key)) v = j.at(key).get<bool>();
    };
    flag("exposure", c.exposure);
    flag("gamma", c.gamma);
    flag("white_balance", c.whiteBalance);
    flag("s_curve", c.sCurve);
    flag("local_tone_map", c.localToneMap);
    range("gain_range", c.gainMin, c.gainMax);
    range("gamma_range", c.gammaMin, c.gammaMax);
    range("wb_range", c.wbMin, c.wbMax);
    range("s_curve_range", c.sCurveMin, c.sCurveMax);
    range("local_gain_range", c.localGainMin, c.localGainMax);
    range("falloff_range", c.falloffMin, c.falloffMax);
    if (!(c.gainMin > 0) || !(c.gammaMin > 0) || !(c.wbMin > 0) || !(c.localGainMin > 0) || !(c.falloffMin > 0)) {
        throw std::invalid_argument("isp config: gains, gamma and falloff ranges must be positive");
    }
    return c;
}

}  // namespace bilagrid
