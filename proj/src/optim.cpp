// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#include "bilagrid/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace bilagrid {

bool AdamState::update(std::span<const ParamBlock> blocks) {
    for (const auto& b : blocks) {
        if (b.values.size() != b.grads.size()) {
            throw std::invalid_argument("adam: gradient shape does not match parameter block '" + b.name + "'");
        }
        auto it = moments_.find(b.name);
        if (it != moments_.end() && it->second.m.size() != b.values.size()) {
            throw std::invalid_argument("adam: parameter block '" + b.name + "' changed size");
        }
        for (double g : b.grads) {
            if (!std::isfinite(g)) return false;
        }
    }

    ++step_;
    const double t = static_cast<double>(step_);
    const double c1 = 1.0 - std::pow(hp_.beta1, t);
    const double c2 = 1.0 - std::pow(hp_.beta2, t);
    double decay = 1.0;
    if (cosineSteps_ > 0) {
        const double progress = std::min(t / static_cast<double>(cosineSteps_), 1.0);
        decay = 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
    }
    for (const auto& b : blocks) {
        auto& mom = moments_[b.name];
        if (mom.m.empty()) {
            mom.m.assign(b.values.size(), 0.0);
            mom.v.assign(b.values.size(), 0.0);
        }
        const double lr = (b.lr > 0.0 ? b.lr : hp_.lr) * decay;
        for (std::size_t i = 0; i < b.values.size(); ++i) {
            const double g = b.grads[i];
            mom.m[i] = hp_.beta1 * mom.m[i] + (1.0 - hp_.beta1) * g;
            mom.v[i] = hp_.beta2 * mom.v[i] + (1.0 - hp_.beta2) * g * g;
            const double mHat = mom.m[i] / c1;
            const double vHat = mom.v[i] / c2;
            b.values[i] -= lr * mHat / (std::sqrt(vHat) + hp_.eps);
        }
    }
    return true;
}

GradientCheckReport checkGradients(const std::function<double(std::span<const double>)>& f,
                                   std::span<double> params, std::span<const double> analytic, double h,
                                   double floor) {
    if (params.size() != analytic.size()) throw std::invalid_argument("checkGradients: size mismatch");
    GradientCheckReport rep;
    rep.numeric.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double x0 = params[i];
        params[i] = x0 + h;
        const double fp = f(params);
        params[i] = x0 - h;
        const double fm = f(params);
        params[i] = x0;
        const double num = (fp - fm) / (2.0 * h);
        rep.numeric[i] = num;
        const double a = analytic[i];
        const double rel = std::abs(a - num) / std::max({std::abs(a), std::abs(num), floor});
        if (rel > rep.maxRelativeError || !std::isfinite(rel)) {
            rep.maxRelativeError = std::isfinite(rel) ? rel : std::numeric_limits<double>::infinity();
            rep.worstIndex = i;
            rep.worstAnalytic = a;
            rep.worstNumeric = num;
        }
    }
    // Objectives that mirror their argument into model state see the base
    // point last, so that state ends where it started.
    if (!params.empty()) f(params);
    return rep;
}

}  // namespace bilagrid
