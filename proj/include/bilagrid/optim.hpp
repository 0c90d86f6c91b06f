// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace bilagrid {

struct AdamHyperParams {
    double lr = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// A named trainable block and its gradient, both viewed in place.
struct ParamBlock {
    std::string name;
    std::span<double> values;
    std::span<const double> grads;
    /// Overrides AdamState's default learning rate when > 0.
    double lr = 0.0;
};

/// Adam with bias correction over named parameter blocks. Moment buffers are
/// created on first sight of a block name and must keep their size.
class AdamState {
public:
    explicit AdamState(AdamHyperParams hp = {}) : hp_(hp) {}

    const AdamHyperParams& hyperParams() const { return hp_; }
    long step() const { return step_; }

    /// Optional cosine decay of every block's learning rate to zero over totalSteps.
    void setCosineDecay(long totalSteps) { cosineSteps_ = totalSteps; }

    /// Applies one update. Throws std::invalid_argument on a shape mismatch.
    /// If any gradient entry is non-finite nothing is modified and false is
    /// returned (the step counter does not advance).
    bool update(std::span<const ParamBlock> blocks);

    const std::vector<double>& firstMoment(const std::string& name) const { return moments_.at(name).m; }
    const std::vector<double>& secondMoment(const std::string& name) const { return moments_.at(name).v; }

private:
    struct Moments {
        std::vector<double> m;
        std::vector<double> v;
    };
    AdamHyperParams hp_;
    long step_ = 0;
    long cosineSteps_ = 0;
    std::map<std::string, Moments> moments_;
};

struct GradientCheckReport {
    double maxRelativeError = 0.0;
    std::size_t worstIndex = 0;
    double worstAnalytic = 0.0;
    double worstNumeric = 0.0;
    std::vector<double> numeric;
};

/// Compares `analytic` against central differences (f(x+h) - f(x-h)) / 2h for
/// every coordinate of params (restored afterwards). f is evaluated once more
/// at the unperturbed params at the end. The relative error of a coordinate
/// is |a - n| / max(|a|, |n|, floor).
GradientCheckReport checkGradients(const std::function<double(std::span<const double>)>& f,
                                   std::span<double> params, std::span<const double> analytic, double h = 1e-4,
                                   double floor = 1e-6);

}  // namespace bilagrid
