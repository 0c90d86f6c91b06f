// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "bilagrid/optim.hpp"
#include "test_support.hpp"

namespace bilagrid {
namespace {

// Reference Adam step with bias correction, written out per coordinate.
struct AdamOracle {
    double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    std::vector<double> m, v;
    long t = 0;

    void step(std::vector<double>& x, const std::vector<double>& g) {
        if (m.empty()) m.assign(x.size(), 0.0), v.assign(x.size(), 0.0);
        ++t;
        for (std::size_t i = 0; i < x.size(); ++i) {
            m[i] = b1 * m[i] + (1 - b1) * g[i];
            v[i] = b2 * v[i] + (1 - b2) * g[i] * g[i];
            const double mh = m[i] / (1 - std::pow(b1, t)), vh = v[i] / (1 - std::pow(b2, t));
            x[i] -= lr * mh / (std::sqrt(vh) + eps);
        }
    }
};

TEST(AdamTest, FirstStepMovesByLearningRateAgainstTheGradientSign) {
    std::vector<double> x{1.0, -2.0, 0.5}, g{3.0, -0.01, 100.0};
    AdamState adam({0.05});
    ASSERT_TRUE(adam.update(std::vector<ParamBlock>{{"x", x, g}}));
    EXPECT_NEAR(x[0], 1.0 - 0.05, 1e-8);
    EXPECT_NEAR(x[1], -2.0 + 0.05, 1e-5);
    EXPECT_NEAR(x[2], 0.5 - 0.05, 1e-8);
    EXPECT_EQ(adam.step(), 1);
}

TEST(AdamTest, MatchesReferenceOverManySteps) {
    std::mt19937_64 rng(71);
    std::vector<double> x(7), y;
    for (double& v : x) v = testing::uniform(rng, -1, 1);
    y = x;
    AdamState adam({0.01});
    AdamOracle ref;
    for (int s = 0; s < 50; ++s) {
        std::vector<double> g(7);
        for (double& v : g) v = testing::uniform(rng, -2, 2);
        adam.update(std::vector<ParamBlock>{{"x", x, g}});
        ref.step(y, g);
    }
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(x[i], y[i], 1e-12);
}

TEST(AdamTest, PerBlockLearningRateOverridesTheDefault) {
    std::vector<double> a{0.0}, b{0.0}, g{1.0};
    AdamState adam({0.1});
    adam.update(std::vector<ParamBlock>{{"a", a, g}, {"b", b, g, 0.001}});
    EXPECT_NEAR(a[0], -0.1, 1e-8);
    EXPECT_NEAR(b[0], -0.001, 1e-10);
}

TEST(AdamTest, NonFiniteGradientLeavesEverythingUntouched) {
    std::vector<double> x{1.0, 2.0}, g{0.5, 0.5};
    AdamState adam;
    adam.update(std::vector<ParamBlock>{{"x", x, g}});
    const auto x1 = x;
    const auto m1 = adam.firstMoment("x");
    for (double bad : {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity()}) {
        std::vector<double> gb{0.1, bad};
        EXPECT_FALSE(adam.update(std::vector<ParamBlock>{{"x", x, gb}}));
        EXPECT_EQ(x, x1);
        EXPECT_EQ(adam.firstMoment("x"), m1);
        EXPECT_EQ(adam.step(), 1);
    }
}

TEST(AdamTest, ShapeChangeThrows) {
    std::vector<double> x{1.0, 2.0}, g{0.5, 0.5}, x3{1, 2, 3}, g3{1, 1, 1};
    AdamState adam;
    adam.update(std::vector<ParamBlock>{{"x", x, g}});
    EXPECT_THROW(adam.update(std::vector<ParamBlock>{{"x", x3, g3}}), std::invalid_argument);
    std::vector<double> g1{1.0};
    EXPECT_THROW(adam.update(std::vector<ParamBlock>{{"y", x, g1}}), std::invalid_argument);
}

TEST(AdamTest, UpdateIsInvariantToGradientScale) {
    std::mt19937_64 rng(72);
    std::vector<double> x(5), y;
    for (double& v : x) v = testing::uniform(rng, -1, 1);
    y = x;
    AdamState a({0.01, 0.9, 0.999, 1e-12}), b({0.01, 0.9, 0.999, 1e-12});
    for (int s = 0; s < 20; ++s) {
        std::vector<double> g(5), gs(5);
        for (int i = 0; i < 5; ++i) {
            g[i] = testing::uniform(rng, -1, 1);
            gs[i] = 1000.0 * g[i];
        }
        a.update(std::vector<ParamBlock>{{"x", x, g}});
        b.update(std::vector<ParamBlock>{{"x", y, gs}});
    }
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(x[i], y[i], 1e-9);
}

TEST(AdamTest, CosineDecayScalesTheStep) {
    // With a constant gradient the bias-corrected ratio m/sqrt(v) is 1,
    // so each step equals the decayed learning rate.
    std::vector<double> x{0.0}, g{1.0};
    AdamState adam({1.0});
    adam.setCosineDecay(4);
    double prev = 0.0;
    for (int s = 0; s < 4; ++s) {
        adam.update(std::vector<ParamBlock>{{"x", x, g}});
        const double expected = 0.5 * (1.0 + std::cos(std::numbers::pi * (s + 1) / 4.0));
        EXPECT_NEAR(prev - x[0], expected, 1e-6) << "step " << s;
        prev = x[0];
    }
}

TEST(AdamTest, MinimizesAQuadratic) {
    std::vector<double> x{3.0, -4.0}, g(2);
    AdamState adam({0.05});
    adam.setCosineDecay(2000);
    for (int s = 0; s < 2000; ++s) {
        for (int i = 0; i < 2; ++i) g[i] = 2.0 * x[i];
        adam.update(std::vector<ParamBlock>{{"x", x, g}});
    }
    EXPECT_NEAR(x[0], 0.0, 1e-3);
    EXPECT_NEAR(x[1], 0.0, 1e-3);
}

TEST(GradientCheckTest, AcceptsCorrectAndFlagsWrongGradients) {
    std::vector<double> x{3.0};
    auto f = [](std::span<const double> p) { return p[0] * p[0]; };
    const std::vector<double> good{6.0}, bad{5.0};
    const auto ok = checkGradients(f, x, good);
    EXPECT_NEAR(ok.numeric[0], 6.0, 1e-8);
    EXPECT_LT(ok.maxRelativeError, 1e-8);
    EXPECT_NEAR(checkGradients(f, x, bad).maxRelativeError, 1.0 / 6.0, 1e-8);
    EXPECT_EQ(x[0], 3.0);
    std::vector<double> wrongSize{1.0, 2.0};
    EXPECT_THROW(checkGradients(f, x, wrongSize), std::invalid_argument);
}

TEST(GradientCheckTest, LastEvaluationIsAtTheBasePoint) {
    std::vector<double> x{1.0, -2.0}, state(2), g{0.0, 0.0};
    auto f = [&](std::span<const double> p) {
        std::copy(p.begin(), p.end(), state.begin());
        return p[0] + p[1];
    };
    checkGradients(f, x, g);
    EXPECT_EQ(state, x);
}

}  // namespace
}  // namespace bilagrid
