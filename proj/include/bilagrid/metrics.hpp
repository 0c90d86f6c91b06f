// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "bilagrid/types.hpp"

namespace bilagrid {

inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

double meanSquaredError(const Image& a, const Image& b);

/// 10 log10(1 / MSE) over all pixels and channels; +inf for identical images.
/// Throws std::invalid_argument on a shape mismatch.
double psnr(const Image& a, const Image& b);

struct AffineAlignment {
    Image aligned;
    std::array<double, 3> scale{1, 1, 1};
    std::array<double, 3> offset{0, 0, 0};
};

/// Per-channel least-squares scale and offset taking pred onto ref. A channel
/// with zero variance in pred keeps scale 1 and gets the mean difference as offset.
AffineAlignment affineAlign(const Image& pred, const Image& ref);

/// Mean SSIM over valid 11x11 windows (Gaussian, sigma 1.5) of the Rec.601
/// luminance, K1 = 0.01, K2 = 0.03, dynamic range 1. Requires >= 11x11 images.
double ssim(const Image& a, const Image& b);

struct MetricsReport {
    double psnr = 0.0;
    double ssim = 0.0;
    double ccPsnr = 0.0;
    double ccSsim = 0.0;
    std::array<double, 3> scale{1, 1, 1};
    std::array<double, 3> offset{0, 0, 0};
};

MetricsReport evaluate(const Image& pred, const Image& ref);

/// JSON number, or the string "inf" for an infinite value.
nlohmann::json metricValueJson(double v);
std::string metricValueText(double v);

nlohmann::json metricsReportJson(const MetricsReport& r);

/// Table with one row per named entry and the columns view, psnr, ssim,
/// cc_psnr, cc_ssim; a final "mean" row averages the finite values.
std::string metricsCsv(const std::vector<std::pair<std::string, MetricsReport>>& rows);

MetricsReport meanReport(const std::vector<std::pair<std::string, MetricsReport>>& rows);

}  // namespace bilagrid
