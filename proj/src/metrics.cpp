// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#include "bilagrid/metrics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bilagrid {

double meanSquaredError(const Image& a, const Image& b) {
    if (!sameShape(a, b)) throw std::invalid_argument("metrics: image shape mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (int k = 0; k < 3; ++k) {
            const double d = a.pixels[i][k] - b.pixels[i][k];
            sum += d * d;
        }
    }
    return sum / (3.0 * static_cast<double>(a.size()));
}

double psnr(const Image& a, const Image& b) {
    const double mse = meanSquaredError(a, b);
    if (mse == 0.0) return kInfinitePsnr;
    return 10.0 * std::log10(1.0 / mse);
}

AffineAlignment affineAlign(const Image& pred, const Image& ref) {
    if (!sameShape(pred, ref)) throw std::invalid_argument("affineAlign: image shape mismatch");
    AffineAlignment out;
    out.aligned = pred;
    const double n = static_cast<double>(pred.size());
    for (int k = 0; k < 3; ++k) {
        double mp = 0.0, mr = 0.0;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            mp += pred.pixels[i][k];
            mr += ref.pixels[i][k];
        }
        mp /= n;
        mr /= n;
        double cov = 0.0, var = 0.0;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            const double dp = pred.pixels[i][k] - mp;
            cov += dp * (ref.pixels[i][k] - mr);
            var += dp * dp;
        }
        // Rounding leaves a constant channel with a variance near 1e-33, not 0.
        double s = 1.0;
        if (var > 1e-20 * n) s = cov / var;
        const double o = mr - s * mp;
        out.scale[k] = s;
        out.offset[k] = o;
        for (auto& px : out.aligned.pixels) px[k] = s * px[k] + o;
    }
    return out;
}

namespace {

std::vector<double> luminance(const Image& img) {
    std::vector<double> y(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
        const Rgb& c = img.pixels[i];
        y[i] = 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2];
    }
    return y;
}

constexpr int kWindow = 11;

std::array<double, kWindow> gaussianKernel() {
    std::array<double, kWindow> k{};
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double x = i - kWindow / 2;
        k[i] = std::exp(-x * x / (2.0 * 1.5 * 1.5));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

// Separable "valid" filtering: output is (w - 10) x (h - 10).
std::vector<double> filterValid(const std::vector<double>& src, int w, int h) {
    const auto k = gaussianKernel();
    const int ow = w - kWindow + 1, oh = h - kWindow + 1;
    std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int t = 0; t < kWindow; ++t) s += k[t] * src[static_cast<std::size_t>(y) * w + x + t];
            tmp[static_cast<std::size_t>(y) * ow + x] = s;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(ow) * oh);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int t = 0; t < kWindow; ++t) s += k[t] * tmp[static_cast<std::size_t>(y + t) * ow + x];
            out[static_cast<std::size_t>(y) * ow + x] = s;
        }
    }
    return out;
}

}  // namespace

double ssim(const Image& a, const Image& b) {
    if (!sameShape(a, b)) throw std::invalid_argument("ssim: image shape mismatch");
    if (a.width < kWindow || a.height < kWindow) throw std::invalid_argument("ssim: images must be at least 11x11");
    const int w = a.width, h = a.height;
    const auto ya = luminance(a);
    const auto yb = luminance(b);
    std::vector<double> aa(ya.size()), bb(ya.size()), ab(ya.size());
    for (std::size_t i = 0; i < ya.size(); ++i) {
        aa[i] = ya[i] * ya[i];
        bb[i] = yb[i] * yb[i];
        ab[i] = ya[i] * yb[i];
    }
    const auto mua = filterValid(ya, w, h);
    const auto mub = filterValid(yb, w, h);
    const auto saa = filterValid(aa, w, h);
    const auto sbb = filterValid(bb, w, h);
    const auto sab = filterValid(ab, w, h);
    constexpr double c1 = 0.01 * 0.01;
    constexpr double c2 = 0.03 * 0.03;
    double total = 0.0;
    for (std::size_t i = 0; i < mua.size(); ++i) {
        const double va = saa[i] - mua[i] * mua[i];
        const double vb = sbb[i] - mub[i] * mub[i];
        const double cov = sab[i] - mua[i] * mub[i];
        total += ((2.0 * mua[i] * mub[i] + c1) * (2.0 * cov + c2)) /
                 ((mua[i] * mua[i] + mub[i] * mub[i] + c1) * (va + vb + c2));
    }
    return total / static_cast<double>(mua.size());
}

MetricsReport evaluate(const Image& pred, const Image& ref) {
    MetricsReport r;
    r.psnr = psnr(pred, ref);
    r.ssim = ssim(pred, ref);
    const AffineAlignment al = affineAlign(pred, ref);
    r.ccPsnr = psnr(al.aligned, ref);
    r.ccSsim = ssim(al.aligned, ref);
    r.scale = al.scale;
    r.offset = al.offset;
    return r;
}

nlohmann::json metricValueJson(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

std::string metricValueText(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

nlohmann::json metricsReportJson(const MetricsReport& r) {
    return {{"psnr", metricValueJson(r.psnr)},
            {"ssim", metricValueJson(r.ssim)},
            {"cc_psnr", metricValueJson(r.ccPsnr)},
            {"cc_ssim", metricValueJson(r.ccSsim)},
            {"cc_scale", r.scale},
            {"cc_offset", r.offset}};
}

MetricsReport meanReport(const std::vector<std::pair<std::string, MetricsReport>>& rows) {
    MetricsReport m;
    auto mean = [&rows](double MetricsReport::*field) {
        double s = 0.0;
        int n = 0;
        bool anyInf = false;
        for (const auto& [_, r] : rows) {
            const double v = r.*field;
            if (std::isinf(v)) {
                anyInf = true;
                continue;
            }
            s += v;
            ++n;
        }
        if (n == 0) return anyInf ? kInfinitePsnr : 0.0;
        return s / n;
    };
    m.psnr = mean(&MetricsReport::psnr);
    m.ssim = mean(&MetricsReport::ssim);
    m.ccPsnr = mean(&MetricsReport::ccPsnr);
    m.ccSsim = mean(&MetricsReport::ccSsim);
    return m;
}

std::string metricsCsv(const std::vector<std::pair<std::string, MetricsReport>>& rows) {
    std::ostringstream os;
    os << "view,psnr,ssim,cc_psnr,cc_ssim\n";
    auto line = [&os](const std::string& name, const MetricsReport& r) {
        os << name << ',' << metricValueText(r.psnr) << ',' << metricValueText(r.ssim) << ','
           << metricValueText(r.ccPsnr) << ',' << metricValueText(r.ccSsim) << '\n';
    };
    for (const auto& [name, r] : rows) line(name, r);
    line("mean", meanReport(rows));
    return os.str();
}

}  // namespace bilagrid
