// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#include "bilagrid/cp_als.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace bilagrid {

std::size_t DenseTensor::size() const {
    std::size_t n = 1;
    for (int s : shape) n *= static_cast<std::size_t>(s);
    return n;
}

DenseTensor CpModel::materialize() const {
    DenseTensor t;
    const int order = static_cast<int>(factors.size());
    for (const auto& f : factors) t.shape.push_back(static_cast<int>(f.rows()));
    t.data.assign(t.size(), 0.0);
    const int rank = this->rank();
    std::vector<int> idx(order, 0);
    for (std::size_t e = 0; e < t.data.size(); ++e) {
        double v = 0.0;
        for (int r = 0; r < rank; ++r) {
            double p = 1.0;
            for (int m = 0; m < order; ++m) p *= factors[m](idx[m], r);
            v += p;
        }
        t.data[e] = v;
        for (int m = order - 1; m >= 0; --m) {
            if (++idx[m] < t.shape[m]) break;
            idx[m] = 0;
        }
    }
    return t;
}

Eigen::MatrixXd mttkrp(const DenseTensor& x, const CpModel& model, int mode) {
    const int order = static_cast<int>(x.shape.size());
    const int rank = model.rank();
    // Contract trailing modes (last first), then leading modes (first first).
    // `cur` holds a row-major tensor over `shape`, with a trailing rank axis
    // once `hasRank` is set.
    std::vector<double> cur = x.data;
    std::vector<int> shape = x.shape;
    bool hasRank = false;

    for (int m = order - 1; m > mode; --m) {
        const int len = shape.back();
        shape.pop_back();
        std::size_t outer = 1;
        for (int s : shape) outer *= static_cast<std::size_t>(s);
        std::vector<double> next(outer * rank, 0.0);
        const Eigen::MatrixXd& a = model.factors[m];
        for (std::size_t p = 0; p < outer; ++p) {
            double* dst = &next[p * rank];
            for (int i = 0; i < len; ++i) {
                if (hasRank) {
                    const double* src = &cur[(p * len + i) * rank];
                    for (int r = 0; r < rank; ++r) dst[r] += src[r] * a(i, r);
                } else {
                    const double v = cur[p * len + i];
                    for (int r = 0; r < rank; ++r) dst[r] += v * a(i, r);
                }
            }
        }
        cur.swap(next);
        hasRank = true;
    }

    for (int m = 0; m < mode; ++m) {
        const int len = shape.front();
        shape.erase(shape.begin());
        std::size_t inner = 1;
        for (int s : shape) inner *= static_cast<std::size_t>(s);
        std::vector<double> next(inner * rank, 0.0);
        const Eigen::MatrixXd& a = model.factors[m];
        for (int i = 0; i < len; ++i) {
            for (std::size_t q = 0; q < inner; ++q) {
                double* dst = &next[q * rank];
                if (hasRank) {
                    const double* src = &cur[(i * inner + q) * rank];
                    for (int r = 0; r < rank; ++r) dst[r] += src[r] * a(i, r);
                } else {
                    const double v = cur[i * inner + q];
                    for (int r = 0; r < rank; ++r) dst[r] += v * a(i, r);
                }
            }
        }
        cur.swap(next);
        hasRank = true;
    }

    const int rows = x.shape[mode];
    Eigen::MatrixXd out(rows, rank);
    for (int i = 0; i < rows; ++i) {
        for (int r = 0; r < rank; ++r) out(i, r) = hasRank ? cur[static_cast<std::size_t>(i) * rank + r] : cur[i];
    }
    return out;
}

namespace {

double squaredNorm(const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    return s;
}

bool allFinite(const CpModel& m) {
    for (const auto& f : m.factors) {
        if (!f.allFinite()) return false;
    }
    return true;
}

}  // namespace

CpAlsResult cpAls(const DenseTensor& x, CpModel init, const CpAlsOptions& options) {
    const int order = static_cast<int>(x.shape.size());
    if (static_cast<int>(init.factors.size()) != order) throw std::invalid_argument("cpAls: factor count != tensor order");
    const int rank = init.rank();
    for (int m = 0; m < order; ++m) {
        if (init.factors[m].rows() != x.shape[m] || init.factors[m].cols() != rank) {
            throw std::invalid_argument("cpAls: factor shape mismatch");
        }
    }

    CpAlsResult result;
    result.model = std::move(init);
    auto& factors = result.model.factors;
    const double normX2 = squaredNorm(x.data);
    const double normX = std::sqrt(normX2);

    std::vector<Eigen::MatrixXd> grams(order);
    for (int m = 0; m < order; ++m) grams[m] = factors[m].transpose() * factors[m];

    double prevFit = 0.0;
    for (int it = 0; it < options.maxIterations; ++it) {
        Eigen::MatrixXd lastM;
        for (int n = 0; n < order; ++n) {
            Eigen::MatrixXd v = Eigen::MatrixXd::Ones(rank, rank);
            for (int m = 0; m < order; ++m) {
                if (m != n) v = v.cwiseProduct(grams[m]);
            }
            v.diagonal().array() += options.ridge;
            const Eigen::MatrixXd mk = mttkrp(x, result.model, n);
            factors[n] = v.ldlt().solve(mk.transpose()).transpose();
            grams[n] = factors[n].transpose() * factors[n];
            if (n == order - 1) lastM = mk;
        }
        result.iterations = it + 1;
        if (!allFinite(result.model)) {
            result.finite = false;
            return result;
        }
        Eigen::MatrixXd h = Eigen::MatrixXd::Ones(rank, rank);
        for (int m = 0; m < order; ++m) h = h.cwiseProduct(grams[m]);
        const double inner = lastM.cwiseProduct(factors[order - 1]).sum();
        const double err2 = std::max(normX2 - 2.0 * inner + h.sum(), 0.0);
        const double relErr = normX > 0.0 ? std::sqrt(err2) / normX : std::sqrt(err2);
        const double fit = 1.0 - relErr;
        result.relativeError = relErr;
        if (it > 0 && std::abs(fit - prevFit) <= options.tolerance * std::max(std::abs(prevFit), 1e-300)) break;
        prevFit = fit;
    }
    return result;
}

CpModel randomCpModel(const std::vector<int>& shape, int rank, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    CpModel m;
    for (int s : shape) {
        Eigen::MatrixXd f(s, rank);
        for (int r = 0; r < rank; ++r) {
            for (int i = 0; i < s; ++i) f(i, r) = dist(rng);
        }
        m.factors.push_back(std::move(f));
    }
    return m;
}

void balanceCpModel(CpModel& model) {
    const int order = static_cast<int>(model.factors.size());
    for (int r = 0; r < model.rank(); ++r) {
        double weight = 1.0;
        std::vector<double> norms(order);
        for (int m = 0; m < order; ++m) {
            norms[m] = model.factors[m].col(r).norm();
            weight *= norms[m];
        }
        if (weight == 0.0 || !std::isfinite(weight)) continue;
        const double target = std::pow(weight, 1.0 / order);
        for (int m = 0; m < order; ++m) model.factors[m].col(r) *= target / norms[m];
    }
}

}  // namespace bilagrid
