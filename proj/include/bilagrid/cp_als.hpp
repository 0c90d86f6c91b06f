// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace bilagrid {

/// Dense row-major tensor of arbitrary order.
struct DenseTensor {
    std::vector<int> shape;
    std::vector<double> data;

    std::size_t size() const;
};

/// CP model: one (shape[n] x R) factor matrix per mode.
struct CpModel {
    std::vector<Eigen::MatrixXd> factors;

    int rank() const { return factors.empty() ? 0 : static_cast<int>(factors.front().cols()); }
    DenseTensor materialize() const;
};

struct CpAlsOptions {
    int maxIterations = 200;
    /// Stop when the relative improvement of the fit (1 - relative error) drops below this.
    double tolerance = 1e-6;
    /// Added to the diagonal of each normal-equation system.
    double ridge = 1e-9;
};

struct CpAlsResult {
    CpModel model;
    double relativeError = 0.0;
    int iterations = 0;
    bool finite = true;
};

/// Alternating least squares for the rank-R CP decomposition of x, starting
/// from `init`. Each mode update solves the normal equations
///   A_n (hadamard_{m != n} A_m^T A_m + ridge I) = X_(n) khatri_rao_{m != n} A_m.
CpAlsResult cpAls(const DenseTensor& x, CpModel init, const CpAlsOptions& options = {});

/// Uniform [0,1) factors for the given shape and rank.
CpModel randomCpModel(const std::vector<int>& shape, int rank, std::uint64_t seed);

/// Rescales every component so that all of its factor columns share the same
/// norm (product of norms preserved). The represented tensor is unchanged.
void balanceCpModel(CpModel& model);

/// Mode-n matricized tensor times Khatri-Rao product of the other factors.
Eigen::MatrixXd mttkrp(const DenseTensor& x, const CpModel& model, int mode);

}  // namespace bilagrid
