// Copyright 2026 The cblue Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "cblue/estimators.hpp"
#include "cblue/rng.hpp"

namespace cblue {

// Full linear-convolution matrix: (len(u) + n_x - 1) x n_x, H[i, j] = u[i - j].
CMatrix convolution_matrix(const CVector& u, Index n_x);

// i.i.d. circularly-symmetric complex Gaussian entries, E|z|^2 = 1, E[z^2] = 0.
CVector sample_proper_gaussian(Index dim, CounterRng& rng);

// L z for the factor L of the noise covariance.
CVector sample_noise(const HpdFactor& factor, CounterRng& rng);

// How the feasible true parameter is drawn in each trial.
enum class TrueXPolicy {
    NullspaceUnitNorm,  // x_p + N alpha / ||N alpha||, alpha proper Gaussian
    Particular,         // x = x_p
};

std::string_view to_string(TrueXPolicy policy);
std::optional<TrueXPolicy> parse_true_x_policy(std::string_view name);

std::vector<double> log_spaced(double lo, double hi, std::size_t count);

// System identification sweep: x is an impulse response of length n_x with
// zero sum, observed through the convolution with a random proper Gaussian
// input of length n_u in noise with covariance k * diag(base_noise_diag).
struct ExperimentSpec {
    Index n_x = 5;
    Index n_u = 6;
    std::vector<double> base_noise_diag{1.0, 1.0, 0.5, 0.5, 0.1, 0.1, 0.01, 0.01, 1e-3, 1e-3};
    std::vector<double> k_grid = log_spaced(0.1, 1.0, 10);
    std::size_t trials = 10000;
    std::uint64_t seed = 1;
    TrueXPolicy true_x_policy = TrueXPolicy::NullspaceUnitNorm;

    // Throws InvalidArgument on an inconsistent spec.
    void validate() const;
};

// Column order of the sweep tables.
enum class SweepEstimator { Ls, LsMeanSub, Cls, Blue, BlueMeanSub, Cblue };
inline constexpr std::size_t kSweepEstimatorCount = 6;
inline constexpr std::array<SweepEstimator, kSweepEstimatorCount> kSweepEstimators{
    SweepEstimator::Ls,   SweepEstimator::LsMeanSub,   SweepEstimator::Cls,
    SweepEstimator::Blue, SweepEstimator::BlueMeanSub, SweepEstimator::Cblue,
};
std::string_view to_string(SweepEstimator estimator);

using SweepEstimators = std::array<AffineEstimator, kSweepEstimatorCount>;

// The six compared estimators for one realisation of H (in kSweepEstimators order).
SweepEstimators sweep_estimators(const LinearModel& model, const ConstraintSet& constraints);

// tr(E C E^H) / N_x for each estimator.
std::array<double, kSweepEstimatorCount> analytic_mse(const SweepEstimators& estimators,
                                                      const CMatrix& noise_covariance);

struct EstimatorStats {
    double empirical_mse = 0.0;     // mean over trials of ||x_hat - x||^2 / N_x
    double empirical_stderr = 0.0;  // standard error of that mean
    double analytic_mse = 0.0;      // mean over trials of tr(cov) / N_x
    std::vector<Complex> bias;          // per element mean of x_hat - x
    std::vector<double> error_variance;  // per element E|x_hat - x - bias|^2
};

struct SweepPoint {
    double k = 0.0;
    std::array<EstimatorStats, kSweepEstimatorCount> estimators;
    // Covariance between the per-trial squared errors of two estimators.
    Eigen::Matrix<double, kSweepEstimatorCount, kSweepEstimatorCount> error_covariance;
    // Worst relative ||A x_hat - b|| over all constrained per-trial estimates.
    double max_constraint_residual = 0.0;
    std::size_t regenerations = 0;

    const EstimatorStats& operator[](SweepEstimator e) const
    {
        return estimators[static_cast<std::size_t>(e)];
    }
};

struct MseReport {
    ExperimentSpec spec;
    std::vector<SweepPoint> points;

    // Standard error of mean(err_a - err_b) at a sweep point, from paired trials.
    double difference_sigma(std::size_t point, SweepEstimator a, SweepEstimator b) const;
    std::size_t regenerations() const;
};

/// Runs the sweep. Trials are split into fixed-size blocks that are merged in
/// block order, so the report is identical for any thread count.
/// threads = 0 uses the hardware concurrency.
MseReport run_experiment(const ExperimentSpec& spec, unsigned threads = 0);

}  // namespace cblue
