// Copyright 2026 The cblue Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "cblue/model.hpp"

namespace cblue {

enum class EstimatorKind {
    Ls,
    Blue,
    Cls,
    CblueNullspace,
    CblueDirect,
};

struct EstimatorLabel {
    EstimatorKind kind = EstimatorKind::Ls;
    bool mean_subtracted = false;

    // Outputs forced onto A x = b (cls and both constrained BLUE forms).
    bool constrained() const noexcept;
    std::string to_string() const;

    friend bool operator==(const EstimatorLabel&, const EstimatorLabel&) = default;
};

// x_hat = E y + f. Every estimator in this library has this shape.
class AffineEstimator {
public:
    AffineEstimator(CMatrix matrix, CVector offset, EstimatorLabel label);

    const CMatrix& matrix() const noexcept { return matrix_; }
    const CVector& offset() const noexcept { return offset_; }
    const EstimatorLabel& label() const noexcept { return label_; }
    Index nx() const noexcept { return matrix_.rows(); }
    Index ny() const noexcept { return matrix_.cols(); }

    CVector apply(const CVector& y) const;

private:
    CMatrix matrix_;
    CVector offset_;
    EstimatorLabel label_;
};

// Q = H^H H and P = H^H C^{-1} H.
struct PrecisionMatrices {
    CMatrix gram;
    CMatrix precision;
};

PrecisionMatrices precision_matrices(const LinearModel& model);

struct CovarianceResult {
    CMatrix matrix;
    Eigen::VectorXd variance;  // real diagonal of `matrix`

    // trace / N_x
    double average_variance() const;
};

/// Unconstrained least squares, E = Q^{-1} H^H. Needs full column rank H.
AffineEstimator ls(const LinearModel& model);

/// Unconstrained BLUE, E = P^{-1} H^H C^{-1}. Needs full column rank H.
AffineEstimator blue(const LinearModel& model);

/// Constrained least squares: the Q-metric projection of the LS estimate
/// onto A x = b. Needs full column rank H.
AffineEstimator cls(const LinearModel& model, const ConstraintSet& constraints);

/// Constrained BLUE through a nullspace parameterization,
///
///     E = N (N^H P N)^{-1} N^H H^H C^{-1},   f = (I - E H) x_p.
///
/// N^H P N is formed as (HN)^H C^{-1} (HN), so only H N needs full column
/// rank; N_y < N_x is fine. Throws RankDeficientReducedModel otherwise.
AffineEstimator cblue_nullspace(const LinearModel& model, const NullspaceParam& param);

/// Constrained BLUE without a nullspace basis,
///
///     E = (I - P^{-1} A^H (A P^{-1} A^H)^{-1} A) P^{-1} H^H C^{-1}
///     f = P^{-1} A^H (A P^{-1} A^H)^{-1} b
///
/// Needs N_y >= N_x and full column rank H (RankDeficient otherwise).
AffineEstimator cblue_direct(const LinearModel& model, const ConstraintSet& constraints);

// Direct form when validate() admits it, nullspace form otherwise.
AffineEstimator cblue(const LinearModel& model, const ConstraintSet& constraints);

// Subtracts the mean of the estimate from every element: (I - 11^T/N_x)(E y + f).
AffineEstimator mean_subtracted(const AffineEstimator& base);

// E C E^H
CovarianceResult covariance(const AffineEstimator& estimator, const CMatrix& noise_covariance);

// N (N^H P N)^{-1} N^H
CovarianceResult analytic_cblue_covariance(const LinearModel& model, const NullspaceParam& param);

// P^{-1} - P^{-1} A^H (A P^{-1} A^H)^{-1} A P^{-1}
CovarianceResult analytic_cblue_covariance(const LinearModel& model,
                                           const ConstraintSet& constraints);

/// Reference solution of min (y - Hx)^H C^{-1} (y - Hx) s.t. A x = b obtained
/// from the stationarity system [[P, A^H], [A, 0]] [x; mu] = [H^H C^{-1} y; b]
/// with a full-pivoting LU. Shares no code path with the estimators above.
CVector kkt_oracle(const LinearModel& model, const ConstraintSet& constraints, const CVector& y);

// max(||A E|| / (||A|| ||E||), ||A f - b|| / (||A|| ||f|| + ||b||))
double constraint_residual(const AffineEstimator& estimator, const ConstraintSet& constraints);

// max(||E H N - N|| / ||N||, ||f - (I - E H) x_p|| / (||x_p|| + ||f||))
double unbiasedness_residual(const AffineEstimator& estimator,
                             const LinearModel& model,
                             const NullspaceParam& param);

}  // namespace cblue
