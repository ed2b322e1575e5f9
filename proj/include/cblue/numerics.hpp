// Copyright 2026 The cblue Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <optional>
#include <string_view>

#include <Eigen/Dense>

#include "cblue/error.hpp"

namespace cblue {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Index = Eigen::Index;

// Throws NonFinite if any entry is NaN or Inf, DimensionMismatch if empty.
void require_finite(const CMatrix& m, std::string_view what);
void require_finite(const CVector& v, std::string_view what);

// Relative Hermitian defect ||M - M^H||_F / ||M||_F (0 for the zero matrix).
double hermitian_defect(const CMatrix& m);

// (M + M^H) / 2
CMatrix hermitian_part(const CMatrix& m);

// W^H W with exact Hermitian symmetry.
CMatrix gram(const CMatrix& w);

// Cholesky factor M = L L^H of a Hermitian positive definite matrix.
class HpdFactor {
public:
    const CMatrix& lower() const noexcept { return lower_; }
    Index dim() const noexcept { return lower_.rows(); }

private:
    explicit HpdFactor(CMatrix lower) : lower_(std::move(lower)) {}
    friend HpdFactor hpd_factor(const CMatrix& m);

    CMatrix lower_;
};

/// Factors a Hermitian positive definite matrix.
///
/// Fails with NotHermitian when ||M - M^H||_F > 1e-12 ||M||_F and with
/// NotPositiveDefinite when a pivot drops to dim * eps * max(diag(M)) or below.
/// Only the lower triangle is read once the Hermitian check has passed.
HpdFactor hpd_factor(const CMatrix& m);

// Solves (L L^H) X = B.
CMatrix hpd_solve(const HpdFactor& factor, const CMatrix& b);

// L^{-1} B, i.e. the whitening transform for covariance L L^H.
CMatrix whiten(const HpdFactor& factor, const CMatrix& b);

// Default rank threshold max(rows, cols) * eps * sigma_max.
double default_rank_tolerance(Index rows, Index cols, double sigma_max);

// Number of singular values above rank_tol (default_rank_tolerance if unset).
Index numerical_rank(const CMatrix& a, std::optional<double> rank_tol = std::nullopt);

/// Orthonormal basis of the nullspace of a full-row-rank wide matrix.
///
/// Uses the trailing right singular vectors of A. The basis is unique only up
/// to a unitary change of coordinates; callers may rely on A N = 0 and
/// N^H N = I, nothing more.
CMatrix nullspace_basis(const CMatrix& a, std::optional<double> rank_tol = std::nullopt);

// Minimum 2-norm solution A^H (A A^H)^{-1} b of an underdetermined system.
CVector least_norm_solution(const CMatrix& a, const CVector& b);

}  // namespace cblue
