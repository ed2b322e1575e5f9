// Copyright 2026 The cblue Authors.
// SPDX-License-Identifier: Apache-2.0

#include "cblue/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cblue {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::string shape(Index rows, Index cols)
{
    return std::to_string(rows) + "x" + std::to_string(cols);
}

}  // namespace

void require_finite(const CMatrix& m, std::string_view what)
{
    if (m.rows() < 1 || m.cols() < 1) {
        throw Error(ErrorCode::DimensionMismatch, std::string(what) + " is empty");
    }
    if (!m.allFinite()) {
        throw Error(ErrorCode::NonFinite, std::string(what) + " has non-finite entries");
    }
}

void require_finite(const CVector& v, std::string_view what)
{
    if (v.size() < 1) {
        throw Error(ErrorCode::DimensionMismatch, std::string(what) + " is empty");
    }
    if (!v.allFinite()) {
        throw Error(ErrorCode::NonFinite, std::string(what) + " has non-finite entries");
    }
}

double hermitian_defect(const CMatrix& m)
{
    if (m.rows() != m.cols()) {
        return std::numeric_limits<double>::infinity();
    }
    const double norm = m.norm();
    if (norm == 0.0) {
        return 0.0;
    }
    return (m - m.adjoint()).norm() / norm;
}

CMatrix hermitian_part(const CMatrix& m)
{
    return 0.5 * (m + m.adjoint());
}

CMatrix gram(const CMatrix& w)
{
    return hermitian_part(w.adjoint() * w);
}

HpdFactor hpd_factor(const CMatrix& m)
{
    if (m.rows() != m.cols()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "hpd_factor needs a square matrix, got " + shape(m.rows(), m.cols()));
    }
    require_finite(m, "matrix to factor");
    if (hermitian_defect(m) > 1e-12) {
        throw Error(ErrorCode::NotHermitian, "matrix to factor is not Hermitian");
    }

    const Index n = m.rows();
    const double max_diag = m.diagonal().real().maxCoeff();
    const double pivot_floor = static_cast<double>(n) * kEps * max_diag;
    if (!(max_diag > 0.0)) {
        throw Error(ErrorCode::NotPositiveDefinite, "largest diagonal entry is not positive");
    }

    CMatrix lower = CMatrix::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        double pivot = m(j, j).real();
        for (Index k = 0; k < j; ++k) {
            pivot -= std::norm(lower(j, k));
        }
        if (!(pivot > pivot_floor)) {
            throw Error(ErrorCode::NotPositiveDefinite,
                        "pivot " + std::to_string(j) + " is " + std::to_string(pivot)
                            + " (floor " + std::to_string(pivot_floor) + ")");
        }
        const double diag = std::sqrt(pivot);
        lower(j, j) = diag;
        for (Index i = j + 1; i < n; ++i) {
            Complex s = m(i, j);
            for (Index k = 0; k < j; ++k) {
                s -= lower(i, k) * std::conj(lower(j, k));
            }
            lower(i, j) = s / diag;
        }
    }
    return HpdFactor(std::move(lower));
}

CMatrix hpd_solve(const HpdFactor& factor, const CMatrix& b)
{
    if (b.rows() != factor.dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "hpd_solve: factor is " + std::to_string(factor.dim()) + "-dimensional, rhs has "
                        + std::to_string(b.rows()) + " rows");
    }
    const auto& l = factor.lower();
    CMatrix z = l.triangularView<Eigen::Lower>().solve(b);
    return l.adjoint().triangularView<Eigen::Upper>().solve(z);
}

CMatrix whiten(const HpdFactor& factor, const CMatrix& b)
{
    if (b.rows() != factor.dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "whiten: factor is " + std::to_string(factor.dim()) + "-dimensional, rhs has "
                        + std::to_string(b.rows()) + " rows");
    }
    return factor.lower().triangularView<Eigen::Lower>().solve(b);
}

double default_rank_tolerance(Index rows, Index cols, double sigma_max)
{
    return static_cast<double>(std::max(rows, cols)) * kEps * sigma_max;
}

Index numerical_rank(const CMatrix& a, std::optional<double> rank_tol)
{
    require_finite(a, "matrix");
    Eigen::JacobiSVD<CMatrix> svd(a);
    const auto& sigma = svd.singularValues();
    const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
    const double tol = rank_tol.value_or(default_rank_tolerance(a.rows(), a.cols(), sigma_max));
    return static_cast<Index>((sigma.array() > tol).count());
}

CMatrix nullspace_basis(const CMatrix& a, std::optional<double> rank_tol)
{
    require_finite(a, "constraint matrix");
    const Index nb = a.rows();
    const Index nx = a.cols();

    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullV);
    const auto& sigma = svd.singularValues();
    const double tol = rank_tol.value_or(default_rank_tolerance(nb, nx, sigma(0)));
    const auto rank = static_cast<Index>((sigma.array() > tol).count());

    if (rank < nb) {
        throw Error(ErrorCode::RankDeficientConstraints,
                    "constraint matrix " + shape(nb, nx) + " has numerical rank "
                        + std::to_string(rank));
    }
    const Index n0 = nx - rank;
    if (n0 == 0) {
        throw Error(ErrorCode::EmptyNullspace,
                    "constraint matrix " + shape(nb, nx) + " has a trivial nullspace");
    }
    return svd.matrixV().rightCols(n0);
}

CVector least_norm_solution(const CMatrix& a, const CVector& b)
{
    require_finite(a, "constraint matrix");
    require_finite(b, "constraint vector");
    if (b.size() != a.rows()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "constraint vector has " + std::to_string(b.size()) + " entries, matrix has "
                        + std::to_string(a.rows()) + " rows");
    }
    try {
        const HpdFactor aa = hpd_factor(hermitian_part(a * a.adjoint()));
        return a.adjoint() * hpd_solve(aa, b);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::NotPositiveDefinite) {
            throw Error(ErrorCode::RankDeficientConstraints,
                        std::string("A A^H is singular: ") + e.what());
        }
        throw;
    }
}

}  // namespace cblue
