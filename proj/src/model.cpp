// Copyright 2026 The cblue Authors.
// SPDX-License-Identifier: Apache-2.0

#include "cblue/model.hpp"

#include <algorithm>
#include <string>

namespace cblue {

namespace {

constexpr double kMembershipTol = 1e-10;
constexpr double kOrthonormalTol = 1e-11;

HpdFactor factor_noise(const CMatrix& measurement, const CMatrix& noise_covariance)
{
    require_finite(measurement, "measurement matrix");
    require_finite(noise_covariance, "noise covariance");
    if (noise_covariance.rows() != noise_covariance.cols()
        || noise_covariance.rows() != measurement.rows()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "noise covariance must be " + std::to_string(measurement.rows()) + "x"
                        + std::to_string(measurement.rows()));
    }
    return hpd_factor(noise_covariance);
}

void check_particular(const ConstraintSet& c, const CVector& particular)
{
    require_finite(particular, "particular solution");
    if (particular.size() != c.nx()) {
        throw Error(ErrorCode::DimensionMismatch, "particular solution has wrong length");
    }
    const double residual = (c.matrix() * particular - c.rhs()).norm();
    const double scale = c.matrix().norm() * particular.norm() + c.rhs().norm();
    if (residual > kMembershipTol * std::max(scale, 1e-300)) {
        throw Error(ErrorCode::InvalidArgument, "particular solution violates A x = b");
    }
}

void check_basis(const ConstraintSet& c, const CMatrix& basis)
{
    require_finite(basis, "nullspace basis");
    if (basis.rows() != c.nx() || basis.cols() != c.nx() - c.nb()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "nullspace basis must be " + std::to_string(c.nx()) + "x"
                        + std::to_string(c.nx() - c.nb()));
    }
    if ((c.matrix() * basis).norm() > kMembershipTol * c.matrix().norm()) {
        throw Error(ErrorCode::InvalidArgument, "basis is not in the nullspace of A");
    }
    const CMatrix identity = CMatrix::Identity(basis.cols(), basis.cols());
    if ((basis.adjoint() * basis - identity).norm() > kOrthonormalTol) {
        throw Error(ErrorCode::InvalidArgument, "basis columns are not orthonormal");
    }
}

}  // namespace

LinearModel::LinearModel(CMatrix measurement, CMatrix noise_covariance)
    : measurement_(std::move(measurement)),
      noise_covariance_(std::move(noise_covariance)),
      noise_factor_(factor_noise(measurement_, noise_covariance_))
{
}

ConstraintSet::ConstraintSet(CMatrix matrix, CVector rhs)
    : matrix_(std::move(matrix)), rhs_(std::move(rhs))
{
    require_finite(matrix_, "constraint matrix");
    require_finite(rhs_, "constraint vector");
    if (rhs_.size() != matrix_.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "constraint vector length must equal rows of A");
    }
    if (matrix_.rows() >= matrix_.cols()) {
        throw Error(ErrorCode::InvalidArgument,
                    "need fewer constraints than unknowns (N_b < N_x), got "
                        + std::to_string(matrix_.rows()) + " >= " + std::to_string(matrix_.cols()));
    }
    if (numerical_rank(matrix_) < matrix_.rows()) {
        throw Error(ErrorCode::RankDeficientConstraints, "constraint matrix is not full row rank");
    }
}

NullspaceParam::NullspaceParam(ConstraintSet constraints, CMatrix basis, CVector particular)
    : constraints_(std::move(constraints)),
      basis_(std::move(basis)),
      particular_(std::move(particular))
{
    check_basis(constraints_, basis_);
    check_particular(constraints_, particular_);
}

CVector NullspaceParam::coordinates(const CVector& x) const
{
    if (x.size() != nx()) {
        throw Error(ErrorCode::DimensionMismatch, "point has wrong length");
    }
    return basis_.adjoint() * (x - particular_);
}

CVector NullspaceParam::point(const CVector& alpha) const
{
    if (alpha.size() != n0()) {
        throw Error(ErrorCode::DimensionMismatch, "coordinate vector has wrong length");
    }
    return particular_ + basis_ * alpha;
}

NullspaceParam NullspaceParam::with_particular(CVector particular) const
{
    return NullspaceParam(constraints_, basis_, std::move(particular));
}

NullspaceParam NullspaceParam::with_basis(CMatrix basis) const
{
    return NullspaceParam(constraints_, std::move(basis), particular_);
}

NullspaceParam parameterize(const ConstraintSet& constraints)
{
    CMatrix basis = nullspace_basis(constraints.matrix());
    CVector particular = least_norm_solution(constraints.matrix(), constraints.rhs());
    return NullspaceParam(constraints, std::move(basis), std::move(particular));
}

CompatibilityReport validate(const LinearModel& model, const ConstraintSet& constraints)
{
    if (constraints.nx() != model.nx()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "A has " + std::to_string(constraints.nx()) + " columns, H has "
                        + std::to_string(model.nx()));
    }
    CompatibilityReport report;
    const CMatrix& h = model.measurement();

    report.h_rank = numerical_rank(h);
    if (model.ny() < model.nx()) {
        report.diagnostics.push_back("direct form: N_y = " + std::to_string(model.ny())
                                     + " < N_x = " + std::to_string(model.nx()));
    } else if (report.h_rank < model.nx()) {
        report.diagnostics.push_back("direct form: H has rank " + std::to_string(report.h_rank)
                                     + " < N_x = " + std::to_string(model.nx()));
    } else {
        report.direct_form = true;
    }

    const CMatrix basis = nullspace_basis(constraints.matrix());
    report.hn_rank = numerical_rank(h * basis);
    if (report.hn_rank < basis.cols()) {
        report.diagnostics.push_back("nullspace form: H N has rank " + std::to_string(report.hn_rank)
                                     + " < N_0 = " + std::to_string(basis.cols()));
    } else {
        report.nullspace_form = true;
    }
    return report;
}

}  // namespace cblue
