// Copyright 2026 The cblue Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "cblue/numerics.hpp"

namespace cblue {

// y = H x + n with zero-mean noise of known Hermitian positive definite
// covariance. The noise covariance is factored once at construction.
class LinearModel {
public:
    LinearModel(CMatrix measurement, CMatrix noise_covariance);

    const CMatrix& measurement() const noexcept { return measurement_; }
    const CMatrix& noise_covariance() const noexcept { return noise_covariance_; }
    const HpdFactor& noise_factor() const noexcept { return noise_factor_; }

    Index ny() const noexcept { return measurement_.rows(); }
    Index nx() const noexcept { return measurement_.cols(); }

private:
    CMatrix measurement_;
    CMatrix noise_covariance_;
    HpdFactor noise_factor_;
};

// A x = b with A full row rank and 1 <= rows(A) < cols(A).
class ConstraintSet {
public:
    ConstraintSet(CMatrix matrix, CVector rhs);

    const CMatrix& matrix() const noexcept { return matrix_; }
    const CVector& rhs() const noexcept { return rhs_; }

    Index nb() const noexcept { return matrix_.rows(); }
    Index nx() const noexcept { return matrix_.cols(); }

private:
    CMatrix matrix_;
    CVector rhs_;
};

// The feasible set {x : A x = b} written as particular + basis * alpha.
class NullspaceParam {
public:
    // Validates A * basis = 0, basis^H basis = I and A * particular = b.
    NullspaceParam(ConstraintSet constraints, CMatrix basis, CVector particular);

    const ConstraintSet& constraints() const noexcept { return constraints_; }
    const CMatrix& basis() const noexcept { return basis_; }
    const CVector& particular() const noexcept { return particular_; }
    Index n0() const noexcept { return basis_.cols(); }
    Index nx() const noexcept { return basis_.rows(); }

    // alpha = N^H (x - x_p)
    CVector coordinates(const CVector& x) const;
    // x_p + N alpha
    CVector point(const CVector& alpha) const;

    // Same feasible set described with another particular solution or basis.
    NullspaceParam with_particular(CVector particular) const;
    NullspaceParam with_basis(CMatrix basis) const;

private:
    ConstraintSet constraints_;
    CMatrix basis_;
    CVector particular_;
};

// Orthonormal nullspace basis plus the least-norm particular solution.
NullspaceParam parameterize(const ConstraintSet& constraints);

struct CompatibilityReport {
    bool direct_form = false;     // N_y >= N_x and H full column rank
    bool nullspace_form = false;  // H N full column rank
    Index h_rank = 0;
    Index hn_rank = 0;
    std::vector<std::string> diagnostics;
};

CompatibilityReport validate(const LinearModel& model, const ConstraintSet& constraints);

}  // namespace cblue
