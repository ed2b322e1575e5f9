// Copyright 2026 The cblue Authors.
// SPDX-License-Identifier: Apache-2.0

#include "cblue/estimators.hpp"

#include <algorithm>
#include <string>

namespace cblue {

namespace {

constexpr double kTiny = 1e-300;

void require_overdetermined(const LinearModel& model, std::string_view who)
{
    if (model.ny() < model.nx()) {
        throw Error(ErrorCode::RankDeficient,
                    std::string(who) + " needs N_y >= N_x for a full column rank H, got N_y = "
                        + std::to_string(model.ny()) + ", N_x = " + std::to_string(model.nx()));
    }
}

void require_matching(const LinearModel& model, const ConstraintSet& constraints)
{
    if (constraints.nx() != model.nx()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "A has " + std::to_string(constraints.nx()) + " columns, H has "
                        + std::to_string(model.nx()));
    }
}

// Factors a Gram-type matrix, reporting failure under the caller's error code.
HpdFactor factor_or(const CMatrix& m, ErrorCode code, std::string_view what)
{
    try {
        return hpd_factor(m);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::NotPositiveDefinite) {
            throw Error(code, std::string(what) + " is singular (" + e.what() + ")");
        }
        throw;
    }
}

// Whitened quantities shared by the BLUE-type estimators.
struct Whitened {
    CMatrix precision;   // P = H^H C^{-1} H
    CMatrix cinv_h;      // C^{-1} H
};

Whitened whitened(const LinearModel& model)
{
    const HpdFactor& noise = model.noise_factor();
    const CMatrix w = whiten(noise, model.measurement());
    return {gram(w), hpd_solve(noise, model.measurement())};
}

// M-metric projection of the unconstrained estimator E0 onto A x = b:
//   E = E0 - G S^{-1} A E0,  f = G S^{-1} b,  G = M^{-1} A^H,  S = A G.
std::pair<CMatrix, CVector> project_onto_constraints(const HpdFactor& weight,
                                                     const CMatrix& unconstrained,
                                                     const ConstraintSet& constraints)
{
    const CMatrix& a = constraints.matrix();
    const CMatrix g = hpd_solve(weight, a.adjoint());
    const HpdFactor s = factor_or(hermitian_part(a * g), ErrorCode::RankDeficient,
                                  "A M^{-1} A^H");
    CMatrix e = unconstrained - g * hpd_solve(s, a * unconstrained);
    CVector f = g * hpd_solve(s, constraints.rhs());
    return {std::move(e), std::move(f)};
}

}  // namespace

bool EstimatorLabel::constrained() const noexcept
{
    return kind == EstimatorKind::Cls || kind == EstimatorKind::CblueNullspace
           || kind == EstimatorKind::CblueDirect;
}

std::string EstimatorLabel::to_string() const
{
    std::string name;
    switch (kind) {
    case EstimatorKind::Ls: name = "ls"; break;
    case EstimatorKind::Blue: name = "blue"; break;
    case EstimatorKind::Cls: name = "cls"; break;
    case EstimatorKind::CblueNullspace: name = "cblue_nullspace"; break;
    case EstimatorKind::CblueDirect: name = "cblue_direct"; break;
    }
    return mean_subtracted ? name + "_meansub" : name;
}

AffineEstimator::AffineEstimator(CMatrix matrix, CVector offset, EstimatorLabel label)
    : matrix_(std::move(matrix)), offset_(std::move(offset)), label_(label)
{
    if (offset_.size() != matrix_.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "offset length must equal rows of E");
    }
}

CVector AffineEstimator::apply(const CVector& y) const
{
    if (y.size() != matrix_.cols()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "measurement has " + std::to_string(y.size()) + " entries, estimator expects "
                        + std::to_string(matrix_.cols()));
    }
    return matrix_ * y + offset_;
}

double CovarianceResult::average_variance() const
{
    return variance.sum() / static_cast<double>(variance.size());
}

PrecisionMatrices precision_matrices(const LinearModel& model)
{
    return {gram(model.measurement()), whitened(model).precision};
}

AffineEstimator ls(const LinearModel& model)
{
    require_overdetermined(model, "ls");
    const CMatrix& h = model.measurement();
    const HpdFactor q = factor_or(gram(h), ErrorCode::RankDeficient, "Q = H^H H");
    return {hpd_solve(q, h.adjoint()), CVector::Zero(model.nx()), {EstimatorKind::Ls}};
}

AffineEstimator blue(const LinearModel& model)
{
    require_overdetermined(model, "blue");
    const Whitened wm = whitened(model);
    const HpdFactor p = factor_or(wm.precision, ErrorCode::RankDeficient, "P = H^H C^-1 H");
    return {hpd_solve(p, wm.cinv_h.adjoint()), CVector::Zero(model.nx()), {EstimatorKind::Blue}};
}

AffineEstimator cls(const LinearModel& model, const ConstraintSet& constraints)
{
    require_matching(model, constraints);
    require_overdetermined(model, "cls");
    const CMatrix& h = model.measurement();
    const HpdFactor q = factor_or(gram(h), ErrorCode::RankDeficient, "Q = H^H H");
    auto [e, f] = project_onto_constraints(q, hpd_solve(q, h.adjoint()), constraints);
    return {std::move(e), std::move(f), {EstimatorKind::Cls}};
}

AffineEstimator cblue_direct(const LinearModel& model, const ConstraintSet& constraints)
{
    require_matching(model, constraints);
    require_overdetermined(model, "cblue_direct");
    const Whitened wm = whitened(model);
    const HpdFactor p = factor_or(wm.precision, ErrorCode::RankDeficient, "P = H^H C^-1 H");
    auto [e, f] = project_onto_constraints(p, hpd_solve(p, wm.cinv_h.adjoint()), constraints);
    return {std::move(e), std::move(f), {EstimatorKind::CblueDirect}};
}

AffineEstimator cblue_nullspace(const LinearModel& model, const NullspaceParam& param)
{
    require_matching(model, param.constraints());
    const CMatrix& basis = param.basis();
    if (model.ny() < param.n0()) {
        throw Error(ErrorCode::RankDeficientReducedModel,
                    "H N cannot have full column rank with N_y = " + std::to_string(model.ny())
                        + " < N_0 = " + std::to_string(param.n0()));
    }
    const HpdFactor& noise = model.noise_factor();
    const CMatrix hn = model.measurement() * basis;
    const HpdFactor reduced = factor_or(gram(whiten(noise, hn)),
                                        ErrorCode::RankDeficientReducedModel, "N^H P N");
    // (HN)^H C^{-1} = (C^{-1} HN)^H
    CMatrix e = basis * hpd_solve(reduced, hpd_solve(noise, hn).adjoint());
    CVector f = param.particular() - e * (model.measurement() * param.particular());
    return {std::move(e), std::move(f), {EstimatorKind::CblueNullspace}};
}

AffineEstimator cblue(const LinearModel& model, const ConstraintSet& constraints)
{
    const CompatibilityReport report = validate(model, constraints);
    if (report.direct_form) {
        return cblue_direct(model, constraints);
    }
    if (report.nullspace_form) {
        return cblue_nullspace(model, parameterize(constraints));
    }
    std::string why;
    for (const auto& d : report.diagnostics) {
        why += (why.empty() ? "" : "; ") + d;
    }
    throw Error(ErrorCode::RankDeficientReducedModel, "no constrained BLUE form applies: " + why);
}

AffineEstimator mean_subtracted(const AffineEstimator& base)
{
    const CMatrix& e = base.matrix();
    const CVector& f = base.offset();
    const auto n = static_cast<double>(base.nx());
    CMatrix centered_e = e.rowwise() - e.colwise().sum() / n;
    CVector centered_f = f.array() - f.sum() / n;
    EstimatorLabel label = base.label();
    label.mean_subtracted = true;
    return {std::move(centered_e), std::move(centered_f), label};
}

CovarianceResult covariance(const AffineEstimator& estimator, const CMatrix& noise_covariance)
{
    if (noise_covariance.rows() != estimator.ny() || noise_covariance.cols() != estimator.ny()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "noise covariance must be " + std::to_string(estimator.ny()) + "x"
                        + std::to_string(estimator.ny()));
    }
    const CMatrix& e = estimator.matrix();
    CMatrix c = hermitian_part(e * noise_covariance * e.adjoint());
    Eigen::VectorXd variance = c.diagonal().real();
    return {std::move(c), std::move(variance)};
}

CovarianceResult analytic_cblue_covariance(const LinearModel& model, const NullspaceParam& param)
{
    require_matching(model, param.constraints());
    if (model.ny() < param.n0()) {
        throw Error(ErrorCode::RankDeficientReducedModel, "N_y < N_0");
    }
    const CMatrix& basis = param.basis();
    const CMatrix whitened_hn = whiten(model.noise_factor(), model.measurement() * basis);
    const HpdFactor reduced = factor_or(gram(whitened_hn), ErrorCode::RankDeficientReducedModel,
                                        "N^H P N");
    CMatrix c = hermitian_part(basis * hpd_solve(reduced, basis.adjoint()));
    Eigen::VectorXd variance = c.diagonal().real();
    return {std::move(c), std::move(variance)};
}

CovarianceResult analytic_cblue_covariance(const LinearModel& model,
                                           const ConstraintSet& constraints)
{
    require_matching(model, constraints);
    require_overdetermined(model, "analytic_cblue_covariance");
    const HpdFactor p = factor_or(whitened(model).precision, ErrorCode::RankDeficient,
                                  "P = H^H C^-1 H");
    const CMatrix& a = constraints.matrix();
    const CMatrix p_inv = hpd_solve(p, CMatrix::Identity(model.nx(), model.nx()));
    const CMatrix g = p_inv * a.adjoint();
    const HpdFactor s = factor_or(hermitian_part(a * g), ErrorCode::RankDeficient,
                                  "A P^-1 A^H");
    CMatrix c = hermitian_part(p_inv - g * hpd_solve(s, g.adjoint()));
    Eigen::VectorXd variance = c.diagonal().real();
    return {std::move(c), std::move(variance)};
}

CVector kkt_oracle(const LinearModel& model, const ConstraintSet& constraints, const CVector& y)
{
    require_matching(model, constraints);
    if (y.size() != model.ny()) {
        throw Error(ErrorCode::DimensionMismatch, "measurement vector has wrong length");
    }
    const CMatrix& h = model.measurement();
    const CMatrix& a = constraints.matrix();
    const Index nx = model.nx();
    const Index nb = constraints.nb();

    const Eigen::FullPivLU<CMatrix> noise_lu(model.noise_covariance());
    const CMatrix cinv_h = noise_lu.solve(h);

    CMatrix kkt = CMatrix::Zero(nx + nb, nx + nb);
    kkt.topLeftCorner(nx, nx) = h.adjoint() * cinv_h;
    kkt.topRightCorner(nx, nb) = a.adjoint();
    kkt.bottomLeftCorner(nb, nx) = a;

    CVector rhs(nx + nb);
    rhs.head(nx) = cinv_h.adjoint() * y;
    rhs.tail(nb) = constraints.rhs();

    const Eigen::FullPivLU<CMatrix> lu(kkt);
    if (!lu.isInvertible()) {
        throw Error(ErrorCode::SingularKktSystem,
                    "augmented system has rank " + std::to_string(lu.rank()) + " < "
                        + std::to_string(nx + nb));
    }
    return lu.solve(rhs).head(nx);
}

double constraint_residual(const AffineEstimator& estimator, const ConstraintSet& constraints)
{
    const CMatrix& a = constraints.matrix();
    const double a_norm = a.norm();
    const double matrix_part = (a * estimator.matrix()).norm()
                               / std::max(a_norm * estimator.matrix().norm(), kTiny);
    const double offset_part = (a * estimator.offset() - constraints.rhs()).norm()
                               / std::max(a_norm * estimator.offset().norm()
                                              + constraints.rhs().norm(),
                                          kTiny);
    return std::max(matrix_part, offset_part);
}

double unbiasedness_residual(const AffineEstimator& estimator,
                             const LinearModel& model,
                             const NullspaceParam& param)
{
    const CMatrix& basis = param.basis();
    const CMatrix eh = estimator.matrix() * model.measurement();
    const double span_part = (eh * basis - basis).norm() / basis.norm();
    const CVector& xp = param.particular();
    const CVector expected = xp - eh * xp;
    const double scale = xp.norm() * (1.0 + eh.norm()) + estimator.offset().norm();
    const double offset_part = scale > 0.0 ? (estimator.offset() - expected).norm() / scale : 0.0;
    return std::max(span_part, offset_part);
}

}  // namespace cblue
