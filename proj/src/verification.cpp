// Copyright 2026 The cblue Authors.
// SPDX-License-Identifier: Apache-2.0

#include "cblue/verification.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "cblue/montecarlo.hpp"

namespace cblue {

namespace {

constexpr double kTiny = 1e-300;

CMatrix gaussian_matrix(CounterRng& rng, Index rows, Index cols)
{
    const CVector v = sample_proper_gaussian(rows * cols, rng);
    return v.reshaped(rows, cols);
}

Index uniform_index(CounterRng& rng, Index lo, Index hi)
{
    return lo + static_cast<Index>(rng() % static_cast<std::uint32_t>(hi - lo + 1));
}

double relative(const CMatrix& value, const CMatrix& reference)
{
    return (value - reference).norm() / std::max(reference.norm(), kTiny);
}

class Tracker {
public:
    Tracker(std::string name, double threshold) : result_{std::move(name), 0.0, threshold, 0} {}

    void record(double residual)
    {
        if (std::isnan(residual)) {
            residual = std::numeric_limits<double>::infinity();
        }
        result_.worst = std::max(result_.worst, residual);
        ++result_.checked;
    }
    const PropertyResult& result() const { return result_; }

private:
    PropertyResult result_;
};

AffineEstimator direct_form(const LinearModel& model,
                            const ConstraintSet& constraints,
                            const VerifyOptions& options)
{
    AffineEstimator est = cblue_direct(model, constraints);
    if (!options.perturb_direct_form) {
        return est;
    }
    return {est.matrix(), -est.offset(), est.label()};
}

// Euclidean projection of an unbiased estimator onto A x = b; unbiased on the
// feasible set but in general not of minimum variance.
AffineEstimator euclidean_projection(const AffineEstimator& base, const ConstraintSet& constraints)
{
    const CMatrix& a = constraints.matrix();
    const HpdFactor aa = hpd_factor(hermitian_part(a * a.adjoint()));
    const CMatrix back = a.adjoint() * hpd_solve(aa, CMatrix::Identity(a.rows(), a.rows()));
    CMatrix e = base.matrix() - back * (a * base.matrix());
    CVector f = base.offset() - back * (a * base.offset() - constraints.rhs());
    return {std::move(e), std::move(f), base.label()};
}

// Random member of the class of constrained estimators that are unbiased on
// the feasible set: E' = E + N R (I - HN (HN)^+), f' = (I - E' H) x_p.
AffineEstimator feasible_perturbation(const AffineEstimator& best,
                                      const LinearModel& model,
                                      const NullspaceParam& param,
                                      CounterRng& rng)
{
    const CMatrix hn = model.measurement() * param.basis();
    const HpdFactor g = hpd_factor(gram(hn));
    const CMatrix identity = CMatrix::Identity(model.ny(), model.ny());
    const CMatrix complement = identity - hn * hpd_solve(g, hn.adjoint());
    const CMatrix r = gaussian_matrix(rng, param.n0(), model.ny());
    const double scale = best.matrix().norm() / std::max(r.norm(), kTiny);
    CMatrix e = best.matrix() + scale * param.basis() * r * complement;
    CVector f = param.particular() - e * (model.measurement() * param.particular());
    return {std::move(e), std::move(f), best.label()};
}

}  // namespace

ProblemInstance random_instance(CounterRng& rng, Index ny, Index nx, Index nb)
{
    const CMatrix h = gaussian_matrix(rng, ny, nx);
    const CMatrix root = gaussian_matrix(rng, ny, ny);
    CMatrix noise = root * root.adjoint() / static_cast<double>(ny)
                    + 0.5 * CMatrix::Identity(ny, ny);
    noise = hermitian_part(noise);
    const CMatrix a = gaussian_matrix(rng, nb, nx);
    const CVector b = sample_proper_gaussian(nb, rng);
    return {LinearModel(h, noise), ConstraintSet(a, b)};
}

CMatrix random_unitary(CounterRng& rng, Index n)
{
    const CMatrix g = gaussian_matrix(rng, n, n);
    Eigen::HouseholderQR<CMatrix> qr(g);
    return qr.householderQ() * CMatrix::Identity(n, n);
}

std::vector<PropertyResult> run_verification(const VerifyOptions& options)
{
    Tracker constraint("constraint_satisfaction", 1e-9);
    Tracker unbiased("unbiasedness_on_feasible_set", 1e-9);
    Tracker oracle_direct("kkt_oracle_direct_form", 1e-8);
    Tracker oracle_nullspace("kkt_oracle_nullspace_form", 1e-8);
    Tracker form_equivalence("direct_equals_nullspace_form", 1e-8);
    Tracker covariance_identity("covariance_identity", 1e-9);
    Tracker projector_identity("projector_identity", 1e-9);
    Tracker particular_invariance("particular_solution_invariance", 1e-9);
    Tracker basis_invariance("nullspace_basis_invariance", 1e-9);
    Tracker white_noise("white_noise_reduces_to_cls", 1e-10);
    Tracker optimality("variance_optimality", 1e-10);
    Tracker underdetermined("underdetermined_refusal", 0.0);

    for (std::size_t i = 0; i < options.instances; ++i) {
        CounterRng rng(options.seed, 0x5EEDu, static_cast<std::uint32_t>(i));
        const bool wide = i % 4 == 3;
        const Index nx = uniform_index(rng, 2, 12);
        const Index nb = uniform_index(rng, 1, nx - 1);
        const Index n0 = nx - nb;
        const Index ny = wide ? uniform_index(rng, n0, nx - 1) : uniform_index(rng, nx, 2 * nx);

        const ProblemInstance inst = random_instance(rng, ny, nx, nb);
        const LinearModel& model = inst.model;
        const ConstraintSet& cons = inst.constraints;
        const NullspaceParam param = parameterize(cons);
        const CVector y = sample_proper_gaussian(ny, rng);

        const AffineEstimator nullspace = cblue_nullspace(model, param);
        const CVector x_null = nullspace.apply(y);
        const CVector x_oracle = kkt_oracle(model, cons, y);

        constraint.record(constraint_residual(nullspace, cons));
        unbiased.record(unbiasedness_residual(nullspace, model, param));
        oracle_nullspace.record(relative(x_null, x_oracle));

        // T = I - N (N^H P N)^{-1} N^H P must equal T A^H (A A^H)^{-1} A.
        {
            const CMatrix hn = model.measurement() * param.basis();
            const CMatrix whitened_hn = whiten(model.noise_factor(), hn);
            const HpdFactor reduced = hpd_factor(gram(whitened_hn));
            const CMatrix np = hpd_solve(model.noise_factor(), hn).adjoint() * model.measurement();
            const CMatrix t = CMatrix::Identity(nx, nx)
                              - param.basis() * hpd_solve(reduced, np);
            const CMatrix& a = cons.matrix();
            const HpdFactor aa = hpd_factor(hermitian_part(a * a.adjoint()));
            const CMatrix rowspace_projector = a.adjoint() * hpd_solve(aa, a);
            projector_identity.record((t - t * rowspace_projector).norm()
                                      / std::max(t.norm(), kTiny));
        }

        {
            const CVector offset = 3.0 * (param.basis() * sample_proper_gaussian(n0, rng));
            const NullspaceParam shifted = param.with_particular(param.particular() + offset);
            particular_invariance.record(relative(cblue_nullspace(model, shifted).apply(y), x_null));

            const NullspaceParam rotated = param.with_basis(param.basis() * random_unitary(rng, n0));
            basis_invariance.record(relative(cblue_nullspace(model, rotated).apply(y), x_null));
        }

        if (wide) {
            auto refuses = [&](const std::function<void()>& build) {
                try {
                    build();
                } catch (const Error& e) {
                    return e.code() == ErrorCode::RankDeficient;
                }
                return false;
            };
            const bool direct_refused = refuses([&] { (void)cblue_direct(model, cons); });
            const bool cls_refused = refuses([&] { (void)cls(model, cons); });
            underdetermined.record(direct_refused && cls_refused ? 0.0 : 1.0);
            continue;
        }

        const AffineEstimator direct = direct_form(model, cons, options);
        const CVector x_direct = direct.apply(y);
        constraint.record(constraint_residual(direct, cons));
        unbiased.record(unbiasedness_residual(direct, model, param));
        oracle_direct.record(relative(x_direct, x_oracle));
        form_equivalence.record(relative(x_direct, x_null));

        const AffineEstimator constrained_ls = cls(model, cons);
        constraint.record(constraint_residual(constrained_ls, cons));

        const CovarianceResult via_basis = analytic_cblue_covariance(model, param);
        const CovarianceResult via_constraints = analytic_cblue_covariance(model, cons);
        covariance_identity.record(relative(via_basis.matrix, via_constraints.matrix));

        {
            const double sigma2 = std::pow(10.0, static_cast<double>(uniform_index(rng, -1, 1)));
            const LinearModel white(model.measurement(), sigma2 * CMatrix::Identity(ny, ny));
            const CVector lhs = direct_form(white, cons, options).apply(y);
            white_noise.record(relative(lhs, cls(white, cons).apply(y)));
        }

        {
            const CMatrix& c = model.noise_covariance();
            const Eigen::VectorXd best = covariance(direct, c).variance;
            std::vector<AffineEstimator> competitors{
                constrained_ls,
                euclidean_projection(blue(model), cons),
                euclidean_projection(ls(model), cons),
                feasible_perturbation(nullspace, model, param, rng),
            };
            if (cons.rhs().isZero(0.0) && cons.matrix().isOnes(0.0)) {
                competitors.push_back(mean_subtracted(blue(model)));
            }
            for (const auto& other : competitors) {
                const Eigen::VectorXd var = covariance(other, c).variance;
                const double excess = (best - var).maxCoeff() / std::max(var.maxCoeff(), kTiny);
                optimality.record(std::max(excess, 0.0));
            }
        }
    }

    return {constraint.result(),        unbiased.result(),
            oracle_direct.result(),     oracle_nullspace.result(),
            form_equivalence.result(),  covariance_identity.result(),
            projector_identity.result(), particular_invariance.result(),
            basis_invariance.result(),  white_noise.result(),
            optimality.result(),        underdetermined.result()};
}

}  // namespace cblue
