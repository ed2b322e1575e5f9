// Copyright 2026 The cblue Authors.
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Random instances come from <random>, independent of the
// library's own counter-based generator.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "cblue/estimators.hpp"
#include "cblue/montecarlo.hpp"
#include "test_support.hpp"

using namespace cblue;
using namespace cblue::testing;

namespace {

struct Instance {
    LinearModel model;
    ConstraintSet cons;
};

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Keeps the worst ratio residual / tolerance seen so far.
class Worst {
public:
    explicit Worst(double tol) : tol_(tol) {}
    void add(double residual)
    {
        if (!(residual <= worst_)) {
            worst_ = std::isnan(residual) ? std::numeric_limits<double>::infinity() : residual;
        }
        ++count_;
    }
    bool ok() const { return count_ > 0 && worst_ <= tol_; }
    std::string str(const char* what) const
    {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s worst=%.3e tol=%.0e n=%zu", what, worst_, tol_, count_);
        return buf;
    }

private:
    double tol_;
    double worst_ = 0.0;
    std::size_t count_ = 0;
};

Instance overdetermined(std::mt19937_64& gen, int max_nx, int max_ny)
{
    const int nx = uniform_int(gen, 2, max_nx);
    const int ny = uniform_int(gen, nx, max_ny);
    const int nb = uniform_int(gen, 1, nx - 1);
    return {LinearModel(random_cmatrix(gen, ny, nx), random_hpd(gen, ny)),
            ConstraintSet(random_cmatrix(gen, nb, nx), random_cvector(gen, nb))};
}

Instance underdetermined(std::mt19937_64& gen, int max_nx)
{
    const int nx = uniform_int(gen, 3, max_nx);
    const int nb = uniform_int(gen, 1, nx - 1);
    const int ny = uniform_int(gen, nx - nb, nx - 1);
    return {LinearModel(random_cmatrix(gen, ny, nx), random_hpd(gen, ny)),
            ConstraintSet(random_cmatrix(gen, nb, nx), random_cvector(gen, nb))};
}

Instance mixed(std::mt19937_64& gen, int index)
{
    return index % 3 == 2 ? underdetermined(gen, 20) : overdetermined(gen, 20, 40);
}

bool is_overdetermined(const Instance& inst)
{
    return inst.model.ny() >= inst.model.nx();
}

double feasibility(const ConstraintSet& cons, const CVector& x)
{
    return (cons.matrix() * x - cons.rhs()).norm() / (cons.matrix().norm() * x.norm() + cons.rhs().norm());
}

// Constrained estimators applicable to the instance.
std::vector<AffineEstimator> constrained_estimators(const Instance& inst, const NullspaceParam& param)
{
    std::vector<AffineEstimator> out;
    out.push_back(cblue_nullspace(inst.model, param));
    out.push_back(cblue::cblue(inst.model, inst.cons));
    if (is_overdetermined(inst)) {
        out.push_back(cblue_direct(inst.model, inst.cons));
        out.push_back(cls(inst.model, inst.cons));
    }
    return out;
}

// T = I - N (N^H P N)^{-1} N^H P and its residual against T A^H (A A^H)^{-1} A,
// evaluated with plain Eigen inverses.
double projector_identity_residual(const LinearModel& model, const ConstraintSet& cons, const CMatrix& n)
{
    const CMatrix& h = model.measurement();
    const CMatrix p = h.adjoint() * model.noise_covariance().inverse() * h;
    const Index nx = model.nx();
    const CMatrix t = CMatrix::Identity(nx, nx) - n * (n.adjoint() * p * n).inverse() * n.adjoint() * p;
    const CMatrix& a = cons.matrix();
    return (t - t * a.adjoint() * (a * a.adjoint()).inverse() * a).norm() / t.norm();
}

Outcome c1_constraint_satisfaction()
{
    std::mt19937_64 gen(1001);
    Worst worst(1e-9);
    for (int i = 0; i < 1000; ++i) {
        const Instance inst = mixed(gen, i);
        const NullspaceParam param = parameterize(inst.cons);
        for (const AffineEstimator& e : constrained_estimators(inst, param)) {
            for (int k = 0; k < 3; ++k) {
                worst.add(feasibility(inst.cons, e.apply(random_cvector(gen, inst.model.ny()) * 10.0)));
            }
        }
    }
    return {worst.ok(), worst.str("||Ax-b||/(||A|| ||x|| + ||b||)")};
}

Outcome c2_oracle_equivalence()
{
    std::mt19937_64 gen(1002);
    Worst direct(1e-8);
    Worst nullspace(1e-8);
    for (int i = 0; i < 200; ++i) {
        const Instance inst = overdetermined(gen, 20, 40);
        const CVector y = random_cvector(gen, inst.model.ny());
        const CVector oracle = kkt_oracle(inst.model, inst.cons, y);
        direct.add(rel_diff(cblue_direct(inst.model, inst.cons).apply(y), oracle));
        nullspace.add(rel_diff(cblue_nullspace(inst.model, parameterize(inst.cons)).apply(y), oracle));
    }
    return {direct.ok() && nullspace.ok(), direct.str("direct") + "; " + nullspace.str("nullspace")};
}

Outcome c3_identities()
{
    std::mt19937_64 gen(1003);
    Worst cov(1e-9);
    Worst proj(1e-9);
    for (int i = 0; i < 200; ++i) {
        const Instance inst = overdetermined(gen, 20, 40);
        const NullspaceParam param = parameterize(inst.cons);
        cov.add(rel_diff(analytic_cblue_covariance(inst.model, param).matrix,
                         analytic_cblue_covariance(inst.model, inst.cons).matrix));
        proj.add(projector_identity_residual(inst.model, inst.cons, param.basis()));
    }
    return {cov.ok() && proj.ok(), cov.str("covariance forms") + "; " + proj.str("projector")};
}

Outcome c4_invariance()
{
    std::mt19937_64 gen(1004);
    Worst particular(1e-9);
    Worst basis(1e-9);
    for (int i = 0; i < 200; ++i) {
        const Instance inst = mixed(gen, i);
        const NullspaceParam p = parameterize(inst.cons);
        const AffineEstimator ref = cblue_nullspace(inst.model, p);
        const AffineEstimator shifted =
            cblue_nullspace(inst.model, p.with_particular(p.point(random_cvector(gen, p.n0()) * 5.0)));
        const AffineEstimator rotated =
            cblue_nullspace(inst.model, p.with_basis(p.basis() * random_unitary_matrix(gen, p.n0())));
        for (int k = 0; k < 3; ++k) {
            const CVector y = random_cvector(gen, inst.model.ny());
            const CVector x = ref.apply(y);
            particular.add(rel_diff(shifted.apply(y), x));
            basis.add(rel_diff(rotated.apply(y), x));
        }
    }
    return {particular.ok() && basis.ok(), particular.str("particular") + "; " + basis.str("basis")};
}

Outcome c5_reduction()
{
    std::mt19937_64 gen(1005);
    Worst worst(1e-10);
    for (double sigma2 : {0.1, 1.0, 10.0}) {
        for (int i = 0; i < 100; ++i) {
            const Instance inst = overdetermined(gen, 20, 40);
            const Index ny = inst.model.ny();
            const LinearModel model(inst.model.measurement(), sigma2 * CMatrix::Identity(ny, ny));
            const AffineEstimator a = cblue::cblue(model, inst.cons);
            const AffineEstimator b = cls(model, inst.cons);
            const CVector y = random_cvector(gen, ny);
            worst.add(rel_diff(a.apply(y), b.apply(y)));
        }
    }
    return {worst.ok(), worst.str("cblue vs cls")};
}

// Checks lhs >= rhs with 3 paired standard errors of slack.
struct OrderingCheck {
    std::size_t failures = 0;
    std::size_t checked = 0;
    double tightest = std::numeric_limits<double>::infinity();  // (lhs - rhs) / sigma

    void add(const MseReport& r, std::size_t p, SweepEstimator hi, SweepEstimator lo)
    {
        const double diff = r.points[p][hi].empirical_mse - r.points[p][lo].empirical_mse;
        const double sigma = r.difference_sigma(p, hi, lo);
        ++checked;
        if (diff < -3.0 * sigma) {
            ++failures;
        }
        tightest = std::min(tightest, diff / sigma);
    }
};

Outcome c6_figure_orderings()
{
    ExperimentSpec spec;
    spec.trials = 10'000;
    const MseReport r = run_experiment(spec);
    using S = SweepEstimator;
    OrderingCheck check;
    for (std::size_t p = 0; p < r.points.size(); ++p) {
        check.add(r, p, S::Ls, S::LsMeanSub);
        check.add(r, p, S::LsMeanSub, S::Cls);
        check.add(r, p, S::Blue, S::BlueMeanSub);
        check.add(r, p, S::BlueMeanSub, S::Cblue);
        check.add(r, p, S::Cls, S::Cblue);
    }
    char buf[200];
    std::snprintf(buf, sizeof buf, "%zu orderings over %zu k values, violations=%zu, min margin=%.1f sigma",
                  check.checked, r.points.size(), check.failures, check.tightest);
    return {check.failures == 0 && r.points.size() == 10, buf};
}

const MseReport& tolerance_report()
{
    static const MseReport report = [] {
        ExperimentSpec spec;
        spec.trials = 100'000;
        return run_experiment(spec);
    }();
    return report;
}

Outcome c7_analytic_agreement()
{
    const MseReport& r = tolerance_report();
    Worst agreement(0.05);
    for (const SweepPoint& pt : r.points) {
        for (SweepEstimator e : kSweepEstimators) {
            agreement.add(std::abs(pt[e].empirical_mse - pt[e].analytic_mse) / pt[e].analytic_mse);
        }
    }

    std::mt19937_64 gen(1007);
    Worst linear(1e-12);
    const ExperimentSpec spec;
    for (int i = 0; i < 20; ++i) {
        const LinearModel unit = system_identification_model(gen, 1.0);
        const auto ref = analytic_mse(sweep_estimators(unit, dc_free(spec.n_x)), unit.noise_covariance());
        for (double k : spec.k_grid) {
            const LinearModel scaled(unit.measurement(), k * unit.noise_covariance());
            const auto mse = analytic_mse(sweep_estimators(scaled, dc_free(spec.n_x)), scaled.noise_covariance());
            for (std::size_t j = 0; j < kSweepEstimatorCount; ++j) {
                linear.add(std::abs(mse[j] - k * ref[j]) / (k * ref[j]));
            }
        }
    }
    return {agreement.ok() && linear.ok(),
            agreement.str("|emp-analytic|/analytic") + "; " + linear.str("k-linearity")};
}

Outcome c8_unbiasedness()
{
    const MseReport& r = tolerance_report();
    const SweepPoint* unit = nullptr;
    for (const SweepPoint& pt : r.points) {
        if (pt.k == 1.0) {
            unit = &pt;
        }
    }
    if (unit == nullptr) {
        return {false, "no k = 1 point in the sweep"};
    }
    const double trials = static_cast<double>(r.spec.trials);
    Worst worst(4.0);
    for (SweepEstimator e : kSweepEstimators) {
        const EstimatorStats& s = (*unit)[e];
        for (std::size_t j = 0; j < s.bias.size(); ++j) {
            worst.add(std::abs(s.bias[j]) / std::sqrt(s.error_variance[j] / trials));
        }
    }
    return {worst.ok(), worst.str("|bias|/sqrt(var/trials)")};
}

Outcome c9_underdetermined()
{
    std::mt19937_64 gen(1009);
    Worst feasible(1e-9);
    Worst oracle(1e-8);
    Worst cov(1e-9);
    Worst proj(1e-9);
    Worst invariance(1e-9);
    std::size_t refusals = 0;
    constexpr int kInstances = 50;
    for (int i = 0; i < kInstances; ++i) {
        const Instance inst{LinearModel(random_cmatrix(gen, 4, 5), random_hpd(gen, 4)),
                            ConstraintSet(random_cmatrix(gen, 2, 5), random_cvector(gen, 2))};
        const NullspaceParam p = parameterize(inst.cons);
        const AffineEstimator e = cblue_nullspace(inst.model, p);
        const AffineEstimator shifted =
            cblue_nullspace(inst.model, p.with_particular(p.point(random_cvector(gen, p.n0()))));
        const AffineEstimator rotated =
            cblue_nullspace(inst.model, p.with_basis(p.basis() * random_unitary_matrix(gen, p.n0())));
        for (int k = 0; k < 5; ++k) {
            const CVector y = random_cvector(gen, 4);
            const CVector x = e.apply(y);
            feasible.add(feasibility(inst.cons, x));
            oracle.add(rel_diff(x, kkt_oracle(inst.model, inst.cons, y)));
            invariance.add(std::max(rel_diff(shifted.apply(y), x), rel_diff(rotated.apply(y), x)));
        }
        cov.add(rel_diff(covariance(e, inst.model.noise_covariance()).matrix,
                         analytic_cblue_covariance(inst.model, p).matrix));
        proj.add(projector_identity_residual(inst.model, inst.cons, p.basis()));

        auto refuses = [](auto&& build) {
            try {
                build();
            } catch (const Error& err) {
                return err.code() == ErrorCode::RankDeficient;
            }
            return false;
        };
        if (refuses([&] { cblue_direct(inst.model, inst.cons); })
            && refuses([&] { cls(inst.model, inst.cons); })) {
            ++refusals;
        }
    }
    const bool pass = feasible.ok() && oracle.ok() && cov.ok() && proj.ok() && invariance.ok()
                      && refusals == kInstances;
    return {pass, feasible.str("constraints") + "; " + oracle.str("kkt") + "; " + cov.str("covariance") + "; "
                      + proj.str("projector") + "; " + invariance.str("invariance") + "; refusals="
                      + std::to_string(refusals) + "/" + std::to_string(kInstances)};
}

struct Criterion {
    const char* id;
    const char* name;
    double time_limit_s;  // 0 = no limit
    std::function<Outcome()> run;
};

}  // namespace

int main()
{
    const std::vector<Criterion> criteria = {
        {"C1", "constraint satisfaction", 10.0, c1_constraint_satisfaction},
        {"C2", "oracle equivalence", 10.0, c2_oracle_equivalence},
        {"C3", "covariance and projector identities", 0.0, c3_identities},
        {"C4", "particular-solution and basis invariance", 0.0, c4_invariance},
        {"C5", "white-noise reduction to constrained LS", 0.0, c5_reduction},
        {"C6", "MSE orderings across the k sweep", 120.0, c6_figure_orderings},
        {"C7", "analytic/empirical MSE agreement and k-linearity", 0.0, c7_analytic_agreement},
        {"C8", "empirical unbiasedness at k = 1", 0.0, c8_unbiasedness},
        {"C9", "underdetermined support", 0.0, c9_underdetermined},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = c.time_limit_s == 0.0 || seconds < c.time_limit_s;
        const bool pass = outcome.pass && in_time;
        failures += pass ? 0 : 1;
        std::printf("%s %s %s: %s; time=%.2fs%s\n", pass ? "PASS" : "FAIL", c.id, c.name, outcome.detail.c_str(),
                    seconds, in_time ? "" : " (over time limit)");
        std::fflush(stdout);
    }
    std::printf("%s: %d of %zu criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures,
                criteria.size());
    return failures == 0 ? 0 : 1;
}
