// Copyright 2026 The cblue Authors.
// SPDX-License-Identifier: Apache-2.0

#include "cblue/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

namespace cblue {

namespace {

constexpr std::size_t kBlockTrials = 512;
constexpr int kMaxRegenerations = 64;

// Neumaier-compensated running sum.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double v)
    {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    void merge(const CompensatedSum& other)
    {
        add(other.sum);
        add(other.carry);
    }
    double value() const { return sum + carry; }
};

struct ElementSums {
    CompensatedSum re, im, abs2;
};

// Everything one block of trials contributes to a sweep point.
struct BlockAccumulator {
    std::size_t trials = 0;
    std::size_t regenerations = 0;
    double max_residual = 0.0;
    std::array<CompensatedSum, kSweepEstimatorCount> squared_error;
    std::array<CompensatedSum, kSweepEstimatorCount> analytic;
    std::array<std::array<CompensatedSum, kSweepEstimatorCount>, kSweepEstimatorCount> cross;
    std::vector<ElementSums> elements;  // estimator-major, n_x per estimator

    explicit BlockAccumulator(Index nx)
        : elements(kSweepEstimatorCount * static_cast<std::size_t>(nx))
    {
    }

    void merge(const BlockAccumulator& o)
    {
        trials += o.trials;
        regenerations += o.regenerations;
        max_residual = std::max(max_residual, o.max_residual);
        for (std::size_t a = 0; a < kSweepEstimatorCount; ++a) {
            squared_error[a].merge(o.squared_error[a]);
            analytic[a].merge(o.analytic[a]);
            for (std::size_t b = 0; b < kSweepEstimatorCount; ++b) {
                cross[a][b].merge(o.cross[a][b]);
            }
        }
        for (std::size_t i = 0; i < elements.size(); ++i) {
            elements[i].re.merge(o.elements[i].re);
            elements[i].im.merge(o.elements[i].im);
            elements[i].abs2.merge(o.elements[i].abs2);
        }
    }
};

CMatrix noise_covariance_at(const ExperimentSpec& spec, double k)
{
    Eigen::VectorXd diag(static_cast<Index>(spec.base_noise_diag.size()));
    for (std::size_t i = 0; i < spec.base_noise_diag.size(); ++i) {
        diag(static_cast<Index>(i)) = k * spec.base_noise_diag[i];
    }
    return diag.cast<Complex>().asDiagonal();
}

CVector draw_truth(TrueXPolicy policy, const NullspaceParam& param, CounterRng& rng)
{
    switch (policy) {
    case TrueXPolicy::Particular:
        return param.particular();
    case TrueXPolicy::NullspaceUnitNorm:
        break;
    }
    CVector direction = param.basis() * sample_proper_gaussian(param.n0(), rng);
    const double norm = direction.norm();
    if (norm > 0.0) {
        direction /= norm;
    }
    return param.particular() + direction;
}

void run_trial(const ExperimentSpec& spec,
               const NullspaceParam& param,
               const CMatrix& noise_cov,
               std::uint32_t k_index,
               std::uint64_t trial,
               BlockAccumulator& acc)
{
    const ConstraintSet& constraints = param.constraints();
    CounterRng rng(spec.seed, k_index, static_cast<std::uint32_t>(trial));

    std::optional<LinearModel> model;
    std::optional<SweepEstimators> estimators;
    for (int attempt = 0;; ++attempt) {
        const CMatrix h = convolution_matrix(sample_proper_gaussian(spec.n_u, rng), spec.n_x);
        try {
            model.emplace(h, noise_cov);
            estimators.emplace(sweep_estimators(*model, constraints));
            break;
        } catch (const Error& e) {
            const bool rank_failure = e.code() == ErrorCode::RankDeficient
                                      || e.code() == ErrorCode::RankDeficientReducedModel;
            if (!rank_failure || attempt + 1 >= kMaxRegenerations) {
                throw;
            }
            ++acc.regenerations;
        }
    }

    const CVector x = draw_truth(spec.true_x_policy, param, rng);
    const CVector y = model->measurement() * x + sample_noise(model->noise_factor(), rng);
    const auto analytic = analytic_mse(*estimators, noise_cov);
    const auto nx = static_cast<double>(spec.n_x);
    const double a_norm = constraints.matrix().norm();

    std::array<double, kSweepEstimatorCount> sq{};
    for (std::size_t i = 0; i < kSweepEstimatorCount; ++i) {
        const AffineEstimator& est = (*estimators)[i];
        const CVector estimate = est.apply(y);
        const CVector error = estimate - x;
        sq[i] = error.squaredNorm() / nx;
        acc.squared_error[i].add(sq[i]);
        acc.analytic[i].add(analytic[i]);
        for (Index j = 0; j < spec.n_x; ++j) {
            auto& el = acc.elements[i * static_cast<std::size_t>(spec.n_x) + static_cast<std::size_t>(j)];
            el.re.add(error(j).real());
            el.im.add(error(j).imag());
            el.abs2.add(std::norm(error(j)));
        }
        if (est.label().constrained() || est.label().mean_subtracted) {
            const double residual = (constraints.matrix() * estimate - constraints.rhs()).norm()
                                    / std::max(a_norm * estimate.norm() + constraints.rhs().norm(),
                                               1e-300);
            acc.max_residual = std::max(acc.max_residual, residual);
        }
    }
    for (std::size_t a = 0; a < kSweepEstimatorCount; ++a) {
        for (std::size_t b = 0; b < kSweepEstimatorCount; ++b) {
            acc.cross[a][b].add(sq[a] * sq[b]);
        }
    }
    ++acc.trials;
}

SweepPoint summarize(double k, const BlockAccumulator& acc, Index nx)
{
    SweepPoint point;
    point.k = k;
    point.regenerations = acc.regenerations;
    point.max_constraint_residual = acc.max_residual;
    const auto n = static_cast<double>(acc.trials);

    std::array<double, kSweepEstimatorCount> mean{};
    for (std::size_t a = 0; a < kSweepEstimatorCount; ++a) {
        mean[a] = acc.squared_error[a].value() / n;
    }
    for (std::size_t a = 0; a < kSweepEstimatorCount; ++a) {
        for (std::size_t b = 0; b < kSweepEstimatorCount; ++b) {
            const double cov = (acc.cross[a][b].value() - n * mean[a] * mean[b])
                               / std::max(n - 1.0, 1.0);
            point.error_covariance(static_cast<Index>(a), static_cast<Index>(b)) = cov;
        }
    }
    for (std::size_t a = 0; a < kSweepEstimatorCount; ++a) {
        EstimatorStats& s = point.estimators[a];
        s.empirical_mse = mean[a];
        const double var = std::max(point.error_covariance(static_cast<Index>(a), static_cast<Index>(a)), 0.0);
        s.empirical_stderr = std::sqrt(var / n);
        s.analytic_mse = acc.analytic[a].value() / n;
        for (Index j = 0; j < nx; ++j) {
            const auto& el = acc.elements[a * static_cast<std::size_t>(nx) + static_cast<std::size_t>(j)];
            const Complex bias(el.re.value() / n, el.im.value() / n);
            s.bias.push_back(bias);
            s.error_variance.push_back(
                std::max(el.abs2.value() / n - std::norm(bias), 0.0) * n / std::max(n - 1.0, 1.0));
        }
    }
    return point;
}

}  // namespace

CMatrix convolution_matrix(const CVector& u, Index n_x)
{
    if (u.size() < 1 || n_x < 1) {
        throw Error(ErrorCode::InvalidArgument, "convolution needs a non-empty input and n_x >= 1");
    }
    CMatrix h = CMatrix::Zero(u.size() + n_x - 1, n_x);
    for (Index j = 0; j < n_x; ++j) {
        h.block(j, j, u.size(), 1) = u;
    }
    return h;
}

CVector sample_proper_gaussian(Index dim, CounterRng& rng)
{
    if (dim < 1) {
        throw Error(ErrorCode::InvalidArgument, "sample dimension must be positive");
    }
    // Box-Muller in polar form: |z|^2 ~ Exp(1), phase uniform.
    CVector z(dim);
    for (Index i = 0; i < dim; ++i) {
        const double radius = std::sqrt(-std::log(rng.uniform_open_zero()));
        const double phase = 2.0 * std::numbers::pi * rng.uniform();
        z(i) = Complex(radius * std::cos(phase), radius * std::sin(phase));
    }
    return z;
}

CVector sample_noise(const HpdFactor& factor, CounterRng& rng)
{
    return factor.lower().triangularView<Eigen::Lower>() * sample_proper_gaussian(factor.dim(), rng);
}

std::string_view to_string(TrueXPolicy policy)
{
    switch (policy) {
    case TrueXPolicy::NullspaceUnitNorm: return "nullspace_unit_norm";
    case TrueXPolicy::Particular: return "particular";
    }
    return "unknown";
}

std::optional<TrueXPolicy> parse_true_x_policy(std::string_view name)
{
    if (name == "nullspace_unit_norm") {
        return TrueXPolicy::NullspaceUnitNorm;
    }
    if (name == "particular") {
        return TrueXPolicy::Particular;
    }
    return std::nullopt;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count)
{
    std::vector<double> grid(count);
    const double start = std::log10(lo);
    const double step = count > 1 ? (std::log10(hi) - start) / static_cast<double>(count - 1) : 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        grid[i] = std::pow(10.0, start + step * static_cast<double>(i));
    }
    // Pin the end points exactly.
    if (count > 0) {
        grid.front() = lo;
    }
    if (count > 1) {
        grid.back() = hi;
    }
    return grid;
}

void ExperimentSpec::validate() const
{
    if (n_x < 2) {
        throw Error(ErrorCode::InvalidArgument, "n_x must be at least 2 for a zero-sum constraint");
    }
    if (n_u < 1) {
        throw Error(ErrorCode::InvalidArgument, "n_u must be positive");
    }
    if (static_cast<Index>(base_noise_diag.size()) != n_u + n_x - 1) {
        throw Error(ErrorCode::InvalidArgument,
                    "base_noise_diag needs n_u + n_x - 1 = " + std::to_string(n_u + n_x - 1)
                        + " entries, got " + std::to_string(base_noise_diag.size()));
    }
    for (double d : base_noise_diag) {
        if (!(d > 0.0) || !std::isfinite(d)) {
            throw Error(ErrorCode::InvalidArgument, "base_noise_diag entries must be positive");
        }
    }
    if (k_grid.empty()) {
        throw Error(ErrorCode::InvalidArgument, "k_grid is empty");
    }
    for (double k : k_grid) {
        if (!(k > 0.0) || !std::isfinite(k)) {
            throw Error(ErrorCode::InvalidArgument, "k_grid entries must be positive");
        }
    }
    if (trials < 1) {
        throw Error(ErrorCode::InvalidArgument, "trials must be at least 1");
    }
    if (trials > std::numeric_limits<std::uint32_t>::max()
        || k_grid.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw Error(ErrorCode::InvalidArgument, "too many trials or sweep points");
    }
}

std::string_view to_string(SweepEstimator estimator)
{
    switch (estimator) {
    case SweepEstimator::Ls: return "ls";
    case SweepEstimator::LsMeanSub: return "ls_meansub";
    case SweepEstimator::Cls: return "cls";
    case SweepEstimator::Blue: return "blue";
    case SweepEstimator::BlueMeanSub: return "blue_meansub";
    case SweepEstimator::Cblue: return "cblue";
    }
    return "unknown";
}

SweepEstimators sweep_estimators(const LinearModel& model, const ConstraintSet& constraints)
{
    AffineEstimator least_squares = ls(model);
    AffineEstimator best = blue(model);
    AffineEstimator ls_centered = mean_subtracted(least_squares);
    AffineEstimator blue_centered = mean_subtracted(best);
    return {std::move(least_squares), std::move(ls_centered), cls(model, constraints),
            std::move(best),          std::move(blue_centered), cblue_direct(model, constraints)};
}

std::array<double, kSweepEstimatorCount> analytic_mse(const SweepEstimators& estimators,
                                                      const CMatrix& noise_covariance)
{
    std::array<double, kSweepEstimatorCount> mse{};
    for (std::size_t i = 0; i < kSweepEstimatorCount; ++i) {
        mse[i] = covariance(estimators[i], noise_covariance).average_variance();
    }
    return mse;
}

double MseReport::difference_sigma(std::size_t point, SweepEstimator a, SweepEstimator b) const
{
    const auto& cov = points.at(point).error_covariance;
    const auto ia = static_cast<Index>(a);
    const auto ib = static_cast<Index>(b);
    const double var = cov(ia, ia) + cov(ib, ib) - 2.0 * cov(ia, ib);
    return std::sqrt(std::max(var, 0.0) / static_cast<double>(spec.trials));
}

std::size_t MseReport::regenerations() const
{
    std::size_t total = 0;
    for (const auto& p : points) {
        total += p.regenerations;
    }
    return total;
}

MseReport run_experiment(const ExperimentSpec& spec, unsigned threads)
{
    spec.validate();

    const ConstraintSet constraints(CMatrix::Ones(1, spec.n_x), CVector::Zero(1));
    const NullspaceParam param = parameterize(constraints);

    std::vector<CMatrix> noise_covs;
    for (double k : spec.k_grid) {
        noise_covs.push_back(noise_covariance_at(spec, k));
    }

    const std::size_t blocks_per_point = (spec.trials + kBlockTrials - 1) / kBlockTrials;
    const std::size_t total_blocks = blocks_per_point * spec.k_grid.size();
    std::vector<std::optional<BlockAccumulator>> blocks(total_blocks);

    std::atomic<std::size_t> next_block{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (;;) {
            const std::size_t index = next_block.fetch_add(1);
            if (index >= total_blocks || failed.load()) {
                return;
            }
            const auto k_index = static_cast<std::uint32_t>(index / blocks_per_point);
            const std::size_t first = (index % blocks_per_point) * kBlockTrials;
            const std::size_t last = std::min(first + kBlockTrials, spec.trials);
            BlockAccumulator acc(spec.n_x);
            try {
                for (std::size_t t = first; t < last; ++t) {
                    run_trial(spec, param, noise_covs[k_index], k_index, t, acc);
                }
            } catch (...) {
                if (!failed.exchange(true)) {
                    failure = std::current_exception();
                }
                return;
            }
            blocks[index].emplace(std::move(acc));
        }
    };

    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, total_blocks));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < threads; ++i) {
            pool.emplace_back(worker);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    MseReport report;
    report.spec = spec;
    for (std::size_t ki = 0; ki < spec.k_grid.size(); ++ki) {
        BlockAccumulator total(spec.n_x);
        for (std::size_t b = 0; b < blocks_per_point; ++b) {
            total.merge(*blocks[ki * blocks_per_point + b]);
        }
        report.points.push_back(summarize(spec.k_grid[ki], total, spec.n_x));
    }
    return report;
}

}  // namespace cblue
