// Copyright 2026 The cblue Authors.
// SPDX-License-Identifier: Apache-2.0

#include "cblue/cli.hpp"

#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cblue/estimators.hpp"
#include "cblue/io.hpp"
#include "cblue/verification.hpp"

namespace cblue::cli {

namespace {

using json = nlohmann::json;

struct EstimateArgs {
    std::string h, c, a, b, y;
    std::string method = "cblue";
};

struct ExperimentArgs {
    std::string config;
    std::string output;
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    bool plot = false;
};

struct VerifyArgs {
    std::size_t trials = 200;
    std::uint64_t seed = 1;
    bool perturb = false;
};

json complex_list(const CVector& v)
{
    json list = json::array();
    for (Index i = 0; i < v.size(); ++i) {
        list.push_back({v(i).real(), v(i).imag()});
    }
    return list;
}

int cmd_estimate(const EstimateArgs& args, std::ostream& out)
{
    const LinearModel model(io::read_matrix_file(args.h), io::read_matrix_file(args.c));
    const CVector y = io::as_vector(io::read_matrix_file(args.y), "y");

    std::optional<ConstraintSet> constraints;
    if (!args.a.empty() || !args.b.empty()) {
        if (args.a.empty() || args.b.empty()) {
            throw io::ParseError("--A and --b must be given together");
        }
        constraints.emplace(io::read_matrix_file(args.a),
                            io::as_vector(io::read_matrix_file(args.b), "b"));
    }
    const bool needs_constraints = args.method != "ls" && args.method != "blue";
    if (needs_constraints && !constraints) {
        throw io::ParseError("method '" + args.method + "' needs --A and --b");
    }

    std::optional<AffineEstimator> estimator;
    if (args.method == "ls") {
        estimator.emplace(ls(model));
    } else if (args.method == "blue") {
        estimator.emplace(blue(model));
    } else if (args.method == "cls") {
        estimator.emplace(cls(model, *constraints));
    } else if (args.method == "cblue") {
        estimator.emplace(cblue(model, *constraints));
    } else if (args.method == "cblue-nullspace") {
        estimator.emplace(cblue_nullspace(model, parameterize(*constraints)));
    } else {
        estimator.emplace(cblue_direct(model, *constraints));
    }

    const CVector estimate = estimator->apply(y);
    json record = {
        {"method", args.method},
        {"form", estimator->label().to_string()},
        {"estimate", complex_list(estimate)},
    };
    if (constraints) {
        record["constraint_residual"] = (constraints->matrix() * estimate - constraints->rhs()).norm();
    }
    const CovarianceResult cov = covariance(*estimator, model.noise_covariance());
    record["variance"] = std::vector<double>(cov.variance.begin(), cov.variance.end());
    out << record.dump(2) << "\n";
    return kExitOk;
}

int cmd_experiment(const ExperimentArgs& args, std::ostream& out)
{
    ExperimentSpec spec = args.config.empty()
                              ? ExperimentSpec{}
                              : io::parse_experiment_config(io::read_text(args.config));
    if (args.trials) {
        spec.trials = *args.trials;
    }
    if (args.seed) {
        spec.seed = *args.seed;
    }
    try {
        spec.validate();
    } catch (const Error& e) {
        throw io::ParseError(e.what());
    }
    if (args.plot && args.output.empty()) {
        throw io::ParseError("--plot needs --output");
    }

    const MseReport report = run_experiment(spec, args.threads);
    const std::string csv = io::format_csv(report);
    if (args.output.empty()) {
        out << csv;
        return kExitOk;
    }
    io::write_text(args.output, csv);
    if (args.plot) {
        std::filesystem::path svg_path(args.output);
        svg_path.replace_extension(".svg");
        io::write_text(svg_path, io::format_svg(report));
    }
    return kExitOk;
}

int cmd_verify(const VerifyArgs& args, std::ostream& out)
{
    VerifyOptions options;
    options.instances = args.trials;
    options.seed = args.seed;
    options.perturb_direct_form = args.perturb;

    bool all_passed = true;
    for (const PropertyResult& r : run_verification(options)) {
        all_passed = all_passed && r.passed();
        out << (r.passed() ? "PASS " : "FAIL ") << r.name << " worst=" << io::format_number(r.worst)
            << " threshold=" << io::format_number(r.threshold) << " checked=" << r.checked << "\n";
    }
    out << (all_passed ? "all properties passed" : "verification FAILED") << "\n";
    return all_passed ? kExitOk : kExitFailure;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Constrained best linear unbiased estimation toolkit", "cblue"};
    app.require_subcommand(1);

    EstimateArgs est;
    auto* estimate = app.add_subcommand("estimate", "Estimate x from matrix files");
    estimate->add_option("--H", est.h, "Measurement matrix file")->required();
    estimate->add_option("--C", est.c, "Noise covariance file")->required();
    estimate->add_option("--y", est.y, "Measurement vector file")->required();
    estimate->add_option("--A", est.a, "Constraint matrix file");
    estimate->add_option("--b", est.b, "Constraint vector file");
    estimate->add_option("--method", est.method, "Estimator")
        ->check(CLI::IsMember({"ls", "blue", "cls", "cblue", "cblue-nullspace", "cblue-direct"}))
        ->capture_default_str();

    ExperimentArgs exp;
    auto* experiment = app.add_subcommand("experiment", "Run the Monte Carlo MSE sweep");
    experiment->add_option("--config", exp.config, "Experiment configuration (JSON)");
    experiment->add_option("--output", exp.output, "CSV output path (stdout if omitted)");
    experiment->add_option("--trials", exp.trials, "Trials per k (overrides config)");
    experiment->add_option("--seed", exp.seed, "Master seed (overrides config)");
    experiment->add_option("--threads", exp.threads, "Worker threads, 0 = all cores");
    experiment->add_flag("--plot", exp.plot, "Also write an SVG chart next to the CSV");

    VerifyArgs ver;
    auto* verify = app.add_subcommand("verify", "Run the identity and invariance checks");
    verify->add_option("--trials", ver.trials, "Random instances")->capture_default_str();
    verify->add_option("--seed", ver.seed, "Seed")->capture_default_str();
    // Mutation hook for testing the checker itself.
    verify->add_flag("--perturb-direct-form", ver.perturb)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*estimate) {
            return cmd_estimate(est, out);
        }
        if (*experiment) {
            return cmd_experiment(exp, out);
        }
        return cmd_verify(ver, out);
    } catch (const io::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace cblue::cli
