// Copyright 2026 The cblue Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cblue/estimators.hpp"
#include "cblue/rng.hpp"

namespace cblue {

struct ProblemInstance {
    LinearModel model;
    ConstraintSet constraints;
};

// Proper Gaussian H, A, b and a well-conditioned random Hermitian PD noise
// covariance of the requested shape.
ProblemInstance random_instance(CounterRng& rng, Index ny, Index nx, Index nb);

// Random unitary n x n matrix (Q factor of a proper Gaussian matrix).
CMatrix random_unitary(CounterRng& rng, Index n);

struct PropertyResult {
    std::string name;
    double worst = 0.0;      // largest residual seen over all instances
    double threshold = 0.0;
    std::size_t checked = 0;  // number of instances that exercised the property

    bool passed() const { return checked > 0 && worst <= threshold; }
};

struct VerifyOptions {
    std::size_t instances = 200;
    std::uint64_t seed = 1;
    // Mutation hook: flips the sign of the constraint term of the direct form
    // before it is checked. Every suite run with it set must fail.
    bool perturb_direct_form = false;
};

/// Numerical checks of the constrained BLUE: constraint satisfaction,
/// unbiasedness on the feasible set, agreement with the KKT oracle, the
/// covariance and projector identities, invariance to the particular solution
/// and nullspace basis, reduction to constrained LS under white noise,
/// variance optimality against competitors, and underdetermined support.
std::vector<PropertyResult> run_verification(const VerifyOptions& options);

}  // namespace cblue
