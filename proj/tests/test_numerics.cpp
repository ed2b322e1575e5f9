// Copyright 2026 The cblue Authors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <limits>

#include "cblue/numerics.hpp"
#include "test_support.hpp"

using namespace cblue;
using namespace cblue::testing;

namespace {

ErrorCode code_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("hpd_factor of the identity is the identity")
{
    const HpdFactor f = hpd_factor(CMatrix::Identity(3, 3));
    CHECK((f.lower() - CMatrix::Identity(3, 3)).norm() == 0.0);
}

TEST_CASE("hpd_factor of the system identification noise covariance is the element-wise root")
{
    const ExperimentSpec spec;
    Eigen::VectorXd d(10);
    for (int i = 0; i < 10; ++i) {
        d(i) = spec.base_noise_diag[static_cast<std::size_t>(i)];
    }
    const CMatrix m = d.cast<Complex>().asDiagonal();
    const HpdFactor f = hpd_factor(m);
    for (int i = 0; i < 10; ++i) {
        CHECK(f.lower()(i, i).real() == doctest::Approx(std::sqrt(d(i))).epsilon(1e-15));
    }
    CHECK((f.lower() - CMatrix(f.lower().diagonal().asDiagonal())).norm() == 0.0);
}

TEST_CASE("hpd_factor of [[2,1],[1,2]]")
{
    CMatrix m(2, 2);
    m << 2, 1, 1, 2;
    const HpdFactor f = hpd_factor(m);
    const CMatrix& l = f.lower();
    CHECK(l(0, 0).real() == doctest::Approx(std::sqrt(2.0)));
    CHECK(std::abs(l(0, 1)) == 0.0);
    CHECK(l(1, 0).real() == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(l(1, 1).real() == doctest::Approx(std::sqrt(1.5)));
    CHECK((l * l.adjoint() - m).norm() <= 1e-10 * m.norm());
}

TEST_CASE("hpd_factor recomposes complex Hermitian matrices")
{
    std::mt19937_64 gen(11);
    for (int n : {1, 2, 5, 12, 30}) {
        const CMatrix m = random_hpd(gen, n);
        const HpdFactor f = hpd_factor(m);
        const CMatrix& l = f.lower();
        CHECK((l * l.adjoint() - m).norm() <= 1e-10 * m.norm());
        CHECK(l.isLowerTriangular());
        for (Index i = 0; i < n; ++i) {
            CHECK(l(i, i).real() > 0.0);
            CHECK(l(i, i).imag() == 0.0);
        }
    }
}

TEST_CASE("hpd_factor rejects bad input")
{
    CMatrix indefinite(2, 2);
    indefinite << 1, 2, 2, 1;
    CHECK(code_of([&] { hpd_factor(indefinite); }) == ErrorCode::NotPositiveDefinite);
    CHECK(code_of([] { hpd_factor(CMatrix::Zero(3, 3)); }) == ErrorCode::NotPositiveDefinite);

    // Singular up to rounding: second pivot is far below dim * eps * max diag.
    CMatrix nearly(2, 2);
    nearly << 1, 1, 1, 1 + 1e-17;
    CHECK(code_of([&] { hpd_factor(nearly); }) == ErrorCode::NotPositiveDefinite);

    CMatrix skew(2, 2);
    skew << 2, Complex(0, 1), Complex(0, 1), 2;
    CHECK(code_of([&] { hpd_factor(skew); }) == ErrorCode::NotHermitian);

    CHECK(code_of([] { hpd_factor(CMatrix::Identity(2, 3)); }) == ErrorCode::DimensionMismatch);

    CMatrix nan = CMatrix::Identity(2, 2);
    nan(1, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK(code_of([&] { hpd_factor(nan); }) == ErrorCode::NonFinite);
}

TEST_CASE("hpd_solve")
{
    SUBCASE("identity factor returns the right-hand side")
    {
        std::mt19937_64 gen(3);
        const CMatrix b = random_cmatrix(gen, 4, 3);
        CHECK((hpd_solve(hpd_factor(CMatrix::Identity(4, 4)), b) - b).norm() == 0.0);
    }
    SUBCASE("scalar")
    {
        const CMatrix x = hpd_solve(hpd_factor(CMatrix::Constant(1, 1, 4.0)), CMatrix::Constant(1, 1, 8.0));
        CHECK(x(0, 0).real() == doctest::Approx(2.0));
    }
    SUBCASE("construct then solve")
    {
        std::mt19937_64 gen(4);
        const CMatrix m = random_hpd(gen, 6);
        const CMatrix x0 = random_cmatrix(gen, 6, 2);
        const CMatrix b = m * x0;
        const CMatrix b_copy = b;
        const CMatrix x = hpd_solve(hpd_factor(m), b);
        CHECK(rel_diff(x, x0) <= 1e-9);
        CHECK((m * x - b).norm() <= 1e-9 * b.norm());
        CHECK((b - b_copy).norm() == 0.0);
    }
    SUBCASE("dimension mismatch")
    {
        const HpdFactor f = hpd_factor(CMatrix::Identity(3, 3));
        CHECK(code_of([&] { hpd_solve(f, CMatrix::Ones(2, 1)); }) == ErrorCode::DimensionMismatch);
        CHECK(code_of([&] { whiten(f, CMatrix::Ones(4, 1)); }) == ErrorCode::DimensionMismatch);
    }
}

TEST_CASE("hpd_solve inverts M X for random HPD M (property)")
{
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = uniform_int(gen, 1, 25);
        const CMatrix m = random_hpd(gen, n, 0.1);
        const CMatrix x = random_cmatrix(gen, n, uniform_int(gen, 1, 4));
        CHECK(rel_diff(hpd_solve(hpd_factor(m), m * x), x) <= 1e-9);
    }
}

TEST_CASE("whiten applies the inverse lower factor")
{
    std::mt19937_64 gen(6);
    const CMatrix m = random_hpd(gen, 5);
    const HpdFactor f = hpd_factor(m);
    const CMatrix b = random_cmatrix(gen, 5, 2);
    const CMatrix w = whiten(f, b);
    CHECK(rel_diff(f.lower() * w, b) <= 1e-12);
    // w^H w = b^H M^{-1} b
    CHECK(rel_diff(w.adjoint() * w, b.adjoint() * hpd_solve(f, b)) <= 1e-10);
}

TEST_CASE("nullspace_basis of [1, 1]")
{
    CMatrix a(1, 2);
    a << 1, 1;
    const CMatrix n = nullspace_basis(a);
    REQUIRE(n.rows() == 2);
    REQUIRE(n.cols() == 1);
    CHECK(std::abs(n(0, 0)) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(std::abs(n(0, 0) + n(1, 0)) <= 1e-15);
    CHECK(n.norm() == doctest::Approx(1.0));
}

TEST_CASE("nullspace_basis of a ones row has zero column sums")
{
    const CMatrix n = nullspace_basis(CMatrix::Ones(1, 5));
    REQUIRE(n.rows() == 5);
    REQUIRE(n.cols() == 4);
    CHECK(n.colwise().sum().norm() <= 1e-14);
    CHECK((n.adjoint() * n - CMatrix::Identity(4, 4)).norm() <= 1e-12);
}

TEST_CASE("nullspace_basis contracts on random wide matrices (property)")
{
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 60; ++trial) {
        const int nx = trial == 0 ? 5 : uniform_int(gen, 2, 20);
        const int nb = trial == 0 ? 2 : uniform_int(gen, 1, nx - 1);
        const CMatrix a = random_cmatrix(gen, nb, nx);
        const CMatrix n = nullspace_basis(a);
        REQUIRE(n.rows() == nx);
        REQUIRE(n.cols() == nx - nb);
        CHECK((a * n).norm() <= 1e-10 * a.norm());
        CHECK((n.adjoint() * n - CMatrix::Identity(nx - nb, nx - nb)).norm() <= 1e-12);
    }
}

TEST_CASE("nullspace_basis errors")
{
    CMatrix dependent(2, 3);
    dependent << 1, 2, 3, 2, 4, 6;
    CHECK(code_of([&] { nullspace_basis(dependent); }) == ErrorCode::RankDeficientConstraints);

    CMatrix square(2, 2);
    square << 1, 2, 3, 4;
    CHECK(code_of([&] { nullspace_basis(square); }) == ErrorCode::EmptyNullspace);
}

TEST_CASE("numerical_rank honours the tolerance")
{
    CMatrix a(2, 3);
    a << 1, 0, 0, 0, 1e-8, 0;
    CHECK(numerical_rank(a) == 2);
    CHECK(numerical_rank(a, 1e-6) == 1);
    CHECK(numerical_rank(CMatrix::Zero(3, 2)) == 0);
}

TEST_CASE("least_norm_solution")
{
    SUBCASE("symmetric row")
    {
        CMatrix a(1, 2);
        a << 1, 1;
        const CVector x = least_norm_solution(a, CVector::Constant(1, 2.0));
        CHECK(std::abs(x(0) - 1.0) <= 1e-15);
        CHECK(std::abs(x(1) - 1.0) <= 1e-15);
    }
    SUBCASE("zero right-hand side")
    {
        CHECK(least_norm_solution(CMatrix::Ones(1, 5), CVector::Zero(1)).norm() == 0.0);
    }
    SUBCASE("random system: residual and orthogonality to the nullspace")
    {
        std::mt19937_64 gen(8);
        for (int trial = 0; trial < 20; ++trial) {
            const CMatrix a = random_cmatrix(gen, 2, 6);
            const CVector b = random_cvector(gen, 2);
            const CVector x = least_norm_solution(a, b);
            CHECK((a * x - b).norm() <= 1e-10 * (a.norm() * x.norm() + b.norm()));
            CHECK((nullspace_basis(a).adjoint() * x).norm() <= 1e-10 * x.norm());
        }
    }
    SUBCASE("errors")
    {
        CMatrix dependent(2, 3);
        dependent << 1, 2, 3, 2, 4, 6;
        CHECK(code_of([&] { least_norm_solution(dependent, CVector::Ones(2)); })
              == ErrorCode::RankDeficientConstraints);
        CHECK(code_of([] { least_norm_solution(CMatrix::Ones(1, 3), CVector::Ones(2)); })
              == ErrorCode::DimensionMismatch);
    }
}

TEST_CASE("least_norm_solution is the minimum-norm solution (property)")
{
    std::mt19937_64 gen(9);
    for (int trial = 0; trial < 30; ++trial) {
        const int nx = uniform_int(gen, 2, 15);
        const int nb = uniform_int(gen, 1, nx - 1);
        const CMatrix a = random_cmatrix(gen, nb, nx);
        const CVector b = random_cvector(gen, nb);
        const CVector xp = least_norm_solution(a, b);
        const CMatrix n = nullspace_basis(a);
        for (int k = 0; k < 5; ++k) {
            const CVector other = xp + n * random_cvector(gen, nx - nb);
            CHECK((a * other - b).norm() <= 1e-9 * (a.norm() * other.norm() + b.norm()));
            CHECK(xp.norm() <= other.norm() * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("require_finite")
{
    CVector v = CVector::Ones(3);
    CHECK_NOTHROW(require_finite(v, "v"));
    v(1) = Complex(0.0, std::numeric_limits<double>::infinity());
    CHECK(code_of([&] { require_finite(v, "v"); }) == ErrorCode::NonFinite);
    CHECK(code_of([] { require_finite(CVector(), "v"); }) == ErrorCode::DimensionMismatch);
}
