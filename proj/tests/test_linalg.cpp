#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>

#include "switchsurf/linalg.hpp"
#include "switchsurf/sampling.hpp"

using namespace switchsurf;

namespace {

// Independent stability oracle via the Routh-Hurwitz conditions on the
// characteristic polynomial, so the Lyapunov-criterion implementation is
// checked against a different method entirely.
bool routh_hurwitz_2x2(const Matrix& a) {
    const double tr = a(0, 0) + a(1, 1);
    const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    return tr < 0.0 && det > 0.0;
}

double det3(const Matrix& a) {
    return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
           a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
           a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

// Coefficients of lambda^3 + c2 lambda^2 + c1 lambda + c0.
struct Cubic {
    double c2, c1, c0;
};

Cubic char_poly_3x3(const Matrix& a) {
    const double tr = a(0, 0) + a(1, 1) + a(2, 2);
    const double m11 = a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
    const double m22 = a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0);
    const double m33 = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    return {-tr, m11 + m22 + m33, -det3(a)};
}

bool routh_hurwitz_3x3(const Matrix& a) {
    const Cubic c = char_poly_3x3(a);
    return c.c2 > 0.0 && c.c0 > 0.0 && c.c2 * c.c1 > c.c0;
}

}  // namespace

TEST_CASE("vector arithmetic and norms") {
    const Vector a{1.0, -2.0, 2.0};
    const Vector b{0.5, 0.5, 1.0};
    CHECK(dot(a, b) == Catch::Approx(1.5));
    CHECK(norm(a) == Catch::Approx(3.0));
    CHECK(norm_inf(a) == Catch::Approx(2.0));
    const Vector c = 2.0 * a - b;
    CHECK(c[0] == Catch::Approx(1.5));
    CHECK(c[1] == Catch::Approx(-4.5));
    CHECK(c[2] == Catch::Approx(3.0));
    CHECK(all_finite(c));
    Vector bad{1.0, std::nan("")};
    CHECK_FALSE(all_finite(bad));
    CHECK_THROWS_AS(dot(a, Vector{1.0}), std::invalid_argument);
}

TEST_CASE("matrix products and transpose") {
    const Matrix a{{1.0, 2.0}, {3.0, 4.0}};
    const Matrix b{{0.0, 1.0}, {1.0, 0.0}};
    const Matrix ab = a * b;
    CHECK(ab(0, 0) == Catch::Approx(2.0));
    CHECK(ab(0, 1) == Catch::Approx(1.0));
    CHECK(ab(1, 0) == Catch::Approx(4.0));
    CHECK(ab(1, 1) == Catch::Approx(3.0));
    const Vector v = a * Vector{1.0, 1.0};
    CHECK(v[0] == Catch::Approx(3.0));
    CHECK(v[1] == Catch::Approx(7.0));
    const Matrix at = transpose(a);
    CHECK(at(0, 1) == Catch::Approx(3.0));
    CHECK(max_asymmetry(b) == 0.0);
    CHECK(max_asymmetry(a) == Catch::Approx(1.0));
    CHECK_THROWS_AS(a * Matrix{{1.0}}, std::invalid_argument);
}

TEST_CASE("linear solve round-trips and flags singularity") {
    const Matrix a{{2.0, 1.0, 0.0}, {1.0, 3.0, -1.0}, {0.0, -1.0, 4.0}};
    const Vector x_true{1.0, -2.0, 0.5};
    const Vector x = solve(a, a * x_true);
    for (std::size_t i = 0; i < 3; ++i) CHECK(x[i] == Catch::Approx(x_true[i]).margin(1e-12));

    const Matrix singular{{1.0, 2.0}, {2.0, 4.0}};
    CHECK_THROWS_AS(solve(singular, Vector{1.0, 1.0}), std::runtime_error);
}

TEST_CASE("lyapunov solve reproduces the closed-form solution") {
    const Matrix a{{0.0, 1.0}, {-2.0, -3.0}};
    const Matrix p = solve_lyapunov(a, Matrix::identity(2));
    CHECK(p(0, 0) == Catch::Approx(1.25).margin(1e-12));
    CHECK(p(0, 1) == Catch::Approx(0.25).margin(1e-12));
    CHECK(p(1, 0) == Catch::Approx(0.25).margin(1e-12));
    CHECK(p(1, 1) == Catch::Approx(0.25).margin(1e-12));
    CHECK(is_positive_definite(p));
    const Matrix resid = transpose(a) * p + p * a + Matrix::identity(2);
    CHECK(max_abs(resid) <= 1e-10 * 2.0);
}

TEST_CASE("lyapunov solve does not require stability, only a unique solution") {
    // A = I: solution of 2P = -Q is P = -Q/2.
    const Matrix p = solve_lyapunov(Matrix::identity(2), Matrix::identity(2));
    CHECK(p(0, 0) == Catch::Approx(-0.5).margin(1e-12));
    CHECK(p(1, 1) == Catch::Approx(-0.5).margin(1e-12));
    CHECK(p(0, 1) == Catch::Approx(0.0).margin(1e-12));

    // Eigenvalues +-1 are mirrored across the imaginary axis: no unique P.
    const Matrix mirrored{{0.0, 1.0}, {1.0, 0.0}};
    CHECK_THROWS_AS(solve_lyapunov(mirrored, Matrix::identity(2)), std::runtime_error);
}

TEST_CASE("lyapunov solve on seeded stable matrices yields certified PD solutions") {
    SplitMix64 rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + (trial % 3);
        Matrix a(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                a(i, j) = (i == j ? -3.0 : 0.0) + (rng.uniform01() - 0.5);
        const Matrix p = solve_lyapunov(a, Matrix::identity(n));
        CHECK(is_positive_definite(p));
        const Matrix resid = transpose(a) * p + p * a + Matrix::identity(n);
        CHECK(max_abs(resid) <= 1e-10 * 2.0);
    }
}

TEST_CASE("hurwitz test agrees with the Routh-Hurwitz conditions in 2-D") {
    SplitMix64 rng(7);
    int checked = 0;
    for (int trial = 0; trial < 400; ++trial) {
        Matrix a(2, 2);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) a(i, j) = 4.0 * rng.uniform01() - 2.0;
        const double tr = a(0, 0) + a(1, 1);
        const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
        if (std::abs(tr) < 0.05 || std::abs(det) < 0.05) continue;  // margin too thin to trust
        INFO("trial " << trial);
        CHECK(is_hurwitz(a) == routh_hurwitz_2x2(a));
        ++checked;
    }
    CHECK(checked > 300);
}

TEST_CASE("hurwitz test agrees with the Routh-Hurwitz conditions in 3-D") {
    SplitMix64 rng(8);
    int checked = 0;
    for (int trial = 0; trial < 400; ++trial) {
        Matrix a(3, 3);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) a(i, j) = 4.0 * rng.uniform01() - 2.0;
        const Cubic c = char_poly_3x3(a);
        if (std::abs(c.c2) < 0.05 || std::abs(c.c0) < 0.05 ||
            std::abs(c.c2 * c.c1 - c.c0) < 0.05)
            continue;
        INFO("trial " << trial);
        CHECK(is_hurwitz(a) == routh_hurwitz_3x3(a));
        ++checked;
    }
    CHECK(checked > 250);
}

TEST_CASE("minimum symmetric eigenvalue by bisection") {
    Matrix d(3, 3);
    d(0, 0) = 3.0;
    d(1, 1) = -7.0;
    d(2, 2) = 2.0;
    CHECK(min_symmetric_eigenvalue(d) == Catch::Approx(-7.0).margin(1e-9));

    const Matrix s{{2.0, 1.0}, {1.0, 2.0}};
    CHECK(min_symmetric_eigenvalue(s) == Catch::Approx(1.0).margin(1e-9));

    const Matrix flip{{0.0, 1.0}, {1.0, 0.0}};
    CHECK(min_symmetric_eigenvalue(flip) == Catch::Approx(-1.0).margin(1e-9));
}

TEST_CASE("bisection eigenvalue is consistent with definiteness probes") {
    SplitMix64 rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + (trial % 4);
        Matrix s(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                const double v = 4.0 * rng.uniform01() - 2.0;
                s(i, j) = v;
                s(j, i) = v;
            }
        const double lam = min_symmetric_eigenvalue(s);
        Matrix below = s, above = s;
        for (std::size_t i = 0; i < n; ++i) {
            below(i, i) -= lam - 1e-6;
            above(i, i) -= lam + 1e-6;
        }
        INFO("trial " << trial << " lambda " << lam);
        CHECK(is_positive_definite(below));
        CHECK_FALSE(is_positive_definite(above));
    }
}

TEST_CASE("symmetric-only entry points reject asymmetric input") {
    const Matrix a{{1.0, 2.0}, {0.0, 1.0}};
    CHECK_THROWS_AS(is_positive_definite(a), std::invalid_argument);
    CHECK_THROWS_AS(min_symmetric_eigenvalue(a), std::invalid_argument);
}
