#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>

#include "switchsurf/lyapunov.hpp"
#include "switchsurf/model.hpp"
#include "switchsurf/rules.hpp"
#include "switchsurf/sampling.hpp"

using namespace switchsurf;

namespace {

// Builds an affine two-mode system with a prescribed switched equilibrium:
// given x0, lambda0 and the value v = f^-(x0), the plus mode is offset so
// that lambda0 v + (1 - lambda0) f^+(x0) = 0.
struct Instance {
    SwitchedSystem sys;
    SwitchedEquilibrium eq;
    QuadraticLyapunov l;
};

Instance prescribed_instance() {
    const Matrix am{{-1.0, 0.5}, {0.0, -2.0}};
    const Matrix ap{{-2.0, 0.0}, {0.5, -1.0}};
    const Vector x0{0.5, -0.5};
    const double lam0 = 0.4;
    const Vector v{1.0, -0.5};  // f^-(x0)
    const Vector v_plus = (-lam0 / (1.0 - lam0)) * v;

    Instance inst;
    inst.sys = make_switched(affine_field(am, v - am * x0), affine_field(ap, v_plus - ap * x0));
    inst.eq.x0 = x0;
    inst.eq.lambda0 = lam0;
    inst.l.P = Matrix{{1.0, 0.25}, {0.25, 0.5}};
    inst.l.x0 = x0;
    const CqlfCertificate cert = verify_cqlf(inst.sys, inst.eq, inst.l.P);
    inst.l.alpha = cert.alpha;
    inst.l.alpha_certified = cert.certified;
    return inst;
}

Vector fd_gradient(const SwitchingRule& rule, const Vector& x) {
    Vector g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = 1e-6 * (1.0 + std::abs(x[i]));
        Vector xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (rule.s(xp) - rule.s(xm)) / (2.0 * h);
    }
    return g;
}

}  // namespace

TEST_CASE("the prescribed instance is a certified switched equilibrium") {
    const Instance inst = prescribed_instance();
    CHECK(equilibrium_certified(inst.sys, inst.eq));
    CHECK(inst.l.alpha > 0.0);
    CHECK(inst.l.alpha_certified);
}

TEST_CASE("quadratic rule evaluates the certificate derivative difference") {
    const Instance inst = prescribed_instance();
    const SwitchingRule rule = quadratic_rule(inst.l, inst.sys);
    CHECK(rule.kind == RuleKind::quadratic);
    CHECK_FALSE(rule.normal.has_value());
    CHECK_FALSE(rule.closed_form.empty());

    SplitMix64 rng(3);
    for (int i = 0; i < 50; ++i) {
        const Vector x{4.0 * rng.uniform01() - 2.0, 4.0 * rng.uniform01() - 2.0};
        const double direct =
            dot(gradient(inst.l, x), inst.sys.minus.eval(x) - inst.sys.plus.eval(x));
        CHECK(rule.s(x) == Catch::Approx(direct).margin(1e-12));
        const Vector g = rule.s_gradient(x);
        const Vector gfd = fd_gradient(rule, x);
        CHECK(norm(g - gfd) < 1e-6 * (1.0 + norm(g)));
    }
    // The rule vanishes at the equilibrium: both derivative values coincide
    // there, so the difference is zero.
    CHECK(std::abs(rule.s(inst.eq.x0)) < 1e-12);
}

TEST_CASE("swapping the modes flips the quadratic rule sign") {
    const Instance inst = prescribed_instance();
    const SwitchingRule rule = quadratic_rule(inst.l, inst.sys);
    const SwitchedSystem swapped = make_switched(inst.sys.plus, inst.sys.minus);
    const SwitchingRule rule_swapped = quadratic_rule(inst.l, swapped);
    SplitMix64 rng(4);
    for (int i = 0; i < 50; ++i) {
        const Vector x{4.0 * rng.uniform01() - 2.0, 4.0 * rng.uniform01() - 2.0};
        CHECK(rule_swapped.s(x) == Catch::Approx(-rule.s(x)).margin(1e-12));
    }
}

TEST_CASE("linear rule is the tangent hyperplane form") {
    const Instance inst = prescribed_instance();
    const SwitchingRule rule = linear_rule(inst.l, inst.sys, inst.eq);
    REQUIRE(rule.normal.has_value());
    REQUIRE(rule.difference_normal.has_value());
    CHECK(rule.kind == RuleKind::linear);
    CHECK_FALSE(rule.closed_form.empty());

    const Vector n_expected = 2.0 * (inst.l.P * inst.sys.minus.eval(inst.eq.x0));
    CHECK(norm(*rule.normal - n_expected) < 1e-12);

    // s is the plain inner product with x - x0 and its gradient is constant.
    const Vector x{1.3, 0.7};
    CHECK(rule.s(x) == Catch::Approx(dot(x - inst.eq.x0, n_expected)).margin(1e-12));
    CHECK(norm(rule.s_gradient(x) - n_expected) < 1e-12);
    CHECK(std::abs(rule.s(inst.eq.x0)) == 0.0);

    // At a switched equilibrium f^- - f^+ = f^-(x0) / (1 - lambda0), so the
    // difference-form normal is a positive multiple of the rule normal.
    const Vector d = *rule.difference_normal;
    CHECK(dot(d, *rule.normal) > 0.0);
    const double cross = d[0] * n_expected[1] - d[1] * n_expected[0];
    CHECK(std::abs(cross) < 1e-12 * norm(d) * norm(n_expected));
    const double expected_scale = 1.0 / (1.0 - inst.eq.lambda0);
    CHECK(norm(d) == Catch::Approx(expected_scale * norm(n_expected)).epsilon(1e-10));
}

TEST_CASE("linear rule refuses a self-equilibrium of the minus mode") {
    // f^-(x0) = 0 makes the plane normal vanish.
    const Matrix a{{-1.0, 0.0}, {0.0, -1.0}};
    const SwitchedSystem sys = make_switched(affine_field(a, Vector{0.0, 0.0}),
                                             affine_field(a, Vector{1.0, 0.0}));
    SwitchedEquilibrium eq;
    eq.x0 = Vector{0.0, 0.0};
    eq.lambda0 = 1.0;
    QuadraticLyapunov l;
    l.P = Matrix::identity(2);
    l.x0 = eq.x0;
    CHECK_THROWS_AS(linear_rule(l, sys, eq), std::runtime_error);
}

TEST_CASE("reduced rule uses the offset difference and rejects equal offsets") {
    QuadraticLyapunov l;
    l.P = Matrix{{2.0, 0.0}, {0.0, 1.0}};
    l.x0 = Vector{0.0, 0.0};
    const SwitchingRule rule = reduced_rule(l, Vector{1.0, 0.0}, Vector{-1.0, 1.0});
    REQUIRE(rule.normal.has_value());
    CHECK((*rule.normal)[0] == Catch::Approx(8.0));   // 2 P (b^- - b^+), first entry 2*2*2
    CHECK((*rule.normal)[1] == Catch::Approx(-2.0));  // second entry 2*1*(-1)
    CHECK_THROWS_AS(reduced_rule(l, Vector{1.0, 1.0}, Vector{1.0, 1.0}), std::runtime_error);
}

TEST_CASE("modes sharing A make the quadratic and reduced rules agree everywhere") {
    const Matrix a{{-1.0, 0.3}, {-0.2, -1.5}};
    const Vector bm{1.0, 0.5};
    const Vector bp{-0.5, 1.5};
    const SwitchedSystem sys = make_switched(affine_field(a, bm), affine_field(a, bp));
    QuadraticLyapunov l;
    l.P = Matrix{{1.0, 0.2}, {0.2, 0.8}};
    l.x0 = Vector{0.3, -0.4};

    const SwitchingRule quad = quadratic_rule(l, sys);
    const SwitchingRule red = reduced_rule(l, bm, bp);

    const SampleSpec box = make_box(l.x0, Vector{3.0, 3.0}, 1000, 11);
    std::size_t compared = 0;
    for (std::size_t i = 0; i < box.count; ++i) {
        const Vector x = sample_point(box, i);
        const double sq = quad.s(x);
        const double sr = red.s(x);
        CHECK(sq == Catch::Approx(sr).margin(1e-10));
        if (std::abs(sq) <= 1e-12 || std::abs(sr) <= 1e-12) continue;  // on-surface guard
        ++compared;
        REQUIRE((sq > 0.0) == (sr > 0.0));
    }
    CHECK(compared >= 990);
}

TEST_CASE("scaling P leaves every rule sign unchanged") {
    const Instance inst = prescribed_instance();
    QuadraticLyapunov scaled = inst.l;
    scaled.P = 7.5 * inst.l.P;
    scaled.alpha *= 7.5;

    const SwitchingRule q1 = quadratic_rule(inst.l, inst.sys);
    const SwitchingRule q2 = quadratic_rule(scaled, inst.sys);
    const SwitchingRule l1 = linear_rule(inst.l, inst.sys, inst.eq);
    const SwitchingRule l2 = linear_rule(scaled, inst.sys, inst.eq);

    SplitMix64 rng(12);
    for (int i = 0; i < 200; ++i) {
        const Vector x{6.0 * rng.uniform01() - 3.0, 6.0 * rng.uniform01() - 3.0};
        CHECK(rule_sign(q1, x) == rule_sign(q2, x));
        CHECK(rule_sign(l1, x) == rule_sign(l2, x));
        CHECK(q2.s(x) == Catch::Approx(7.5 * q1.s(x)).margin(1e-10));
    }
}

TEST_CASE("rule_sign reports the surface itself as unassigned") {
    const Instance inst = prescribed_instance();
    const SwitchingRule rule = linear_rule(inst.l, inst.sys, inst.eq);
    CHECK(rule_sign(rule, inst.eq.x0) == 0);
    const Vector off = inst.eq.x0 + Vector{1.0, 0.0};
    CHECK((rule_sign(rule, off) == 1 || rule_sign(rule, off) == -1));
}

TEST_CASE("nonlinear modes get a finite-difference rule gradient") {
    const SwitchedSystem sys = make_switched(
        make_field(2,
                   [](const Vector& x) {
                       return Vector{-x[0] + std::sin(x[1]), -x[1]};
                   }),
        make_field(2, [](const Vector& x) { return Vector{-x[0], -x[1] + 1.0}; }));
    QuadraticLyapunov l;
    l.P = Matrix::identity(2);
    l.x0 = Vector{0.2, 0.1};
    const SwitchingRule rule = quadratic_rule(l, sys);
    CHECK(rule.closed_form.empty());
    const Vector x{0.7, -0.3};
    const Vector g = rule.s_gradient(x);
    const Vector gfd = fd_gradient(rule, x);
    CHECK(norm(g - gfd) < 1e-5 * (1.0 + norm(g)));
}
