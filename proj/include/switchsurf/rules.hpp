#pragma once

// Switching rules: scalar surface functions s(x) whose sign selects the
// active mode. sign(s) = +1 runs the "+" field, sign(s) = -1 the "-" field;
// s(x) = 0 is the switching surface itself and is never assigned a mode
// here; the sliding machinery owns that set.
//
// Three constructions share the interface:
//   quadratic: s(x) = V'(x) f^-(x) - V'(x) f^+(x)   (argmin of the two decay rates)
//   linear:    s(x) = <x - x0, 2 P f^-(x0)>          (tangent hyperplane rule)
//   reduced:   s(x) = <x - x0, 2 P (b^- - b^+)>      (affine modes sharing A)

#include <cstdio>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "switchsurf/linalg.hpp"
#include "switchsurf/lyapunov.hpp"
#include "switchsurf/model.hpp"

namespace switchsurf {

enum class RuleKind { quadratic, linear, reduced };

struct SwitchingRule {
    RuleKind kind = RuleKind::linear;
    Vector x0;
    std::function<double(const Vector&)> s;
    std::function<Vector(const Vector&)> s_gradient;
    // Hyperplane normal for the linear and reduced kinds.
    std::optional<Vector> normal;
    // Diagnostic for the linear kind: the equivalent difference-form normal
    // 2 P (f^-(x0) - f^+(x0)), a positive multiple of `normal`.
    std::optional<Vector> difference_normal;
    // Human-readable s(x) when the system data permits one.
    std::string closed_form;
};

/// -1, 0 or +1; 0 exactly on the surface.
[[nodiscard]] inline int rule_sign(const SwitchingRule& rule, const Vector& x) {
    const double v = rule.s(x);
    return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
}

namespace detail {

inline std::string fmt_coeff(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string linear_form_string(const Vector& n, const Vector& x0) {
    // <x - x0, n> written out as c.x + d.
    std::string out = "s(x) =";
    double constant = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        out += (i == 0 ? " " : " + ") + fmt_coeff(n[i]) + "*x" + std::to_string(i + 1);
        constant -= n[i] * x0[i];
    }
    out += " + " + fmt_coeff(constant);
    return out;
}

inline std::string quadratic_form_string(const Matrix& q, const Vector& c, double d) {
    std::string out = "s(x) =";
    bool first = true;
    auto emit = [&](const std::string& term) {
        out += (first ? " " : " + ") + term;
        first = false;
    };
    for (std::size_t i = 0; i < q.rows(); ++i)
        for (std::size_t j = i; j < q.cols(); ++j) {
            const double v = i == j ? q(i, i) : q(i, j) + q(j, i);
            if (v == 0.0) continue;
            emit(fmt_coeff(v) + "*x" + std::to_string(i + 1) + "*x" + std::to_string(j + 1));
        }
    for (std::size_t i = 0; i < c.size(); ++i)
        if (c[i] != 0.0) emit(fmt_coeff(c[i]) + "*x" + std::to_string(i + 1));
    emit(fmt_coeff(d));
    return out;
}

}  // namespace detail

/// Picks the mode with the smaller instantaneous V-decay:
/// s(x) = V'(x) (f^-(x) - f^+(x)). The gradient is closed-form for affine
/// modes and a central difference otherwise.
[[nodiscard]] inline SwitchingRule quadratic_rule(const QuadraticLyapunov& l,
                                                  const SwitchedSystem& sys) {
    detail::require(l.x0.size() == sys.dim, "rule/Lyapunov dimension mismatch");
    SwitchingRule rule;
    rule.kind = RuleKind::quadratic;
    rule.x0 = l.x0;
    const VectorField fm = sys.minus, fp = sys.plus;
    rule.s = [l, fm, fp](const Vector& x) {
        return dot(gradient(l, x), fm.eval(x) - fp.eval(x));
    };
    if (fm.affine && fp.affine) {
        const Matrix m = fm.affine->A - fp.affine->A;
        const Vector d0 = fm.affine->b - fp.affine->b;
        const Matrix p = l.P;
        const Vector x0 = l.x0;
        rule.s_gradient = [p, m, d0, x0](const Vector& x) {
            return 2.0 * (p * (m * x + d0)) + transpose(m) * (2.0 * (p * (x - x0)));
        };
        // s = x^T (PM + (PM)^T) x + (2P d0 - 2 M^T P x0)^T x - 2 x0^T P d0
        const Matrix pm = p * m;
        const Matrix q = pm + transpose(pm);
        const Vector c = 2.0 * (p * d0) - transpose(m) * (2.0 * (p * x0));
        const double dconst = -2.0 * dot(x0, p * d0);
        rule.closed_form = detail::quadratic_form_string(q, c, dconst);
    } else {
        auto s = rule.s;
        const std::size_t dim = sys.dim;
        rule.s_gradient = [s, dim](const Vector& x) {
            const auto wrap = [s](const Vector& y) { return Vector{s(y)}; };
            const Matrix j = finite_difference_jacobian(wrap, x);
            Vector g(dim);
            for (std::size_t i = 0; i < dim; ++i) g[i] = j(0, i);
            return g;
        };
    }
    return rule;
}

/// Tangent-hyperplane rule through x0 with normal 2 P f^-(x0). Requires x0
/// not to be an equilibrium of the "-" mode on its own, otherwise the normal
/// degenerates.
[[nodiscard]] inline SwitchingRule linear_rule(const QuadraticLyapunov& l,
                                               const SwitchedSystem& sys,
                                               const SwitchedEquilibrium& eq) {
    detail::require(l.x0.size() == sys.dim && eq.x0.size() == sys.dim,
                    "rule/Lyapunov dimension mismatch");
    const Vector fm0 = sys.minus.eval(eq.x0);
    if (norm(fm0) <= tol::kDegenerate)
        throw std::runtime_error(
            "linear rule degenerate: x0 is an equilibrium of the minus mode by itself");
    const Vector n = 2.0 * (l.P * fm0);
    const Vector fp0 = sys.plus.eval(eq.x0);

    SwitchingRule rule;
    rule.kind = RuleKind::linear;
    rule.x0 = eq.x0;
    const Vector x0 = eq.x0;
    rule.s = [x0, n](const Vector& x) { return dot(x - x0, n); };
    rule.s_gradient = [n](const Vector&) { return n; };
    rule.normal = n;
    rule.difference_normal = 2.0 * (l.P * (fm0 - fp0));
    rule.closed_form = detail::linear_form_string(n, x0);
    return rule;
}

/// Hyperplane rule for two affine modes sharing the same A: the normal only
/// needs the offset difference b^- - b^+.
[[nodiscard]] inline SwitchingRule reduced_rule(const QuadraticLyapunov& l, const Vector& b_minus,
                                                const Vector& b_plus) {
    detail::require(b_minus.size() == l.x0.size() && b_plus.size() == l.x0.size(),
                    "rule/Lyapunov dimension mismatch");
    const Vector d0 = b_minus - b_plus;
    if (norm(d0) <= tol::kDegenerate)
        throw std::runtime_error("reduced rule degenerate: modes share the same offset");
    const Vector n = 2.0 * (l.P * d0);

    SwitchingRule rule;
    rule.kind = RuleKind::reduced;
    rule.x0 = l.x0;
    const Vector x0 = l.x0;
    rule.s = [x0, n](const Vector& x) { return dot(x - x0, n); };
    rule.s_gradient = [n](const Vector&) { return n; };
    rule.normal = n;
    rule.closed_form = detail::linear_form_string(n, x0);
    return rule;
}

}  // namespace switchsurf
