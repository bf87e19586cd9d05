#pragma once

// Vector fields and two-mode switched systems
//
//     x' = f^sigma(x),  sigma in {-1, +1}.
//
// A switched equilibrium is a point x0 together with a weight lam0 in [0, 1]
// such that lam0 f^-(x0) + (1 - lam0) f^+(x0) = 0; neither mode needs to
// vanish there on its own. Throughout the library lam weights the "-" mode.

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>

#include "switchsurf/linalg.hpp"
#include "switchsurf/tolerances.hpp"

namespace switchsurf {

struct AffinePart {
    Matrix A;
    Vector b;
};

struct VectorField {
    std::size_t dim = 0;
    std::function<Vector(const Vector&)> eval;
    std::function<Matrix(const Vector&)> jacobian;  // analytic, or the central-difference fallback
    std::optional<AffinePart> affine;               // set when the field is exactly A x + b
};

/// Central-difference Jacobian with per-coordinate step h_i scaled by |x_i|.
[[nodiscard]] inline Matrix finite_difference_jacobian(
    const std::function<Vector(const Vector&)>& f, const Vector& x) {
    const std::size_t n = x.size();
    Matrix j(f(x).size(), n);
    Vector xp = x, xm = x;
    for (std::size_t c = 0; c < n; ++c) {
        const double h = tol::kFiniteDiff * (1.0 + std::abs(x[c]));
        xp[c] = x[c] + h;
        xm[c] = x[c] - h;
        const Vector fp = f(xp), fm = f(xm);
        for (std::size_t r = 0; r < j.rows(); ++r) j(r, c) = (fp[r] - fm[r]) / (2.0 * h);
        xp[c] = x[c];
        xm[c] = x[c];
    }
    return j;
}

[[nodiscard]] inline VectorField affine_field(Matrix a, Vector b) {
    detail::require(a.square() && a.rows() == b.size(), "affine field shape mismatch");
    VectorField f;
    f.dim = b.size();
    f.eval = [a, b](const Vector& x) { return a * x + b; };
    f.jacobian = [a](const Vector&) { return a; };
    f.affine = AffinePart{std::move(a), std::move(b)};
    return f;
}

[[nodiscard]] inline VectorField make_field(std::size_t dim,
                                            std::function<Vector(const Vector&)> eval) {
    detail::require(dim > 0 && static_cast<bool>(eval), "empty vector field");
    VectorField f;
    f.dim = dim;
    f.eval = eval;
    f.jacobian = [eval](const Vector& x) { return finite_difference_jacobian(eval, x); };
    return f;
}

[[nodiscard]] inline VectorField make_field(std::size_t dim,
                                            std::function<Vector(const Vector&)> eval,
                                            std::function<Matrix(const Vector&)> jacobian) {
    VectorField f = make_field(dim, std::move(eval));
    f.jacobian = std::move(jacobian);
    return f;
}

struct SwitchedSystem {
    VectorField minus;
    VectorField plus;
    std::size_t dim = 0;
};

[[nodiscard]] inline SwitchedSystem make_switched(VectorField minus, VectorField plus) {
    detail::require(minus.dim == plus.dim && minus.dim > 0, "mode dimension mismatch");
    const std::size_t d = minus.dim;
    return SwitchedSystem{std::move(minus), std::move(plus), d};
}

/// lam f^-(x) + (1-lam) f^+(x) as a field of its own; affine data is
/// combined when both modes are affine.
[[nodiscard]] inline VectorField convex_combination(const SwitchedSystem& sys, double lam) {
    detail::require(lam >= 0.0 && lam <= 1.0, "combination weight outside [0,1]");
    VectorField f;
    f.dim = sys.dim;
    const VectorField& m = sys.minus;
    const VectorField& p = sys.plus;
    f.eval = [m, p, lam](const Vector& x) { return lam * m.eval(x) + (1.0 - lam) * p.eval(x); };
    f.jacobian = [m, p, lam](const Vector& x) {
        Matrix j = m.jacobian(x);
        j *= lam;
        Matrix jp = p.jacobian(x);
        jp *= (1.0 - lam);
        return j += jp;
    };
    if (m.affine && p.affine) {
        Matrix a = m.affine->A;
        a *= lam;
        Matrix ap = p.affine->A;
        ap *= (1.0 - lam);
        a += ap;
        f.affine = AffinePart{std::move(a), lam * m.affine->b + (1.0 - lam) * p.affine->b};
    }
    return f;
}

struct SwitchedEquilibrium {
    Vector x0;
    double lambda0 = 0.5;
    // Set when f^- and f^+ coincide at x0, which leaves the weight
    // unconstrained; lambda0 then just echoes the caller's (clamped) guess.
    bool lambda_indeterminate = false;
};

[[nodiscard]] inline Vector equilibrium_gap(const SwitchedSystem& sys, const Vector& x,
                                            double lam) {
    return lam * sys.minus.eval(x) + (1.0 - lam) * sys.plus.eval(x);
}

/// Relative residual certificate:
///   |lam f^-(x0) + (1-lam) f^+(x0)|  <=  tol (1 + |f^-(x0)| + |f^+(x0)|).
[[nodiscard]] inline bool equilibrium_certified(const SwitchedSystem& sys,
                                                const SwitchedEquilibrium& eq) {
    const double scale = 1.0 + norm(sys.minus.eval(eq.x0)) + norm(sys.plus.eval(eq.x0));
    return norm(equilibrium_gap(sys, eq.x0, eq.lambda0)) <= tol::kEquilibriumResidual * scale;
}

/// Damped Newton on the unknowns (free coordinates of x, lam) with one
/// coordinate of x pinned to its guessed value; that pin is the caller's
/// scalar constraint selecting one point from the one-parameter equilibrium
/// family. Throws std::runtime_error on non-convergence or when the
/// stationary point has lam outside [0, 1].
[[nodiscard]] inline SwitchedEquilibrium find_switched_equilibrium(const SwitchedSystem& sys,
                                                                   const Vector& guess_x,
                                                                   double guess_lambda,
                                                                   std::size_t pin_index) {
    const std::size_t n = sys.dim;
    detail::require(guess_x.size() == n, "guess dimension mismatch");
    detail::require(pin_index < n, "pin index out of range");

    Vector x = guess_x;
    double lam = guess_lambda;

    auto degenerate_here = [&](const Vector& at) {
        const Vector diff = sys.minus.eval(at) - sys.plus.eval(at);
        return norm(diff) <= tol::kDegenerate * (1.0 + norm(sys.minus.eval(at)));
    };

    // Columns of the square Newton system: free coordinates of x (all but
    // pin_index), then lam.
    std::vector<std::size_t> free_ix;
    for (std::size_t i = 0; i < n; ++i)
        if (i != pin_index) free_ix.push_back(i);

    bool converged = false;
    for (int iter = 0; iter < tol::kNewtonMaxIter; ++iter) {
        const Vector r = equilibrium_gap(sys, x, lam);
        const Matrix jm = sys.minus.jacobian(x);
        const Matrix jp = sys.plus.jacobian(x);
        const Vector fdiff = sys.minus.eval(x) - sys.plus.eval(x);

        Matrix jac(n, n);
        for (std::size_t c = 0; c < free_ix.size(); ++c)
            for (std::size_t rr = 0; rr < n; ++rr)
                jac(rr, c) = lam * jm(rr, free_ix[c]) + (1.0 - lam) * jp(rr, free_ix[c]);
        for (std::size_t rr = 0; rr < n; ++rr) jac(rr, n - 1) = fdiff[rr];

        Vector step(n);
        bool lam_frozen = false;
        auto f = detail::lu_factor(jac);
        if (!f.singular) {
            step = detail::lu_solve(f, -1.0 * r);
        } else {
            // Singular typically means f^- ~ f^+ so the lam column vanishes.
            // Fall back to Gauss-Newton in the free x coordinates with lam
            // held fixed.
            lam_frozen = true;
            const std::size_t m = free_ix.size();
            Matrix jtj(m, m);
            Vector jtr(m);
            for (std::size_t a = 0; a < m; ++a) {
                for (std::size_t b = 0; b < m; ++b) {
                    double s = 0.0;
                    for (std::size_t rr = 0; rr < n; ++rr) s += jac(rr, a) * jac(rr, b);
                    jtj(a, b) = s;
                }
                double s = 0.0;
                for (std::size_t rr = 0; rr < n; ++rr) s += jac(rr, a) * r[rr];
                jtr[a] = -s;
            }
            auto f2 = detail::lu_factor(jtj);
            if (f2.singular) throw std::runtime_error("no convergence: singular Newton system");
            const Vector sub = detail::lu_solve(f2, jtr);
            for (std::size_t a = 0; a < m; ++a) step[a] = sub[a];
            step[n - 1] = 0.0;
        }

        if (norm(step) < tol::kNewtonStep) {
            converged = true;
            break;
        }

        // Step halving until the residual norm decreases.
        const double r0 = norm(r);
        double scale = 1.0;
        Vector x_try = x;
        double lam_try = lam;
        for (int h = 0; h <= tol::kNewtonMaxHalvings; ++h) {
            x_try = x;
            lam_try = lam;
            for (std::size_t c = 0; c < free_ix.size(); ++c) x_try[free_ix[c]] += scale * step[c];
            if (!lam_frozen) lam_try += scale * step[n - 1];
            if (norm(equilibrium_gap(sys, x_try, lam_try)) < r0) break;
            scale *= 0.5;
        }
        x = x_try;
        lam = lam_try;
    }
    if (!converged) throw std::runtime_error("no convergence to a switched equilibrium");

    SwitchedEquilibrium eq;
    eq.x0 = x;
    eq.lambda0 = lam;
    if (degenerate_here(x)) {
        eq.lambda_indeterminate = true;
        eq.lambda0 = std::min(1.0, std::max(0.0, guess_lambda));
    } else if (lam < 0.0 || lam > 1.0) {
        throw std::runtime_error("stationary point is not a switched equilibrium (weight outside [0,1])");
    }
    if (!equilibrium_certified(sys, eq))
        throw std::runtime_error("no convergence to a switched equilibrium");
    return eq;
}

}  // namespace switchsurf
