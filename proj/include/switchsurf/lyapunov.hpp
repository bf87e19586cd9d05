#pragma once

// Common quadratic Lyapunov functions V(x) = (x - x0)^T P (x - x0) for
// two-mode switched systems, with a decay certificate alpha > 0 such that
//
//     V'(x) (f^i(x) - f^i(x0)) <= -alpha |x - x0|^2   for i in {-, +}.
//
// For affine modes the certificate is exact (smallest eigenvalues of the
// negated symmetric products); otherwise it is estimated on a sampled box
// and flagged as such.

#include <algorithm>
#include <optional>
#include <stdexcept>

#include "switchsurf/linalg.hpp"
#include "switchsurf/model.hpp"
#include "switchsurf/sampling.hpp"
#include "switchsurf/tolerances.hpp"

namespace switchsurf {

struct QuadraticLyapunov {
    Matrix P;         // symmetric positive definite
    Vector x0;        // center (the switched equilibrium)
    double alpha = 0.0;
    bool alpha_certified = false;  // true: exact affine path; false: sampled estimate
};

[[nodiscard]] inline double value(const QuadraticLyapunov& l, const Vector& x) {
    const Vector d = x - l.x0;
    return dot(d, l.P * d);
}

[[nodiscard]] inline Vector gradient(const QuadraticLyapunov& l, const Vector& x) {
    return 2.0 * (l.P * (x - l.x0));
}

struct CqlfCertificate {
    double alpha = 0.0;   // decay constant; the pair (P, sys) qualifies iff alpha > 0
    bool certified = false;
};

/// Checks whether P is a common quadratic Lyapunov function for both modes
/// about eq.x0 and returns the decay constant. Affine modes get the exact
/// eigenvalue answer; nonlinear modes are sampled over `domain` (required in
/// that case). P that is not positive definite is a contract violation.
[[nodiscard]] inline CqlfCertificate verify_cqlf(const SwitchedSystem& sys,
                                                 const SwitchedEquilibrium& eq, const Matrix& p,
                                                 const std::optional<SampleSpec>& domain = {}) {
    detail::require(p.square() && p.rows() == sys.dim, "P shape mismatch");
    detail::require(eq.x0.size() == sys.dim, "equilibrium dimension mismatch");
    if (!is_positive_definite(p))
        throw std::invalid_argument("verify_cqlf: P must be positive definite");

    if (sys.minus.affine && sys.plus.affine) {
        double alpha = 0.0;
        bool first = true;
        for (const Matrix* a : {&sys.minus.affine->A, &sys.plus.affine->A}) {
            const Matrix s = transpose(*a) * p + p * (*a);
            const double lam = min_symmetric_eigenvalue(-1.0 * s);
            if (first || lam < alpha) alpha = lam;
            first = false;
        }
        return CqlfCertificate{alpha, true};
    }

    if (!domain) throw std::invalid_argument("verify_cqlf: sampling domain required for nonlinear modes");
    detail::require(domain->center.size() == sys.dim, "sampling domain dimension mismatch");

    const Vector fm0 = sys.minus.eval(eq.x0);
    const Vector fp0 = sys.plus.eval(eq.x0);
    struct Acc {
        double alpha = 0.0;
        bool any = false;
    };
    Acc acc = sample_reduce(
        *domain, Acc{},
        [&](Acc& a, std::size_t, const Vector& x) {
            const Vector d = x - eq.x0;
            const double dd = dot(d, d);
            if (dd <= tol::kBoundaryGuard) return;
            const Vector g = 2.0 * (p * d);
            for (int side = 0; side < 2; ++side) {
                const Vector& f0 = side == 0 ? fm0 : fp0;
                const Vector fx = side == 0 ? sys.minus.eval(x) : sys.plus.eval(x);
                const double ratio = -dot(g, fx - f0) / dd;
                if (!a.any || ratio < a.alpha) a.alpha = ratio;
                a.any = true;
            }
        },
        [](Acc& into, Acc&& from) {
            if (from.any && (!into.any || from.alpha < into.alpha)) into.alpha = from.alpha;
            into.any = into.any || from.any;
        });
    if (!acc.any) throw std::invalid_argument("verify_cqlf: empty sampling domain");
    return CqlfCertificate{acc.alpha, false};
}

/// Tries three closed-form candidates in order and returns the first that
/// verifies with alpha > 0:
///   (a) the Lyapunov solution for the lam0-averaged Jacobian at x0,
///   (b) P = I/2 (adequate whenever both symmetrized Jacobians are negative),
///   (c) the average of the per-mode Lyapunov solutions.
/// Returns nullopt when none qualifies; that is a statement about these
/// heuristics, not a proof that no common P exists.
[[nodiscard]] inline std::optional<QuadraticLyapunov> synthesize_cqlf(
    const SwitchedSystem& sys, const SwitchedEquilibrium& eq,
    const std::optional<SampleSpec>& domain = {}) {
    const bool affine = sys.minus.affine && sys.plus.affine;
    if (!affine && !domain)
        throw std::invalid_argument("synthesize_cqlf: sampling domain required for nonlinear modes");

    const std::size_t n = sys.dim;
    std::vector<Matrix> candidates;

    try {
        const Matrix j = convex_combination(sys, eq.lambda0).jacobian(eq.x0);
        candidates.push_back(solve_lyapunov(j, Matrix::identity(n)));
    } catch (const std::runtime_error&) {
    }

    Matrix half = Matrix::identity(n);
    half *= 0.5;
    candidates.push_back(half);

    try {
        const Matrix pm = solve_lyapunov(sys.minus.jacobian(eq.x0), Matrix::identity(n));
        const Matrix pp = solve_lyapunov(sys.plus.jacobian(eq.x0), Matrix::identity(n));
        candidates.push_back(0.5 * (pm + pp));
    } catch (const std::runtime_error&) {
    }

    for (const Matrix& p : candidates) {
        if (!is_positive_definite(p)) continue;
        const CqlfCertificate cert = verify_cqlf(sys, eq, p, domain);
        if (cert.alpha > 0.0)
            return QuadraticLyapunov{p, eq.x0, cert.alpha, cert.certified};
    }
    return std::nullopt;
}

/// Sampled contraction test: lam_max(J(x) + J(x)^T) <= -margin at every
/// sampled point. A true return is evidence from the sampled box only, not
/// a global certificate.
[[nodiscard]] inline bool demidovich_check(const VectorField& f, const SampleSpec& domain) {
    detail::require(domain.center.size() == f.dim, "sampling domain dimension mismatch");
    struct Acc {
        bool ok = true;
    };
    const Acc acc = sample_reduce(
        domain, Acc{},
        [&](Acc& a, std::size_t, const Vector& x) {
            if (!a.ok) return;
            const Matrix j = f.jacobian(x);
            const Matrix s = j + transpose(j);
            const double lam_max = -min_symmetric_eigenvalue(-1.0 * s);
            if (!(lam_max <= -tol::kDemidovichMargin)) a.ok = false;
        },
        [](Acc& into, Acc&& from) { into.ok = into.ok && from.ok; });
    return acc.ok;
}

}  // namespace switchsurf
