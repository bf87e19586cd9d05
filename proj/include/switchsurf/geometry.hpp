#pragma once

// Decrease regions of a quadratic Lyapunov function along the two modes.
//
//   Omega^i       = { x : V'(x) f^i(x) < 0 }
//   Omega^i_alpha = { x : H^i(x) < 0 },   H^i(x) = -alpha|x - x0|^2 + V'(x) f^i(x0)
//
// Completing the square turns H^i into sphere form: { H^i > 0 } is the open
// ball centered at x0 + P f^i(x0)/alpha with radius |P f^i(x0)|/alpha, so
// Omega^i_alpha is the exterior of a ball that touches the switching
// hyperplane exactly at x0. verify_lemmas replays the geometric facts the
// stability argument rests on, by exhaustive deterministic sampling.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "switchsurf/lyapunov.hpp"
#include "switchsurf/model.hpp"
#include "switchsurf/rules.hpp"
#include "switchsurf/sampling.hpp"

namespace switchsurf {

enum class SphereSide { interior, exterior };

struct SphereRegion {
    Vector center;
    double radius = 0.0;
    SphereSide side = SphereSide::exterior;  // which side of the boundary belongs to the region
};

[[nodiscard]] inline bool sphere_contains(const SphereRegion& r, const Vector& x) {
    const double d = norm(x - r.center);
    return r.side == SphereSide::exterior ? d > r.radius : d < r.radius;
}

/// V'(x) f(x) < 0: the mode strictly decreases V at x.
[[nodiscard]] inline bool omega_membership(const QuadraticLyapunov& l, const VectorField& f,
                                           const Vector& x) {
    return dot(gradient(l, x), f.eval(x)) < 0.0;
}

/// H(x) for the alpha-decrease region of a mode with value f_x0 at the
/// center.
[[nodiscard]] inline double omega_alpha_value(const QuadraticLyapunov& l, const Vector& f_x0,
                                              const Vector& x) {
    const Vector d = x - l.x0;
    return -l.alpha * dot(d, d) + dot(gradient(l, x), f_x0);
}

[[nodiscard]] inline bool omega_alpha_membership(const QuadraticLyapunov& l, const Vector& f_x0,
                                                 const Vector& x) {
    return omega_alpha_value(l, f_x0, x) < 0.0;
}

/// Sphere form of { H < 0 }. Requires alpha > 0 and f(x0) != 0 (otherwise
/// the ball collapses to the single point x0).
[[nodiscard]] inline SphereRegion omega_alpha_sphere(const QuadraticLyapunov& l,
                                                     const Vector& f_x0) {
    detail::require(l.alpha > 0.0, "omega_alpha_sphere: alpha must be positive");
    const Vector offset = (1.0 / l.alpha) * (l.P * f_x0);
    const double radius = norm(offset);
    if (radius <= tol::kDegenerate)
        throw std::runtime_error("omega_alpha_sphere: mode vanishes at x0, sphere degenerates");
    return SphereRegion{l.x0 + offset, radius, SphereSide::exterior};
}

/// Angle between two nonzero vectors, accurate near zero.
[[nodiscard]] inline double angle_between(const Vector& a, const Vector& b) {
    const double na = norm(a), nb = norm(b);
    detail::require(na > 0.0 && nb > 0.0, "angle of a zero vector");
    Vector da = (1.0 / na) * a;
    const Vector db = (1.0 / nb) * b;
    da -= db;
    double half = 0.5 * norm(da);
    if (half > 1.0) half = 1.0;
    return 2.0 * std::asin(half);
}

struct LemmaCheck {
    std::string name;
    std::string statement;  // the inclusion actually tested, in plain words
    bool pass = false;
    std::size_t samples_used = 0;
    std::size_t violations = 0;
    std::optional<Vector> witness;  // first violating sample, if any
    double worst = 0.0;             // most adverse margin seen (sign convention per check)
};

struct RegionReport {
    std::size_t total_samples = 0;
    std::uint64_t seed = 0;
    std::vector<LemmaCheck> checks;
    bool all_pass = false;
};

namespace detail {

struct SampledCheckAcc {
    std::size_t used = 0;
    std::size_t violations = 0;
    std::optional<std::pair<std::size_t, Vector>> witness;
    double worst = -1e300;
    bool any_worst = false;

    void note(std::size_t index, const Vector& x, double margin, bool violated) {
        ++used;
        if (!any_worst || margin > worst) {
            worst = margin;
            any_worst = true;
        }
        if (violated) {
            ++violations;
            if (!witness || index < witness->first) witness = {index, x};
        }
    }
    void merge(const SampledCheckAcc& o) {
        used += o.used;
        violations += o.violations;
        if (o.witness && (!witness || o.witness->first < witness->first)) witness = o.witness;
        if (o.any_worst && (!any_worst || o.worst > worst)) {
            worst = o.worst;
            any_worst = true;
        }
    }
};

inline LemmaCheck to_check(std::string name, std::string statement, const SampledCheckAcc& acc) {
    LemmaCheck c;
    c.name = std::move(name);
    c.statement = std::move(statement);
    c.pass = acc.violations == 0;
    c.samples_used = acc.used;
    c.violations = acc.violations;
    if (acc.witness) c.witness = acc.witness->second;
    c.worst = acc.any_worst ? acc.worst : 0.0;
    return c;
}

}  // namespace detail

/// Samples the box (default: x0 +- 5 |P f^-(x0)/alpha| per axis) and verifies
/// the region facts used by the closed-loop descent argument:
///   cover          every sampled x != x0 lies in Omega^- or Omega^+
///   alpha_subset   Omega^i_alpha is contained in Omega^i
///   tangency       both alpha-balls touch the switching plane at x0
///   halfspace      each open side of the plane lies inside the matching
///                  Omega^i_alpha (the direction the descent proof uses)
///   sphere_form    H sign agrees with the sphere-form membership, and H
///                  vanishes on sampled boundary points
/// The rule must carry a hyperplane normal (linear or reduced kind).
[[nodiscard]] inline RegionReport verify_lemmas(const QuadraticLyapunov& l,
                                                const SwitchedSystem& sys,
                                                const SwitchedEquilibrium& eq,
                                                const SwitchingRule& rule,
                                                std::optional<SampleSpec> box = {}) {
    detail::require(l.x0.size() == sys.dim, "Lyapunov dimension mismatch");
    detail::require(static_cast<bool>(rule.normal), "verify_lemmas needs a hyperplane rule");
    detail::require(l.alpha > 0.0, "verify_lemmas needs a positive decay constant");

    const Vector fm0 = sys.minus.eval(eq.x0);
    const Vector fp0 = sys.plus.eval(eq.x0);
    const SphereRegion ball_m = omega_alpha_sphere(l, fm0);
    const SphereRegion ball_p = omega_alpha_sphere(l, fp0);

    if (!box) {
        const double span = 5.0 * norm(ball_m.center - l.x0);
        Vector hw(l.x0.size());
        for (std::size_t i = 0; i < hw.size(); ++i) hw[i] = span;
        box = make_box(l.x0, hw, 10000, 0);
    }

    struct Acc {
        detail::SampledCheckAcc cover, subset, halfspace, sphere_form;
    };
    const Vector n = *rule.normal;
    const double guard = tol::kBoundaryGuard;

    Acc acc = sample_reduce(
        *box, Acc{},
        [&](Acc& a, std::size_t i, const Vector& x) {
            const Vector g = gradient(l, x);
            const double vdot_m = dot(g, sys.minus.eval(x));
            const double vdot_p = dot(g, sys.plus.eval(x));
            const double hm = omega_alpha_value(l, fm0, x);
            const double hp = omega_alpha_value(l, fp0, x);
            const double s = rule.s(x);
            const double dist = norm(x - l.x0);

            // cover: min of the two decay rates must be negative off x0
            if (dist > guard) {
                const double m = std::min(vdot_m, vdot_p);
                a.cover.note(i, x, m, !(m < 0.0) && m > guard);
            }

            // alpha regions sit inside the plain decrease regions
            if (hm < -guard) a.subset.note(i, x, vdot_m, !(vdot_m < 0.0) && vdot_m > guard);
            if (hp < -guard) a.subset.note(i, x, vdot_p, !(vdot_p < 0.0) && vdot_p > guard);

            // each strict side of the plane is inside the matching alpha region
            if (s < -guard) a.halfspace.note(i, x, hm, !(hm < 0.0) && hm > guard);
            if (s > guard) a.halfspace.note(i, x, hp, !(hp < 0.0) && hp > guard);

            // sphere-form membership agrees with the sign of H
            for (int side = 0; side < 2; ++side) {
                const double h = side == 0 ? hm : hp;
                const SphereRegion& ball = side == 0 ? ball_m : ball_p;
                if (std::abs(h) <= guard) continue;
                const bool by_h = h < 0.0;
                a.sphere_form.note(i, x, 0.0, by_h != sphere_contains(ball, x));
            }
        },
        [](Acc& into, Acc&& from) {
            into.cover.merge(from.cover);
            into.subset.merge(from.subset);
            into.halfspace.merge(from.halfspace);
            into.sphere_form.merge(from.sphere_form);
        });

    RegionReport report;
    report.total_samples = box->count;
    report.seed = box->seed;

    report.checks.push_back(detail::to_check(
        "cover", "away from x0 at least one mode strictly decreases V", acc.cover));
    report.checks.push_back(detail::to_check(
        "alpha_subset", "each alpha-decrease region lies inside the plain decrease region",
        acc.subset));

    // tangency: ball centers sit on the normal line through x0, minus ball on
    // the s > 0 side, plus ball on the s < 0 side, both touching at x0
    {
        LemmaCheck c;
        c.name = "tangency";
        c.statement = "both alpha-balls touch the switching plane exactly at x0";
        const double ang_m = angle_between(ball_m.center - l.x0, n);
        const double ang_p = angle_between(ball_p.center - l.x0, -1.0 * n);
        const double touch_m =
            std::abs(norm(l.x0 - ball_m.center) - ball_m.radius) / (1.0 + ball_m.radius);
        const double touch_p =
            std::abs(norm(l.x0 - ball_p.center) - ball_p.radius) / (1.0 + ball_p.radius);
        c.worst = std::max(std::max(ang_m, ang_p), std::max(touch_m, touch_p));
        c.pass = ang_m <= tol::kTangencyAngle && ang_p <= tol::kTangencyAngle &&
                 touch_m <= tol::kSphereResidual && touch_p <= tol::kSphereResidual;
        c.samples_used = 0;
        report.checks.push_back(std::move(c));
    }

    report.checks.push_back(detail::to_check(
        "halfspace", "each open side of the plane lies inside the matching alpha region",
        acc.halfspace));

    // sphere_form: the sampled membership equivalence plus H on sampled
    // boundary points
    {
        detail::SampledCheckAcc boundary = acc.sphere_form;
        SplitMix64 rng(box->seed ^ 0xA5A5A5A5DEADBEEFull);
        const std::size_t ndir = 256;
        for (int side = 0; side < 2; ++side) {
            const SphereRegion& ball = side == 0 ? ball_m : ball_p;
            const Vector& f0 = side == 0 ? fm0 : fp0;
            for (std::size_t k = 0; k < ndir; ++k) {
                Vector u(l.x0.size());
                double nu = 0.0;
                while (nu < 1e-3) {  // rejection keeps the direction well defined
                    for (std::size_t d = 0; d < u.size(); ++d) u[d] = 2.0 * rng.uniform01() - 1.0;
                    nu = norm(u);
                }
                const Vector p = ball.center + (ball.radius / nu) * u;
                const double h = omega_alpha_value(l, f0, p);
                boundary.note(box->count + side * ndir + k, p, std::abs(h),
                              std::abs(h) > tol::kSphereResidual);
            }
        }
        report.checks.push_back(detail::to_check(
            "sphere_form", "H changes sign exactly on the sphere boundary", boundary));
    }

    report.all_pass = true;
    for (const auto& c : report.checks) report.all_pass = report.all_pass && c.pass;
    return report;
}

}  // namespace switchsurf
