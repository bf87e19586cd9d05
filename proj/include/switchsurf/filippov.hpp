#pragma once

// Fixed-step RK4 integration of a two-mode switched system under a
// switching rule, with event localization and Filippov sliding.
//
// Away from the surface the active field is the one selected by sign(s).
// When a step straddles the surface the crossing is localized by bisection
// on the step fraction. At the surface the normal components of the two
// fields decide between a transversal crossing and attractive sliding; while
// sliding, the state advances along the equivalent-control convex
// combination, which is tangent to the surface by construction, and is
// projected back whenever |s| drifts beyond half the event tolerance.
// An optional hysteresis band replaces sliding by relay switching, which
// reproduces chattering instead.

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "switchsurf/lyapunov.hpp"
#include "switchsurf/model.hpp"
#include "switchsurf/rules.hpp"
#include "switchsurf/tolerances.hpp"

namespace switchsurf {

struct SimOptions {
    double step = 1e-2;
    double t_max = 5000.0;
    double event_tol = 1e-10;   // |s| target for crossing localization
    double slide_tol = 1e-8;    // certified bound on |<grad s, f_slide>| while sliding
    double hysteresis = 0.0;    // > 0 switches by relay band instead of sliding
    double stop_radius = -1.0;  // negative: 1e-3 (1 + |x0|); zero disables early stop
    std::size_t record_stride = 1;  // keep every k-th sample (events and endpoints always kept)
};

enum class SimStatus { reached_stop, reached_t_max, diverged };

enum class EventKind { crossing, slide_start, slide_end, stop, divergence };

struct TrajectorySample {
    double t = 0.0;
    Vector x;
    int mode = 0;  // -1 / +1 active field, 0 sliding
    double V = 0.0;
    double s = 0.0;
};

struct TrajectoryEvent {
    double t = 0.0;
    EventKind kind = EventKind::crossing;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    std::vector<TrajectoryEvent> events;
    std::vector<std::pair<double, double>> sliding_lambda_trace;  // (t, lambda) each sliding step
    SimStatus status = SimStatus::reached_t_max;
    bool chattering = false;
    double stop_radius = 0.0;  // resolved value used by the run
};

/// Equivalent-control weight on the "-" field at a surface point, defined
/// when the surface attracts from both sides: <n, f^+> < 0 < <n, f^->.
/// The returned lambda lies in (0, 1) and satisfies
/// <n, lambda f^- + (1 - lambda) f^+> = 0.
[[nodiscard]] inline std::optional<double> sliding_lambda(const Vector& normal,
                                                          const Vector& f_minus,
                                                          const Vector& f_plus) {
    const double dm = dot(normal, f_minus);
    const double dp = dot(normal, f_plus);
    if (dp < 0.0 && dm > 0.0) return dp / (dp - dm);
    return std::nullopt;
}

namespace detail {

template <typename F>
Vector rk4_step(F&& f, const Vector& x, double h) {
    const Vector k1 = f(x);
    const Vector k2 = f(x + (0.5 * h) * k1);
    const Vector k3 = f(x + (0.5 * h) * k2);
    const Vector k4 = f(x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

[[nodiscard]] inline Trajectory simulate(const SwitchedSystem& sys, const SwitchingRule& rule,
                                         const QuadraticLyapunov& l, const Vector& x_init,
                                         const SimOptions& opts = {}) {
    detail::require(x_init.size() == sys.dim && rule.x0.size() == sys.dim &&
                        l.x0.size() == sys.dim,
                    "simulate: dimension mismatch");
    detail::require(opts.step > 0.0 && opts.t_max > 0.0, "simulate: step and t_max must be positive");
    detail::require(opts.event_tol > 0.0 && opts.slide_tol > 0.0,
                    "simulate: tolerances must be positive");
    detail::require(opts.hysteresis >= 0.0, "simulate: hysteresis must be nonnegative");
    detail::require(opts.record_stride >= 1, "simulate: record stride must be at least 1");
    detail::require(all_finite(x_init), "simulate: initial state must be finite");

    Trajectory traj;
    traj.stop_radius =
        opts.stop_radius < 0.0 ? 1e-3 * (1.0 + norm(rule.x0)) : opts.stop_radius;

    const auto f_minus = [&](const Vector& y) { return sys.minus.eval(y); };
    const auto f_plus = [&](const Vector& y) { return sys.plus.eval(y); };
    // Tangent by construction: the stage weight is recomputed at every stage
    // point, so <grad s(y), f_slide(y)> = 0 wherever it is evaluated.
    const auto f_slide = [&](const Vector& y) {
        const Vector g = rule.s_gradient(y);
        const double dm = dot(g, f_minus(y));
        const double dp = dot(g, f_plus(y));
        double lam = dp / (dp - dm);
        lam = std::min(1.0, std::max(0.0, lam));
        return lam * f_minus(y) + (1.0 - lam) * f_plus(y);
    };

    Vector x = x_init;
    double t = 0.0;
    std::size_t advance_count = 0;

    auto record = [&](int mode, bool force) {
        if (!force && advance_count % opts.record_stride != 0) return;
        traj.samples.push_back({t, x, mode, value(l, x), rule.s(x)});
    };

    // Chattering diagnostic for the hysteresis band: a run of 10 or more
    // relay flips each no further than two steps apart.
    double last_flip_t = -1e300;
    int fast_flip_streak = 0;
    auto note_flip = [&] {
        fast_flip_streak = (t - last_flip_t) <= 2.0 * opts.step ? fast_flip_streak + 1 : 0;
        last_flip_t = t;
        if (fast_flip_streak >= 10) traj.chattering = true;
    };

    // Surface decision: slide when the surface attracts from both sides,
    // otherwise adopt the side both fields push toward. `heading` breaks the
    // tie for a repulsive tangency (the side the interrupted step was moving
    // toward).
    auto surface_regime = [&](int heading) {
        const Vector g = rule.s_gradient(x);
        const double dm = dot(g, f_minus(x));
        const double dp = dot(g, f_plus(x));
        if (dp < 0.0 && dm > 0.0) return 0;
        if (dm > 0.0 && dp > 0.0) return +1;
        if (dm < 0.0 && dp < 0.0) return -1;
        return heading >= 0 ? +1 : -1;
    };

    // A start inside the stop ball never slides or switches; it only stops.
    const bool stopped_at_start =
        traj.stop_radius > 0.0 && norm(x - rule.x0) <= traj.stop_radius;

    int regime;
    {
        const double s0 = rule.s(x);
        if (opts.hysteresis > 0.0)
            regime = s0 >= 0.0 ? +1 : -1;
        else if (std::abs(s0) > opts.event_tol)
            regime = s0 > 0.0 ? +1 : -1;
        else
            regime = surface_regime(+1);
        if (regime == 0 && !stopped_at_start)
            traj.events.push_back({t, EventKind::slide_start});
    }
    record(regime, true);
    if (regime == 0 && !stopped_at_start) {
        const Vector g = rule.s_gradient(x);
        const double dm = dot(g, f_minus(x));
        const double dp = dot(g, f_plus(x));
        traj.sliding_lambda_trace.emplace_back(t, dp / (dp - dm));
    }

    const double t_end = opts.t_max;
    while (t < t_end * (1.0 - 1e-15)) {
        if (traj.stop_radius > 0.0 && norm(x - rule.x0) <= traj.stop_radius) {
            traj.events.push_back({t, EventKind::stop});
            traj.status = SimStatus::reached_stop;
            if (traj.samples.empty() || traj.samples.back().t != t) record(regime, true);
            return traj;
        }
        const double h = std::min(opts.step, t_end - t);

        if (regime == 0) {
            // -------- sliding --------
            const Vector g = rule.s_gradient(x);
            const double dm = dot(g, f_minus(x));
            const double dp = dot(g, f_plus(x));
            if (!(dp < 0.0 && dm > 0.0)) {
                traj.events.push_back({t, EventKind::slide_end});
                regime = (dm > 0.0 && dp > 0.0) ? +1 : (dm < 0.0 && dp < 0.0) ? -1
                         : (dm + dp >= 0.0)     ? +1
                                                : -1;
                record(regime, true);
                continue;
            }
            Vector xn = detail::rk4_step(f_slide, x, h);
            if (!all_finite(xn)) {
                traj.events.push_back({t + h, EventKind::divergence});
                traj.status = SimStatus::diverged;
                return traj;
            }
            for (int k = 0; k < 3 && std::abs(rule.s(xn)) > 0.5 * opts.event_tol; ++k) {
                const Vector g2 = rule.s_gradient(xn);
                xn -= (rule.s(xn) / dot(g2, g2)) * g2;
            }
            x = xn;
            t += h;
            ++advance_count;
            const Vector g3 = rule.s_gradient(x);
            const double dm3 = dot(g3, f_minus(x));
            const double dp3 = dot(g3, f_plus(x));
            if (dp3 < 0.0 && dm3 > 0.0)
                traj.sliding_lambda_trace.emplace_back(t, dp3 / (dp3 - dm3));
            record(0, false);
        } else {
            // -------- single-mode integration --------
            const auto step_field = [&](const Vector& y) {
                return regime > 0 ? f_plus(y) : f_minus(y);
            };
            Vector xn = detail::rk4_step(step_field, x, h);
            if (!all_finite(xn)) {
                traj.events.push_back({t + h, EventKind::divergence});
                traj.status = SimStatus::diverged;
                return traj;
            }
            const double s_b = rule.s(xn);

            if (opts.hysteresis > 0.0) {
                x = xn;
                t += h;
                ++advance_count;
                if ((regime > 0 && s_b < -opts.hysteresis) ||
                    (regime < 0 && s_b > opts.hysteresis)) {
                    regime = -regime;
                    traj.events.push_back({t, EventKind::crossing});
                    note_flip();
                    record(regime, true);
                } else {
                    record(regime, false);
                }
                continue;
            }

            const bool crossed =
                std::abs(s_b) > opts.event_tol && (s_b > 0.0 ? +1 : -1) == -regime;
            if (!crossed) {
                x = xn;
                t += h;
                ++advance_count;
                record(regime, false);
                continue;
            }

            // Bisection on the step fraction. The bracket keeps the start
            // side at lo and the far side (or an |s| within tolerance hit)
            // at hi.
            double hi = 1.0;
            Vector x_hit = xn;
            {
                double lo = 0.0;
                for (int it = 0; it < 40; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const Vector xm = detail::rk4_step(step_field, x, mid * h);
                    const double sm = rule.s(xm);
                    if (std::abs(sm) <= opts.event_tol) {
                        hi = mid;
                        x_hit = xm;
                        break;
                    }
                    if ((sm > 0.0 ? +1 : -1) == regime) {
                        lo = mid;
                    } else {
                        hi = mid;
                        x_hit = xm;
                    }
                }
            }
            x = x_hit;
            t += hi * h;
            ++advance_count;

            const int heading = -regime;
            const int next = surface_regime(heading);
            if (next == 0) {
                traj.events.push_back({t, EventKind::slide_start});
                regime = 0;
                const Vector g = rule.s_gradient(x);
                const double dm = dot(g, f_minus(x));
                const double dp = dot(g, f_plus(x));
                traj.sliding_lambda_trace.emplace_back(t, dp / (dp - dm));
                record(0, true);
            } else {
                if (next != regime) traj.events.push_back({t, EventKind::crossing});
                regime = next;
                record(regime, true);
            }
        }
    }

    traj.status = SimStatus::reached_t_max;
    if (traj.samples.empty() || traj.samples.back().t != t) record(regime, true);
    return traj;
}

struct DescentReport {
    bool monotone = false;
    double max_uptick = 0.0;
    double slack = 0.0;  // allowance used by the monotonicity verdict
    bool w_positive = false;
    std::optional<std::size_t> w_witness_index;  // first sample with w <= 0, if any
    double w_min_estimate = 0.0;  // min of w over samples in the stop/start annulus
    bool linear_bound_ok = false;  // V(t) <= V(0) - w_min t + slack up to the stop
    bool reached_stop = false;
    double t_stop = 0.0;
};

/// Replays a trajectory against the pair (L, rule) it was produced with and
/// checks the certified descent facts: V monotone up to slack, the descent
/// rate w positive away from x0, and the linear decay bound with the
/// annulus-wide worst rate. A trajectory whose recorded V or s disagrees
/// with L and the rule is a contract violation.
[[nodiscard]] inline DescentReport descent_monitor(const Trajectory& traj,
                                                   const QuadraticLyapunov& l,
                                                   const SwitchedSystem& sys,
                                                   const SwitchingRule& rule) {
    detail::require(!traj.samples.empty(), "descent_monitor: empty trajectory");

    for (const TrajectorySample& smp : traj.samples) {
        const double v = value(l, smp.x);
        const double s = rule.s(smp.x);
        if (std::abs(v - smp.V) > 1e-9 * (1.0 + std::abs(v)) ||
            std::abs(s - smp.s) > 1e-9 * (1.0 + std::abs(s)))
            throw std::invalid_argument(
                "descent_monitor: trajectory was not produced with this rule/Lyapunov pair");
    }

    DescentReport rep;
    const double v0 = traj.samples.front().V;
    rep.slack = tol::kDescentSlack * (1.0 + v0);

    rep.max_uptick = 0.0;
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        const double up = traj.samples[i].V - traj.samples[i - 1].V;
        if (up > rep.max_uptick) rep.max_uptick = up;
    }
    rep.monotone = rep.max_uptick <= rep.slack;

    const Vector& x0 = l.x0;
    const double inner = traj.stop_radius;
    const double outer = norm(traj.samples.front().x - x0) * (1.0 + 1e-12);
    const double off_center_guard = tol::kBoundaryGuard * (1.0 + norm(x0));

    rep.w_positive = true;
    bool any_annulus = false;
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const TrajectorySample& smp = traj.samples[i];
        const Vector g = gradient(l, smp.x);
        double w;
        if (smp.mode < 0) {
            w = -dot(g, sys.minus.eval(smp.x));
        } else if (smp.mode > 0) {
            w = -dot(g, sys.plus.eval(smp.x));
        } else {
            // A recorded sliding sample sits within the event tolerance of
            // the surface, where the two single-mode rates straddle the
            // actual one and differ by <grad V, f^- - f^+>. Replaying the
            // equivalent control measures the rate the trajectory follows
            // and stays well conditioned arbitrarily close to the target.
            const Vector fm = sys.minus.eval(smp.x);
            const Vector fp = sys.plus.eval(smp.x);
            const auto lam = sliding_lambda(rule.s_gradient(smp.x), fm, fp);
            if (lam.has_value())
                w = -dot(g, (*lam) * fm + (1.0 - *lam) * fp);
            else
                w = -std::max(dot(g, fm), dot(g, fp));
        }

        const double dist = norm(smp.x - x0);
        if (dist > off_center_guard && !(w > 0.0) && rep.w_positive) {
            rep.w_positive = false;
            rep.w_witness_index = i;
        }
        if (dist >= inner && dist <= outer) {
            if (!any_annulus || w < rep.w_min_estimate) rep.w_min_estimate = w;
            any_annulus = true;
        }
    }
    if (!any_annulus) rep.w_min_estimate = 0.0;

    rep.linear_bound_ok = true;
    for (const TrajectorySample& smp : traj.samples)
        if (smp.V > v0 - rep.w_min_estimate * smp.t + rep.slack) {
            rep.linear_bound_ok = false;
            break;
        }

    rep.reached_stop = traj.status == SimStatus::reached_stop;
    rep.t_stop = traj.samples.back().t;
    for (const TrajectoryEvent& ev : traj.events)
        if (ev.kind == EventKind::stop) rep.t_stop = ev.t;
    return rep;
}

}  // namespace switchsurf
