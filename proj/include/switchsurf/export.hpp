#pragma once

// Artifact writers: plain-text trajectory tables, zero-level contours of a
// scalar field on a 2-D box, and self-contained SVG phase plots. All text
// output prints doubles with %.17g so round-trips are exact and repeated
// runs can be compared byte by byte.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "switchsurf/filippov.hpp"
#include "switchsurf/linalg.hpp"

namespace switchsurf {

[[nodiscard]] inline std::string fmt_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

[[nodiscard]] inline const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::crossing: return "crossing";
        case EventKind::slide_start: return "slide_start";
        case EventKind::slide_end: return "slide_end";
        case EventKind::stop: return "stop";
        case EventKind::divergence: return "divergence";
    }
    return "unknown";
}

[[nodiscard]] inline const char* sim_status_name(SimStatus st) {
    switch (st) {
        case SimStatus::reached_stop: return "reached_stop";
        case SimStatus::reached_t_max: return "reached_t_max";
        case SimStatus::diverged: return "diverged";
    }
    return "unknown";
}

/// Space-delimited table, one sample per row, with events interleaved as
/// "#event <t> <kind>" comment lines in time order.
inline void write_trajectory(std::ostream& os, const Trajectory& traj) {
    const std::size_t dim = traj.samples.empty() ? 0 : traj.samples.front().x.size();
    os << "# t";
    for (std::size_t i = 1; i <= dim; ++i) os << " x" << i;
    os << " mode V s\n";
    os << "#status " << sim_status_name(traj.status) << "\n";

    std::size_t next_event = 0;
    auto flush_events_through = [&](double t) {
        while (next_event < traj.events.size() && traj.events[next_event].t <= t) {
            os << "#event " << fmt_full(traj.events[next_event].t) << ' '
               << event_kind_name(traj.events[next_event].kind) << "\n";
            ++next_event;
        }
    };
    for (const TrajectorySample& smp : traj.samples) {
        flush_events_through(smp.t);
        os << fmt_full(smp.t);
        for (double c : smp.x) os << ' ' << fmt_full(c);
        os << ' ' << smp.mode << ' ' << fmt_full(smp.V) << ' ' << fmt_full(smp.s) << "\n";
    }
    flush_events_through(1e300);
}

inline void write_trajectory_file(const std::string& path, const Trajectory& traj) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    write_trajectory(os, traj);
}

using Polyline = std::vector<Vector>;

/// Marching-squares zero contour of f on the box center +- halfwidth,
/// sampled on an (nx+1) x (ny+1) grid. Returned as independent segments
/// (two points each); corner values equal to zero count as positive so
/// every sign change yields exactly one interpolated crossing.
[[nodiscard]] inline std::vector<Polyline> zero_contour(
    const std::function<double(const Vector&)>& f, const Vector& center, const Vector& halfwidth,
    std::size_t nx = 200, std::size_t ny = 200) {
    detail::require(center.size() == 2 && halfwidth.size() == 2, "zero_contour: box must be 2-D");
    detail::require(nx >= 1 && ny >= 1, "zero_contour: grid must have at least one cell");
    const double x_lo = center[0] - halfwidth[0], x_hi = center[0] + halfwidth[0];
    const double y_lo = center[1] - halfwidth[1], y_hi = center[1] + halfwidth[1];
    const double dx = (x_hi - x_lo) / static_cast<double>(nx);
    const double dy = (y_hi - y_lo) / static_cast<double>(ny);

    std::vector<double> grid((nx + 1) * (ny + 1));
    for (std::size_t j = 0; j <= ny; ++j)
        for (std::size_t i = 0; i <= nx; ++i)
            grid[j * (nx + 1) + i] =
                f(Vector{x_lo + static_cast<double>(i) * dx, y_lo + static_cast<double>(j) * dy});

    auto corner = [&](std::size_t i, std::size_t j) { return grid[j * (nx + 1) + i]; };
    auto lerp = [](double a, double b) { return a / (a - b); };  // zero of the chord a -> b

    std::vector<Polyline> segments;
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const double v00 = corner(i, j), v10 = corner(i + 1, j);
            const double v01 = corner(i, j + 1), v11 = corner(i + 1, j + 1);
            const double px = x_lo + static_cast<double>(i) * dx;
            const double py = y_lo + static_cast<double>(j) * dy;
            const bool n00 = v00 < 0.0, n10 = v10 < 0.0, n01 = v01 < 0.0, n11 = v11 < 0.0;
            const int config = (n00 ? 1 : 0) | (n10 ? 2 : 0) | (n11 ? 4 : 0) | (n01 ? 8 : 0);
            if (config == 0 || config == 15) continue;

            // Edge crossing points, present only when the edge changes sign.
            std::optional<Vector> bottom, right, top, left;
            if (n00 != n10) bottom = Vector{px + dx * lerp(v00, v10), py};
            if (n10 != n11) right = Vector{px + dx, py + dy * lerp(v10, v11)};
            if (n01 != n11) top = Vector{px + dx * lerp(v01, v11), py + dy};
            if (n00 != n01) left = Vector{px, py + dy * lerp(v00, v01)};

            auto add = [&](const std::optional<Vector>& a, const std::optional<Vector>& b) {
                if (a && b) segments.push_back({*a, *b});
            };
            if (config == 5 || config == 10) {
                // Saddle cell: split by the sign at the cell center.
                const double vc = f(Vector{px + 0.5 * dx, py + 0.5 * dy});
                const bool center_neg = vc < 0.0;
                if ((config == 5) == center_neg) {
                    add(bottom, right);
                    add(top, left);
                } else {
                    add(bottom, left);
                    add(top, right);
                }
            } else {
                // Exactly two of the four edges carry a crossing.
                std::vector<const std::optional<Vector>*> hit;
                for (const auto* e : {&bottom, &right, &top, &left})
                    if (*e) hit.push_back(e);
                if (hit.size() == 2) add(*hit[0], *hit[1]);
            }
        }
    }
    return segments;
}

/// Gnuplot-style polyline file: "x y" rows, blank line between pieces.
inline void write_polylines(std::ostream& os, const std::vector<Polyline>& lines) {
    os << "# x y\n";
    for (const Polyline& pl : lines) {
        for (const Vector& pt : pl) {
            os << fmt_full(pt[0]);
            for (std::size_t i = 1; i < pt.size(); ++i) os << ' ' << fmt_full(pt[i]);
            os << "\n";
        }
        os << "\n";
    }
}

inline void write_polylines_file(const std::string& path, const std::vector<Polyline>& lines) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    write_polylines(os, lines);
}

/// Minimal SVG scatter/line plot with a fixed margin frame. Coordinates are
/// mapped from the data box to the pixel viewport on insertion, so shapes
/// can be added in any order.
class SvgPlot {
  public:
    SvgPlot(double x_min, double x_max, double y_min, double y_max, std::string title,
            double width = 720.0, double height = 540.0)
        : x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max), w_(width), h_(height),
          title_(std::move(title)) {
        detail::require(x_max > x_min && y_max > y_min, "SvgPlot: empty data box");
    }

    void add_polyline(const std::vector<Vector>& pts, const std::string& color,
                      double stroke_width = 1.0, bool dashed = false) {
        if (pts.size() < 2) return;
        std::string d = "M";
        for (const Vector& p : pts) {
            d += ' ' + px(p[0]) + ' ' + py(p[1]);
        }
        body_ += "  <path d=\"" + d + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" +
                 fmt(stroke_width) + "\"" + (dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
    }

    void add_segments(const std::vector<Polyline>& segs, const std::string& color,
                      double stroke_width = 1.0, bool dashed = false) {
        for (const Polyline& s : segs) add_polyline(s, color, stroke_width, dashed);
    }

    void add_marker(const Vector& at, const std::string& color, double radius_px = 4.0) {
        body_ += "  <circle cx=\"" + px(at[0]) + "\" cy=\"" + py(at[1]) + "\" r=\"" +
                 fmt(radius_px) + "\" fill=\"" + color + "\"/>\n";
    }

    void add_label(const Vector& at, const std::string& text, const std::string& color = "#333") {
        body_ += "  <text x=\"" + px(at[0]) + "\" y=\"" + py(at[1]) +
                 "\" font-size=\"12\" font-family=\"sans-serif\" fill=\"" + color + "\">" +
                 escape(text) + "</text>\n";
    }

    [[nodiscard]] std::string str() const {
        std::string out;
        out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(w_) + "\" height=\"" +
               fmt(h_) + "\" viewBox=\"0 0 " + fmt(w_) + ' ' + fmt(h_) + "\">\n";
        out += "  <rect x=\"0\" y=\"0\" width=\"" + fmt(w_) + "\" height=\"" + fmt(h_) +
               "\" fill=\"white\"/>\n";
        out += "  <rect x=\"" + fmt(kMargin) + "\" y=\"" + fmt(kMargin) + "\" width=\"" +
               fmt(w_ - 2 * kMargin) + "\" height=\"" + fmt(h_ - 2 * kMargin) +
               "\" fill=\"none\" stroke=\"#888\"/>\n";
        out += "  <text x=\"" + fmt(w_ / 2) + "\" y=\"" + fmt(kMargin - 10) +
               "\" font-size=\"14\" font-family=\"sans-serif\" text-anchor=\"middle\">" +
               escape(title_) + "</text>\n";
        out += axis_labels();
        out += body_;
        out += "</svg>\n";
        return out;
    }

    void write(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw std::runtime_error("cannot open " + path + " for writing");
        os << str();
    }

  private:
    static constexpr double kMargin = 48.0;

    [[nodiscard]] static std::string fmt(double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.6g", v);
        return buf;
    }
    [[nodiscard]] static std::string escape(const std::string& s) {
        std::string out;
        for (char c : s) {
            if (c == '&') out += "&amp;";
            else if (c == '<') out += "&lt;";
            else if (c == '>') out += "&gt;";
            else out += c;
        }
        return out;
    }
    [[nodiscard]] std::string px(double x) const {
        return fmt(kMargin + (x - x_min_) / (x_max_ - x_min_) * (w_ - 2 * kMargin));
    }
    [[nodiscard]] std::string py(double y) const {
        return fmt(h_ - kMargin - (y - y_min_) / (y_max_ - y_min_) * (h_ - 2 * kMargin));
    }
    [[nodiscard]] std::string axis_labels() const {
        std::string out;
        auto text = [&](double x, double y, const std::string& t, const char* anchor) {
            out += "  <text x=\"" + fmt(x) + "\" y=\"" + fmt(y) +
                   "\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"" + anchor +
                   "\" fill=\"#555\">" + t + "</text>\n";
        };
        text(kMargin, h_ - kMargin + 16, fmt(x_min_), "middle");
        text(w_ - kMargin, h_ - kMargin + 16, fmt(x_max_), "middle");
        text(kMargin - 6, h_ - kMargin, fmt(y_min_), "end");
        text(kMargin - 6, kMargin + 4, fmt(y_max_), "end");
        return out;
    }

    double x_min_, x_max_, y_min_, y_max_, w_, h_;
    std::string title_;
    std::string body_;
};

/// Phase-plane picture of a 2-D run: switching surface, trajectory colored
/// by regime, start marker, and target point.
[[nodiscard]] inline SvgPlot phase_plot(const Trajectory& traj, const SwitchingRule& rule,
                                        const std::string& title) {
    detail::require(!traj.samples.empty() && traj.samples.front().x.size() == 2,
                    "phase_plot: need a non-empty 2-D trajectory");
    double x_lo = traj.samples.front().x[0], x_hi = x_lo;
    double y_lo = traj.samples.front().x[1], y_hi = y_lo;
    auto grow = [&](const Vector& p) {
        x_lo = std::min(x_lo, p[0]);
        x_hi = std::max(x_hi, p[0]);
        y_lo = std::min(y_lo, p[1]);
        y_hi = std::max(y_hi, p[1]);
    };
    for (const TrajectorySample& smp : traj.samples) grow(smp.x);
    grow(rule.x0);
    const double pad_x = 0.08 * (x_hi - x_lo) + 1e-6;
    const double pad_y = 0.08 * (y_hi - y_lo) + 1e-6;
    x_lo -= pad_x;
    x_hi += pad_x;
    y_lo -= pad_y;
    y_hi += pad_y;

    SvgPlot plot(x_lo, x_hi, y_lo, y_hi, title);
    const Vector center{0.5 * (x_lo + x_hi), 0.5 * (y_lo + y_hi)};
    const Vector halfwidth{0.5 * (x_hi - x_lo), 0.5 * (y_hi - y_lo)};
    plot.add_segments(zero_contour([&](const Vector& p) { return rule.s(p); }, center, halfwidth),
                      "#bbbbbb", 1.0, true);

    // One polyline per stretch of constant regime.
    std::vector<Vector> run;
    int run_mode = traj.samples.front().mode;
    auto color_of = [](int mode) {
        return mode < 0 ? "#1f77b4" : (mode > 0 ? "#d62728" : "#2ca02c");
    };
    auto flush = [&] {
        plot.add_polyline(run, color_of(run_mode), 1.5);
        run.clear();
    };
    for (const TrajectorySample& smp : traj.samples) {
        if (smp.mode != run_mode && !run.empty()) {
            run.push_back(smp.x);  // close the previous stretch at the regime change
            flush();
            run_mode = smp.mode;
        }
        run.push_back(smp.x);
    }
    flush();

    plot.add_marker(traj.samples.front().x, "#000000", 4.0);
    plot.add_marker(rule.x0, "#ff7f0e", 4.0);
    plot.add_label(rule.x0, " target");
    return plot;
}

}  // namespace switchsurf
