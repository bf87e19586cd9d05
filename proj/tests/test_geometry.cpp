#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "switchsurf/geometry.hpp"
#include "switchsurf/lyapunov.hpp"
#include "switchsurf/model.hpp"
#include "switchsurf/rules.hpp"
#include "switchsurf/sampling.hpp"

using namespace switchsurf;

namespace {

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
    const Vector v{1.0, -0.5};
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

// Frozen 3-D two-mode instance sharing the certificate matrix below; the
// switched equilibrium sits at (0.2, -0.1, 0.4) with weight 0.4.
Instance frozen_3d_instance() {
    const Matrix am{
        {-0.4067070995362112, 0.67249375668926159, 0.017838030681412785},
        {-0.59579022475918653, -0.90082054941134493, 0.20156974669996428},
        {-0.078487334998216224, -0.74741348555119513, -0.96146985372814853}};
    const Matrix ap{
        {-0.5592222618622904, -0.071352122725651071, 0.090973956475205148},
        {0.43078844095611846, -0.80627898679985743, 0.52800570816981807},
        {-0.10792008562254723, -1.1541205850874063, -0.90349625401355693}};
    const Vector bm{1.0, -1.0, 0.5};
    const Vector bp{-0.50404328695445355, 0.25431085741467474, 0.15126650017838034};

    Instance inst;
    inst.sys = make_switched(affine_field(am, bm), affine_field(ap, bp));
    inst.eq = find_switched_equilibrium(inst.sys, Vector{0.2, -0.1, 0.4}, 0.5, 0);
    inst.l.P = Matrix{{2.0, 0.3, 0.1}, {0.3, 1.5, -0.2}, {0.1, -0.2, 1.0}};
    inst.l.x0 = inst.eq.x0;
    const CqlfCertificate cert = verify_cqlf(inst.sys, inst.eq, inst.l.P);
    inst.l.alpha = cert.alpha;
    inst.l.alpha_certified = cert.certified;
    return inst;
}

}  // namespace

TEST_CASE("alpha region in sphere form: center, radius, tangency") {
    QuadraticLyapunov l;
    l.P = Matrix::identity(2);
    l.x0 = Vector{0.0, 0.0};
    l.alpha = 2.0;
    const Vector f0{2.0, 0.0};
    const SphereRegion ball = omega_alpha_sphere(l, f0);
    CHECK(ball.center[0] == Catch::Approx(1.0));
    CHECK(ball.center[1] == Catch::Approx(0.0));
    CHECK(ball.radius == Catch::Approx(1.0));
    CHECK(ball.side == SphereSide::exterior);
    // The ball passes through x0, which is where it touches the plane.
    CHECK(norm(l.x0 - ball.center) == Catch::Approx(ball.radius));

    CHECK(sphere_contains(ball, Vector{3.0, 0.0}));
    CHECK_FALSE(sphere_contains(ball, Vector{1.0, 0.5}));

    QuadraticLyapunov flat = l;
    flat.alpha = 0.0;
    CHECK_THROWS_AS(omega_alpha_sphere(flat, f0), std::invalid_argument);
    CHECK_THROWS_AS(omega_alpha_sphere(l, Vector{0.0, 0.0}), std::runtime_error);
}

TEST_CASE("alpha region membership matches the sphere form everywhere") {
    QuadraticLyapunov l;
    l.P = Matrix{{1.5, 0.25}, {0.25, 0.75}};
    l.x0 = Vector{0.4, -0.2};
    l.alpha = 0.8;
    const Vector f0{1.0, 0.6};
    const SphereRegion ball = omega_alpha_sphere(l, f0);

    const SampleSpec box = make_box(l.x0, Vector{6.0, 6.0}, 5000, 21);
    std::size_t compared = 0;
    for (std::size_t i = 0; i < box.count; ++i) {
        const Vector x = sample_point(box, i);
        const double h = omega_alpha_value(l, f0, x);
        if (std::abs(h) <= 1e-12) continue;
        ++compared;
        REQUIRE(omega_alpha_membership(l, f0, x) == sphere_contains(ball, x));
    }
    CHECK(compared >= 4990);
}

TEST_CASE("the alpha region is not contained in a half-space, only the converse holds") {
    // With P = I, alpha = 2, x0 = 0 and f^-(x0) = (2, 0) the alpha region is
    // the exterior of the ball centered at (1, 0) with radius 1, and the
    // plane normal is n = (4, 0). The exterior pokes into both sides of the
    // plane: (3, 0) has s > 0 yet lies in the region. The inclusion that
    // does hold, and that the sampled check tests, is that each open
    // half-space lies inside its matching region.
    QuadraticLyapunov l;
    l.P = Matrix::identity(2);
    l.x0 = Vector{0.0, 0.0};
    l.alpha = 2.0;
    const Vector f0{2.0, 0.0};
    const Vector n = 2.0 * (l.P * f0);

    const Vector witness{3.0, 0.0};
    CHECK(omega_alpha_value(l, f0, witness) < 0.0);  // inside the alpha region
    CHECK(dot(witness - l.x0, n) > 0.0);             // but on the positive side

    SplitMix64 rng(31);
    for (int i = 0; i < 2000; ++i) {
        const Vector x{20.0 * rng.uniform01() - 10.0, 20.0 * rng.uniform01() - 10.0};
        const double s = dot(x - l.x0, n);
        if (s < -1e-12) {
            INFO("x = (" << x[0] << ", " << x[1] << ")");
            REQUIRE(omega_alpha_value(l, f0, x) < 0.0);
        }
    }
}

TEST_CASE("angle between vectors is accurate near zero") {
    CHECK(angle_between(Vector{1.0, 0.0}, Vector{0.0, 1.0}) ==
          Catch::Approx(std::acos(0.0)).margin(1e-12));
    CHECK(angle_between(Vector{2.0, 0.0}, Vector{5.0, 0.0}) == Catch::Approx(0.0).margin(1e-15));
    CHECK(angle_between(Vector{1.0, 0.0}, Vector{1.0, 1e-9}) ==
          Catch::Approx(1e-9).margin(1e-12));
    CHECK(angle_between(Vector{1.0, 0.0}, Vector{-1.0, 1e-9}) ==
          Catch::Approx(std::acos(-1.0)).margin(1e-6));
    CHECK_THROWS_AS(angle_between(Vector{0.0, 0.0}, Vector{1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("region report passes on a certified planar instance") {
    const Instance inst = prescribed_instance();
    REQUIRE(inst.l.alpha > 0.0);
    const SwitchingRule rule = linear_rule(inst.l, inst.sys, inst.eq);
    const RegionReport rep = verify_lemmas(inst.l, inst.sys, inst.eq, rule);

    CHECK(rep.total_samples == 10000);
    CHECK(rep.seed == 0);
    REQUIRE(rep.checks.size() == 5);
    CHECK(rep.checks[0].name == "cover");
    CHECK(rep.checks[1].name == "alpha_subset");
    CHECK(rep.checks[2].name == "tangency");
    CHECK(rep.checks[3].name == "halfspace");
    CHECK(rep.checks[4].name == "sphere_form");
    for (const LemmaCheck& c : rep.checks) {
        INFO(c.name << ": " << c.violations << " violations, worst " << c.worst);
        CHECK(c.pass);
        CHECK(c.violations == 0);
        CHECK_FALSE(c.witness.has_value());
    }
    CHECK(rep.all_pass);
    CHECK(rep.checks[2].worst <= 1e-9);              // tangency angle and touch residual
    CHECK(rep.checks[0].samples_used == 10000);      // cover sees every off-center sample
    CHECK(rep.checks[3].samples_used <= 10000);      // halfspace skips the plane slab
}

TEST_CASE("region report is independent of the worker thread count") {
    const Instance inst = prescribed_instance();
    const SwitchingRule rule = linear_rule(inst.l, inst.sys, inst.eq);

    setenv("SWITCHSURF_THREADS", "1", 1);
    const RegionReport serial = verify_lemmas(inst.l, inst.sys, inst.eq, rule);
    setenv("SWITCHSURF_THREADS", "3", 1);
    const RegionReport parallel = verify_lemmas(inst.l, inst.sys, inst.eq, rule);
    unsetenv("SWITCHSURF_THREADS");

    REQUIRE(serial.checks.size() == parallel.checks.size());
    for (std::size_t i = 0; i < serial.checks.size(); ++i) {
        CHECK(serial.checks[i].pass == parallel.checks[i].pass);
        CHECK(serial.checks[i].samples_used == parallel.checks[i].samples_used);
        CHECK(serial.checks[i].violations == parallel.checks[i].violations);
        CHECK(serial.checks[i].worst == parallel.checks[i].worst);  // bitwise
    }
}

TEST_CASE("region verification needs a hyperplane rule and a positive alpha") {
    const Instance inst = prescribed_instance();
    const SwitchingRule quad = quadratic_rule(inst.l, inst.sys);
    CHECK_THROWS_AS(verify_lemmas(inst.l, inst.sys, inst.eq, quad), std::invalid_argument);

    QuadraticLyapunov flat = inst.l;
    flat.alpha = 0.0;
    const SwitchingRule lin = linear_rule(inst.l, inst.sys, inst.eq);
    CHECK_THROWS_AS(verify_lemmas(flat, inst.sys, inst.eq, lin), std::invalid_argument);
}

TEST_CASE("region report passes on the frozen 3-D instance") {
    const Instance inst = frozen_3d_instance();
    CHECK(inst.eq.x0[0] == Catch::Approx(0.2).margin(1e-12));
    CHECK(inst.eq.x0[1] == Catch::Approx(-0.1).margin(1e-9));
    CHECK(inst.eq.x0[2] == Catch::Approx(0.4).margin(1e-9));
    CHECK(inst.eq.lambda0 == Catch::Approx(0.4).margin(1e-9));
    REQUIRE(inst.l.alpha > 0.0);
    CHECK(inst.l.alpha_certified);

    const SwitchingRule rule = linear_rule(inst.l, inst.sys, inst.eq);
    const RegionReport rep = verify_lemmas(inst.l, inst.sys, inst.eq, rule);
    for (const LemmaCheck& c : rep.checks) {
        INFO(c.name << ": " << c.violations << " violations, worst " << c.worst);
        CHECK(c.pass);
    }
    CHECK(rep.all_pass);
}
