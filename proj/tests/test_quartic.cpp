#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ias/error.hpp"
#include "ias/quartic.hpp"
#include "support.hpp"

using namespace ias;

namespace {

double horner(const std::array<double, 5>& c, double t) {
    double v = 0.0;
    for (double k : c) v = v * t + k;
    return v;
}

// Sign changes of the polynomial on a uniform grid, each refined by bisection.
std::vector<double> bisection_roots(const std::array<double, 5>& c, double lo, double hi, int steps) {
    std::vector<double> roots;
    const double h = (hi - lo) / steps;
    for (int i = 0; i < steps; ++i) {
        double a = lo + i * h, b = a + h;
        double fa = horner(c, a), fb = horner(c, b);
        if (fa == 0.0) {
            roots.push_back(a);
            continue;
        }
        if ((fa < 0) == (fb < 0) || fb == 0.0) continue;
        for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
            const double m = 0.5 * (a + b);
            const double fm = horner(c, m);
            if ((fm < 0) == (fa < 0)) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        roots.push_back(0.5 * (a + b));
    }
    return roots;
}

}  // namespace

TEST_CASE("solve_quartic examples") {
    const auto r = solve_quartic({1, 0, -5, 0, 4});
    REQUIRE(r.size() == 4);
    const double expect[4] = {-2, -1, 1, 2};
    for (int i = 0; i < 4; ++i) CHECK(r[i] == doctest::Approx(expect[i]).epsilon(1e-14));
    CHECK(solve_quartic({1, 0, 0, 0, 1}).empty());
    CHECK_THROWS_AS(solve_quartic({0, 0, 0, 0, 0}), InvalidArgument);
}

TEST_CASE("degree drop for tiny leading coefficients") {
    const auto cubic = solve_quartic({1e-16, 1, -6, 11, -6});  // (t−1)(t−2)(t−3)
    REQUIRE(cubic.size() == 3);
    CHECK(cubic[0] == doctest::Approx(1.0));
    CHECK(cubic[2] == doctest::Approx(3.0));
    const auto quad = solve_quartic({0, 0, 1, 0, -4});
    REQUIRE(quad.size() == 2);
    CHECK(quad[1] == doctest::Approx(2.0));
    const auto lin = solve_quartic({0, 0, 0, 2, -1});
    REQUIRE(lin.size() == 1);
    CHECK(lin[0] == doctest::Approx(0.5));
    CHECK(solve_quartic({0, 0, 0, 0, 3}).empty());
}

TEST_CASE("repeated roots collapse") {
    const auto r = solve_quartic({1, -4, 6, -4, 1});  // (t−1)⁴
    REQUIRE(r.size() == 1);
    CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-3));
    const auto d = solve_quartic({1, 0, -2, 0, 1});  // (t²−1)²
    REQUIRE(d.size() == 2);
    CHECK(d[0] == doctest::Approx(-1.0).epsilon(1e-7));
    CHECK(d[1] == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("quartics from known roots") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int trial = 0; trial < 2000; ++trial) {
        double rt[4];
        for (double& x : rt) x = u(rng);
        std::sort(rt, rt + 4);
        bool separated = true;
        for (int i = 0; i < 3; ++i) separated = separated && rt[i + 1] - rt[i] > 1e-3;
        if (!separated) continue;
        // Expand (t−r0)(t−r1)(t−r2)(t−r3).
        std::array<double, 5> c{1, 0, 0, 0, 0};
        for (int k = 0; k < 4; ++k)
            for (int i = k + 1; i >= 1; --i) c[i] -= rt[k] * c[i - 1];
        const auto r = solve_quartic(c);
        REQUIRE(r.size() == 4);
        for (int i = 0; i < 4; ++i) CHECK(r[i] == doctest::Approx(rt[i]).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("random quartics vs bisection oracle") {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(-10, 10);
    std::uniform_real_distribution<double> lead(0.01, 10);
    int missed = 0, spurious = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::array<double, 5> c{lead(rng), u(rng), u(rng), u(rng), u(rng)};
        const auto ours = solve_quartic(c);
        const auto oracle = bisection_roots(c, -50, 50, 2048);
        double cinf = 0.0;
        for (double k : c) cinf = std::max(cinf, std::abs(k));
        // Beyond the oracle window the nearest doubles to a root already exceed the bound.
        for (double t : ours)
            if (std::abs(t) <= 50) CHECK(std::abs(horner(c, t)) <= 1e-10 * std::max(1.0, cinf));
        for (double t : oracle) {
            const bool found = std::any_of(ours.begin(), ours.end(), [&](double s) { return std::abs(s - t) <= 1e-8; });
            missed += found ? 0 : 1;
        }
        for (double t : ours) {
            if (std::abs(t) > 50) continue;
            const bool found = std::any_of(oracle.begin(), oracle.end(), [&](double s) { return std::abs(s - t) <= 1e-6; });
            spurious += found ? 0 : 1;  // double roots have no sign change; counted, not failed
        }
    }
    CHECK(missed == 0);
    MESSAGE("roots without a bisection sign change (tangential): " << spurious);
}

TEST_CASE("cubic and quadratic helpers") {
    auto q = solve_quadratic(1, -3, 2);
    std::sort(q.begin(), q.end());
    REQUIRE(q.size() == 2);
    CHECK(q[0] == doctest::Approx(1.0));
    CHECK(q[1] == doctest::Approx(2.0));
    CHECK(solve_quadratic(1, 0, 1).empty());
    auto c = solve_cubic(1, 0, -1, 0);
    std::sort(c.begin(), c.end());
    REQUIRE(c.size() == 3);
    CHECK(c[0] == doctest::Approx(-1.0));
    CHECK(c[1] == doctest::Approx(0.0).scale(1.0));
    CHECK(c[2] == doctest::Approx(1.0));
}

TEST_CASE("solver totality on finite inputs") {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> e(-12, 12);
    for (int trial = 0; trial < 5000; ++trial) {
        std::array<double, 5> c;
        for (double& k : c) k = std::pow(10.0, e(rng)) * (rng() % 2 ? 1 : -1);
        for (double t : solve_quartic(c)) CHECK(std::isfinite(t));
    }
}

TEST_CASE("ray_intersect on a sphere form") {
    const Scene s = Scene::from_primitives({test::sphere_primitive(1.0)});
    const auto hit = ray_intersect(s, {0, 0, -3}, {0, 0, 1}, 100.0);
    REQUIRE(hit.has_value());
    CHECK(hit->t == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(hit->normal.z == doctest::Approx(-1.0));
    CHECK(hit->primitive_index == 0);
    CHECK(norm(hit->point - Vec3{0, 0, -1}) <= 1e-12);
    CHECK_FALSE(ray_intersect(s, {0, 3, -3}, {0, 0, 1}, 100.0).has_value());
    CHECK_FALSE(ray_intersect(s, {0, 0, -3}, {0, 0, 1}, 1.5).has_value());
    CHECK_THROWS_AS(ray_intersect(s, {0, 0, -3}, {0, 0, 2}, 10.0), InvalidArgument);
}

TEST_CASE("ray from inside exits without an entering hit") {
    const Scene s = Scene::from_primitives({test::sphere_primitive(1.0)});
    CHECK_FALSE(ray_intersect(s, {0, 0, 0}, {0, 0, 1}, 10.0).has_value());
}

TEST_CASE("entering rule skips roots hidden inside another primitive") {
    // Two overlapping spheres of radius 1 at x = ±0.5. Along the x axis from the left the
    // surface of the right sphere at x = −0.5 lies inside the left sphere.
    const Scene s = Scene::from_primitives({test::sphere_primitive(1.0, {-0.5, 0, 0}), test::sphere_primitive(1.0, {0.5, 0, 0})});
    const auto hit = ray_intersect(s, {-3, 0, 0}, {1, 0, 0}, 100.0);
    REQUIRE(hit.has_value());
    CHECK(hit->t == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(hit->primitive_index == 0);
    const auto back = ray_intersect(s, {3, 0, 0}, {-1, 0, 0}, 100.0);
    REQUIRE(back.has_value());
    CHECK(back->t == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(back->primitive_index == 1);
}

TEST_CASE("ray hits lie on the union surface") {
    std::mt19937_64 rng(34);
    int hits = 0;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<RawPrimitiveParams> raw;
        for (int m = 0; m < 4; ++m) raw.push_back(test::random_raw(rng, 0.3));
        const Scene s = Scene::from_raw(raw);
        const RayCaster caster(s);
        for (int k = 0; k < 40; ++k) {
            const Vec3 d = test::random_unit(rng);
            const Vec3 o = -3.0 * d + 0.5 * test::random_point(rng, -1, 1);
            const auto hit = caster.intersect(o, d, 10.0);
            const auto again = ray_intersect(s, o, d, 10.0);
            REQUIRE(hit.has_value() == again.has_value());
            if (!hit) continue;
            ++hits;
            CHECK(hit->t == again->t);
            CHECK(std::abs(eval_union(s, hit->point).value) <= 1e-6);
            CHECK(norm(hit->point - (o + hit->t * d)) <= 1e-12);
            CHECK(std::abs(norm(hit->normal) - 1.0) <= 1e-12);
            CHECK(dot(hit->normal, d) <= 1e-9);
        }
    }
    CHECK(hits > 200);
}

TEST_CASE("leading coefficient is positive for assembled primitives") {
    std::mt19937_64 rng(35);
    for (int trial = 0; trial < 500; ++trial) {
        const AssembledPrimitive p = assemble(test::random_raw(rng, 0.5));
        const Vec3 d = test::random_unit(rng);
        const auto c = restrict_to_ray(p.coeffs, p.center, test::random_point(rng), d);
        const auto u = quadratic_monomials(d);
        double uu = 0.0;
        for (double x : u) uu += x * x;
        CHECK(c[0] >= kDefaultAlpha * uu * (1 - 1e-9));
    }
}
