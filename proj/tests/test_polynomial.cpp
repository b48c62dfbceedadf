#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ias/error.hpp"
#include "ias/polynomial.hpp"
#include "support.hpp"

using namespace ias;

namespace {

// Independent evaluation of vAvᵀ by explicit monomials and a double sum.
double naive_form(const SymMatrix10& a, const Vec3& p) {
    const double v[10] = {1, p.x, p.y, p.z, p.x * p.x, p.y * p.y, p.z * p.z, p.x * p.y, p.y * p.z, p.z * p.x};
    double s = 0.0;
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) s += v[i] * a(i, j) * v[j];
    return s;
}

QuarticCoeffs coeffs_of(std::initializer_list<std::pair<Exponents, double>> terms) {
    QuarticCoeffs q;
    for (const auto& [e, v] : terms) q.at(e.i, e.j, e.k) = v;
    return q;
}

}  // namespace

TEST_CASE("monomial vector ordering") {
    const auto v = monomials({2, 3, 5});
    const MonomialVector expect{1, 2, 3, 5, 4, 9, 25, 6, 15, 10};
    CHECK(v == expect);
}

TEST_CASE("graded-lex coefficient order") {
    CHECK(QuarticCoeffs::index(0, 0, 0) == 0);
    CHECK(QuarticCoeffs::index(1, 0, 0) == 1);
    CHECK(QuarticCoeffs::index(0, 1, 0) == 2);
    CHECK(QuarticCoeffs::index(0, 0, 1) == 3);
    CHECK(QuarticCoeffs::index(2, 0, 0) == 4);
    CHECK(QuarticCoeffs::index(0, 0, 4) == 34);
    for (int idx = 0; idx < kNumQuarticCoeffs; ++idx) {
        const Exponents e = QuarticCoeffs::exponents(idx);
        CHECK(e.degree() <= 4);
        CHECK(QuarticCoeffs::index(e.i, e.j, e.k) == idx);
        if (idx > 0) {
            const Exponents p = QuarticCoeffs::exponents(idx - 1);
            const bool ordered = p.degree() < e.degree() ||
                                 (p.degree() == e.degree() && (p.i > e.i || (p.i == e.i && p.j > e.j)));
            CHECK(ordered);
        }
    }
    CHECK_THROWS_AS(QuarticCoeffs::index(3, 2, 0), InvalidArgument);
    CHECK_THROWS_AS(QuarticCoeffs::index(-1, 0, 0), InvalidArgument);
}

TEST_CASE("SymMatrix keeps symmetry and round-trips its lower triangle") {
    std::mt19937_64 rng(1);
    const SymMatrix10 m = test::random_sym(rng);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) CHECK(m(i, j) == m(j, i));
    const auto low = m.lower();
    CHECK(low.size() == 55);
    CHECK(SymMatrix10::from_lower(low) == m);
    CHECK(SymMatrix10::from_lower(low)(1, 0) == low[1]);
    CHECK(SymMatrix10::from_lower(low)(2, 1) == low[4]);
}

TEST_CASE("eval_form examples") {
    SymMatrix10 a;
    a.set(0, 0, -1);
    a.set(1, 1, 1);
    CHECK(eval_form(a, {2, 0, 0}) == 3.0);
    CHECK(eval_form(SymMatrix10{}, {0.3, -0.7, 1.1}) == 0.0);
    SymMatrix10 b;
    b.set(4, 4, 1);
    b.set(0, 0, -1);
    CHECK(eval_form(b, {1, 0, 0}) == 0.0);
}

TEST_CASE("eval_form matches an explicit double sum") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const SymMatrix10 a = test::random_sym(rng);
        const Vec3 p = test::random_point(rng);
        CHECK(eval_form(a, p) == doctest::Approx(naive_form(a, p)).epsilon(1e-13));
    }
}

TEST_CASE("expand_to_monomials examples") {
    SymMatrix10 a;
    a.set(1, 2, 0.5);
    QuarticCoeffs q = expand_to_monomials(a);
    for (int idx = 0; idx < kNumQuarticCoeffs; ++idx) {
        const Exponents e = QuarticCoeffs::exponents(idx);
        CHECK(q.a[idx] == (e == Exponents{1, 1, 0} ? 1.0 : 0.0));
    }
    SymMatrix10 b;
    b.set(4, 5, 0.5);
    q = expand_to_monomials(b);
    CHECK(q.at(2, 2, 0) == 1.0);
    double sum = 0.0;
    for (double c : q.a) sum += std::abs(c);
    CHECK(sum == 1.0);
}

TEST_CASE("expansion fidelity on random forms") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const SymMatrix10 a = test::random_sym(rng);
        const QuarticCoeffs q = expand_to_monomials(a);
        for (int k = 0; k < 1000; ++k) {
            const Vec3 p = test::random_point(rng);
            const double ref = naive_form(a, p);
            CHECK(std::abs(eval(q, p) - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
        }
    }
}

TEST_CASE("eval_centered examples") {
    const QuarticCoeffs x2m1 = coeffs_of({{{2, 0, 0}, 1.0}, {{0, 0, 0}, -1.0}});
    CHECK(eval_centered(x2m1, {1, 0, 0}, {3, 0, 0}) == 3.0);
    std::mt19937_64 rng(4);
    const QuarticCoeffs q = expand_to_monomials(test::random_sym(rng));
    const Vec3 p = test::random_point(rng);
    CHECK(eval_centered(q, {0, 0, 0}, p) == eval(q, p));
    const QuarticCoeffs bound = coeffs_of({{{4, 0, 0}, 1.0}, {{0, 4, 0}, 1.0}, {{0, 0, 4}, 1.0}, {{0, 0, 0}, -1.0}});
    CHECK(eval_centered(bound, {0.5, 0, 0}, {0.5, 0, 0}) == -1.0);
}

TEST_CASE("translation consistency") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const QuarticCoeffs q = expand_to_monomials(test::random_sym(rng));
        const Vec3 c = test::random_point(rng, -1, 1);
        const Vec3 p = test::random_point(rng);
        CHECK(std::abs(eval_centered(q, c, p) - eval_centered(q, {}, p - c)) <= 1e-12);
    }
}

TEST_CASE("grad_centered examples") {
    const QuarticCoeffs sphere = expand_to_monomials(test::sphere_form(1.0));
    const Vec3 g = grad_centered(sphere, {}, {1, 0, 0});
    CHECK(g.x == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(g.y == 0.0);
    CHECK(g.z == 0.0);
    const QuarticCoeffs constant = coeffs_of({{{0, 0, 0}, -1.0}});
    const Vec3 z = grad_centered(constant, {0.2, 0.1, 0.3}, {0.7, -0.4, 0.9});
    CHECK(z.x == 0.0);
    CHECK(z.y == 0.0);
    CHECK(z.z == 0.0);
}

TEST_CASE("grad_centered matches central differences") {
    std::mt19937_64 rng(6);
    const double h = 1e-5;
    int checked = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const QuarticCoeffs q = expand_to_monomials(test::random_sym(rng));
        const Vec3 c = test::random_point(rng, -1, 1);
        const Vec3 p = test::random_point(rng);
        const Vec3 g = grad_centered(q, c, p);
        if (norm(g) <= 1e-6) continue;
        Vec3 fd;
        for (int a = 0; a < 3; ++a) {
            Vec3 lo = p, hi = p;
            lo[a] -= h;
            hi[a] += h;
            fd[a] = (eval_centered(q, c, hi) - eval_centered(q, c, lo)) / (2 * h);
        }
        CHECK(norm(g - fd) <= 1e-6 * norm(g));
        ++checked;
    }
    CHECK(checked > 400);
    Vec3 g2;
    const QuarticCoeffs q = expand_to_monomials(test::random_sym(rng));
    const double v = eval_grad_centered(q, {0.1, 0.2, 0.3}, {0.4, -0.5, 0.6}, g2);
    CHECK(v == eval_centered(q, {0.1, 0.2, 0.3}, {0.4, -0.5, 0.6}));
    CHECK(norm(g2 - grad_centered(q, {0.1, 0.2, 0.3}, {0.4, -0.5, 0.6})) == 0.0);
}

TEST_CASE("restrict_to_ray examples") {
    const QuarticCoeffs sphere = expand_to_monomials(test::sphere_form(1.0));
    const auto c = restrict_to_ray(sphere, {}, {0, 0, -3}, {0, 0, 1});
    CHECK(std::abs(eval_univariate(c, 2.0)) <= 1e-12);
    CHECK(std::abs(eval_univariate(c, 4.0)) <= 1e-12);
    CHECK(eval_univariate(c, 3.0) < 0.0);
    CHECK(eval_univariate(c, 1.0) > 0.0);

    const QuarticCoeffs bound = coeffs_of({{{4, 0, 0}, 1.0}, {{0, 4, 0}, 1.0}, {{0, 0, 4}, 1.0}, {{0, 0, 0}, -1.0}});
    const auto b = restrict_to_ray(bound, {}, {}, {1, 0, 0});
    const std::array<double, 5> expect{1, 0, 0, 0, -1};
    CHECK(b == expect);

    CHECK_THROWS_AS(restrict_to_ray(bound, {}, {}, {1.01, 0, 0}), InvalidArgument);
    CHECK_NOTHROW(restrict_to_ray(bound, {}, {}, {1.0 + 5e-10, 0, 0}));
}

TEST_CASE("restrict_to_ray matches pointwise evaluation and the leading-term identity") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ut(-3.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        const SymMatrix10 a = test::random_sym(rng);
        const QuarticCoeffs q = expand_to_monomials(a);
        const Vec3 c = test::random_point(rng, -1, 1);
        const Vec3 o = test::random_point(rng, -2, 2);
        const Vec3 d = test::random_unit(rng);
        const auto coef = restrict_to_ray(q, c, o, d);
        for (int k = 0; k < 20; ++k) {
            const double t = ut(rng);
            const double ref = eval_centered(q, c, o + t * d);
            CHECK(std::abs(eval_univariate(coef, t) - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
        }
        const auto u = quadratic_monomials(d);
        const SymMatrix6 f = fourth_block(a);
        double lead = 0.0;
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) lead += u[i] * f(i, j) * u[j];
        CHECK(std::abs(coef[0] - lead) <= 1e-10);
    }
}

TEST_CASE("fourth_block examples") {
    CHECK(fourth_block(SymMatrix10::identity()) == SymMatrix6::identity());
    SymMatrix10 q;
    q.set(0, 0, -0.3);
    for (int i = 4; i < 7; ++i) q.set(i, i, 1.0);
    SymMatrix6 d;
    for (int i = 0; i < 3; ++i) d.set(i, i, 1.0);
    CHECK(fourth_block(q) == d);

    std::mt19937_64 rng(8);
    const SymMatrix10 h = test::random_sym(rng);
    const SymMatrix6 sum = fourth_block(h + q);
    const SymMatrix6 fh = fourth_block(h);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) CHECK(sum(i, j) == fh(i, j) + d(i, j));
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) CHECK(fh(i, j) == h(i + 4, j + 4));
}

TEST_CASE("gram equals B times B") {
    std::mt19937_64 rng(9);
    const SymMatrix10 b = test::random_sym(rng);
    const SymMatrix10 g = gram(b);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) {
            double s = 0.0;
            for (int k = 0; k < 10; ++k) s += b(i, k) * b(j, k);
            CHECK(g(i, j) == doctest::Approx(s).epsilon(1e-14));
        }
}
