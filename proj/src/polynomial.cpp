#include "ias/polynomial.hpp"

#include <cmath>

#include "ias/error.hpp"

namespace ias {
namespace {

constexpr std::array<Exponents, kNumMonomials> kBasis{{
    {0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {2, 0, 0},
    {0, 2, 0}, {0, 0, 2}, {1, 1, 0}, {0, 1, 1}, {1, 0, 1},
}};

struct CoeffTable {
    std::array<Exponents, kNumQuarticCoeffs> exps{};
    // Index lookup for (i, j, k) with each exponent in 0..4.
    std::array<int, 125> lookup{};

    constexpr CoeffTable() {
        for (auto& l : lookup) l = -1;
        int n = 0;
        for (int d = 0; d <= 4; ++d)
            for (int i = d; i >= 0; --i)
                for (int j = d - i; j >= 0; --j) {
                    const int k = d - i - j;
                    exps[n] = {i, j, k};
                    lookup[i * 25 + j * 5 + k] = n;
                    ++n;
                }
    }
};

constexpr CoeffTable kTable{};

struct Powers {
    std::array<double, 5> x, y, z;
};

Powers powers(const Vec3& d) {
    Powers p;
    p.x[0] = p.y[0] = p.z[0] = 1.0;
    for (int e = 1; e <= 4; ++e) {
        p.x[e] = p.x[e - 1] * d.x;
        p.y[e] = p.y[e - 1] * d.y;
        p.z[e] = p.z[e - 1] * d.z;
    }
    return p;
}

}  // namespace

MonomialVector monomials(const Vec3& p) {
    return {1.0, p.x, p.y, p.z, p.x * p.x, p.y * p.y, p.z * p.z, p.x * p.y, p.y * p.z, p.z * p.x};
}

std::array<double, 6> quadratic_monomials(const Vec3& p) {
    return {p.x * p.x, p.y * p.y, p.z * p.z, p.x * p.y, p.y * p.z, p.z * p.x};
}

SymMatrix10 gram(const SymMatrix10& b) {
    SymMatrix10 out;
    for (int i = 0; i < kNumMonomials; ++i)
        for (int j = 0; j <= i; ++j) {
            double s = 0.0;
            for (int l = 0; l < kNumMonomials; ++l) s += b(i, l) * b(j, l);
            out.set(i, j, s);
        }
    return out;
}

int QuarticCoeffs::index(int i, int j, int k) {
    if (i < 0 || j < 0 || k < 0 || i + j + k > 4)
        throw InvalidArgument("monomial exponent out of quartic range");
    return kTable.lookup[i * 25 + j * 5 + k];
}

Exponents QuarticCoeffs::exponents(int index) {
    if (index < 0 || index >= kNumQuarticCoeffs) throw InvalidArgument("coefficient index out of range");
    return kTable.exps[index];
}

double eval_form(const SymMatrix10& a, const Vec3& p) {
    const MonomialVector v = monomials(p);
    double s = 0.0;
    for (int i = 0; i < kNumMonomials; ++i) {
        double row = 0.0;
        for (int j = 0; j < kNumMonomials; ++j) row += a(i, j) * v[j];
        s += v[i] * row;
    }
    return s;
}

QuarticCoeffs expand_to_monomials(const SymMatrix10& a) {
    QuarticCoeffs q;
    for (int i = 0; i < kNumMonomials; ++i)
        for (int j = 0; j < kNumMonomials; ++j) {
            const Exponents& ei = kBasis[i];
            const Exponents& ej = kBasis[j];
            q.at(ei.i + ej.i, ei.j + ej.j, ei.k + ej.k) += a(i, j);
        }
    return q;
}

double eval_centered(const QuarticCoeffs& q, const Vec3& center, const Vec3& p) {
    const Powers pw = powers(p - center);
    double s = 0.0;
    for (int n = 0; n < kNumQuarticCoeffs; ++n) {
        const Exponents& e = kTable.exps[n];
        s += q.a[n] * (pw.x[e.i] * pw.y[e.j] * pw.z[e.k]);
    }
    return s;
}

double eval_grad_centered(const QuarticCoeffs& q, const Vec3& center, const Vec3& p, Vec3& grad) {
    const Powers pw = powers(p - center);
    double s = 0.0;
    Vec3 g{};
    for (int n = 0; n < kNumQuarticCoeffs; ++n) {
        const Exponents& e = kTable.exps[n];
        const double c = q.a[n];
        s += c * (pw.x[e.i] * pw.y[e.j] * pw.z[e.k]);
        if (e.i > 0) g.x += c * e.i * pw.x[e.i - 1] * pw.y[e.j] * pw.z[e.k];
        if (e.j > 0) g.y += c * e.j * pw.x[e.i] * pw.y[e.j - 1] * pw.z[e.k];
        if (e.k > 0) g.z += c * e.k * pw.x[e.i] * pw.y[e.j] * pw.z[e.k - 1];
    }
    grad = g;
    return s;
}

Vec3 grad_centered(const QuarticCoeffs& q, const Vec3& center, const Vec3& p) {
    Vec3 g;
    eval_grad_centered(q, center, p, g);
    return g;
}

std::array<double, 5> restrict_to_ray(const QuarticCoeffs& q, const Vec3& center,
                                      const Vec3& origin, const Vec3& dir) {
    if (!(std::abs(norm(dir) - 1.0) <= 1e-9)) throw InvalidArgument("ray direction must have unit norm");

    // Powers of each shifted coordinate (o − c) + t·d as polynomials in t, ascending degree.
    using Poly = std::array<double, 5>;
    const Vec3 o = origin - center;
    std::array<std::array<Poly, 5>, 3> axis{};
    for (int ax = 0; ax < 3; ++ax) {
        axis[ax][0] = {1.0, 0, 0, 0, 0};
        for (int e = 1; e <= 4; ++e) {
            const Poly& prev = axis[ax][e - 1];
            Poly& cur = axis[ax][e];
            for (int d = 0; d <= 4; ++d) {
                cur[d] = prev[d] * o[ax] + (d > 0 ? prev[d - 1] * dir[ax] : 0.0);
            }
        }
    }

    Poly acc{};
    for (int n = 0; n < kNumQuarticCoeffs; ++n) {
        const Exponents& e = kTable.exps[n];
        const double c = q.a[n];
        if (c == 0.0) continue;
        const Poly& px = axis[0][e.i];
        const Poly& py = axis[1][e.j];
        const Poly& pz = axis[2][e.k];
        for (int a = 0; a <= e.i; ++a) {
            for (int b = 0; b <= e.j; ++b) {
                const double xy = px[a] * py[b];
                for (int k = 0; k <= e.k; ++k) acc[a + b + k] += c * xy * pz[k];
            }
        }
    }
    return {acc[4], acc[3], acc[2], acc[1], acc[0]};
}

SymMatrix6 fourth_block(const SymMatrix10& a) {
    SymMatrix6 out;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j <= i; ++j) out.set(i, j, a(i + 4, j + 4));
    return out;
}

}  // namespace ias
