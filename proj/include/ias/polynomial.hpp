#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "ias/vec3.hpp"

namespace ias {

/// Number of entries in the monomial vector v = [1, x, y, z, x², y², z², xy, yz, zx].
inline constexpr int kNumMonomials = 10;
/// Number of trivariate monomials of total degree at most four.
inline constexpr int kNumQuarticCoeffs = 35;

using MonomialVector = std::array<double, kNumMonomials>;

/// Evaluates v at p. Cross terms are ordered cyclically (xy, yz, zx) at indices 7..9.
MonomialVector monomials(const Vec3& p);

/// Dense symmetric N×N matrix. Writes through `set` keep both triangles equal.
template <int N>
class SymMatrix {
public:
    static constexpr int kSize = N;
    static constexpr int kFreeEntries = N * (N + 1) / 2;

    constexpr SymMatrix() = default;

    static constexpr SymMatrix identity() {
        SymMatrix m;
        for (int i = 0; i < N; ++i) m.data_[i * N + i] = 1.0;
        return m;
    }

    /// Builds the matrix from its lower triangle, row-major: (0,0), (1,0), (1,1), (2,0), ...
    static constexpr SymMatrix from_lower(std::span<const double, kFreeEntries> lower) {
        SymMatrix m;
        std::size_t k = 0;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j <= i; ++j) m.set(i, j, lower[k++]);
        return m;
    }

    constexpr std::array<double, kFreeEntries> lower() const {
        std::array<double, kFreeEntries> out{};
        std::size_t k = 0;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j <= i; ++j) out[k++] = (*this)(i, j);
        return out;
    }

    constexpr double operator()(int i, int j) const { return data_[i * N + j]; }

    constexpr void set(int i, int j, double v) {
        data_[i * N + j] = v;
        data_[j * N + i] = v;
    }

    constexpr void add(int i, int j, double v) {
        data_[i * N + j] += v;
        if (i != j) data_[j * N + i] += v;
    }

    constexpr SymMatrix& operator+=(const SymMatrix& o) {
        for (int k = 0; k < N * N; ++k) data_[k] += o.data_[k];
        return *this;
    }
    friend constexpr SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }

    /// Row-major view of all N² entries.
    constexpr const std::array<double, N * N>& data() const { return data_; }

    friend constexpr bool operator==(const SymMatrix&, const SymMatrix&) = default;

private:
    std::array<double, N * N> data_{};
};

using SymMatrix10 = SymMatrix<10>;
using SymMatrix6 = SymMatrix<6>;

/// B·Bᵀ for symmetric B (so equal to B²).
SymMatrix10 gram(const SymMatrix10& b);

/// Exponent triple of a monomial x^i y^j z^k.
struct Exponents {
    int i = 0;
    int j = 0;
    int k = 0;
    constexpr int degree() const { return i + j + k; }
    friend constexpr bool operator==(const Exponents&, const Exponents&) = default;
};

/// Dense coefficients a_ijk of a trivariate quartic, i+j+k ≤ 4, in graded-lex order:
/// degree ascending, then x exponent descending, then y exponent descending.
struct QuarticCoeffs {
    std::array<double, kNumQuarticCoeffs> a{};

    static int index(int i, int j, int k);
    static Exponents exponents(int index);

    double& at(int i, int j, int k) { return a[index(i, j, k)]; }
    double at(int i, int j, int k) const { return a[index(i, j, k)]; }

    friend bool operator==(const QuarticCoeffs&, const QuarticCoeffs&) = default;
};

/// vAvᵀ with v the monomial vector at p.
double eval_form(const SymMatrix10& a, const Vec3& p);

/// Collapses the 55 quadratic-form entries into the 35 monomial coefficients.
QuarticCoeffs expand_to_monomials(const SymMatrix10& a);

/// Σ a_ijk (p−c)ˣ... ; the centered coordinates are formed first, so
/// eval_centered(q, c, p) and eval_centered(q, 0, p − c) share one arithmetic path.
double eval_centered(const QuarticCoeffs& q, const Vec3& center, const Vec3& p);
inline double eval(const QuarticCoeffs& q, const Vec3& p) { return eval_centered(q, {}, p); }

Vec3 grad_centered(const QuarticCoeffs& q, const Vec3& center, const Vec3& p);

/// Value and gradient in one pass.
double eval_grad_centered(const QuarticCoeffs& q, const Vec3& center, const Vec3& p, Vec3& grad);

/// Univariate coefficients [c4, c3, c2, c1, c0] of t ↦ q(origin + t·dir − center).
/// Throws InvalidArgument unless |‖dir‖ − 1| ≤ 1e-9.
std::array<double, 5> restrict_to_ray(const QuarticCoeffs& q, const Vec3& center,
                                      const Vec3& origin, const Vec3& dir);

/// Horner evaluation of [c4, c3, c2, c1, c0] at t.
constexpr double eval_univariate(const std::array<double, 5>& c, double t) {
    return (((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4];
}

/// Principal 6×6 block over the degree-2 monomials (indices 4..9): the quartic-term matrix.
SymMatrix6 fourth_block(const SymMatrix10& a);

/// Degree-2 monomial vector u = [x², y², z², xy, yz, zx].
std::array<double, 6> quadratic_monomials(const Vec3& p);

}  // namespace ias
