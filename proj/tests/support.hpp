#pragma once

#include <cmath>
#include <random>

#include "ias/primitive.hpp"
#include "ias/scene.hpp"

namespace test {

using ias::Vec3;

inline Vec3 random_point(std::mt19937_64& rng, double lo = -1.1, double hi = 1.1) {
    std::uniform_real_distribution<double> u(lo, hi);
    const double x = u(rng);
    const double y = u(rng);
    const double z = u(rng);
    return {x, y, z};
}

inline Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    for (;;) {
        const double x = n(rng);
        const double y = n(rng);
        const double z = n(rng);
        const double len = std::sqrt(x * x + y * y + z * z);
        if (len > 1e-3) return {x / len, y / len, z / len};
    }
}

inline ias::SymMatrix10 random_sym(std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    ias::SymMatrix10 m;
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j <= i; ++j) m.set(i, j, u(rng));
    return m;
}

inline ias::RawPrimitiveParams random_raw(std::mt19937_64& rng, double b_sigma = 0.3) {
    std::normal_distribution<double> nb(0.0, b_sigma);
    std::uniform_real_distribution<double> ur(-3.0, 3.0);
    std::uniform_real_distribution<double> uc(-1.5, 1.5);
    ias::RawPrimitiveParams raw;
    for (double& b : raw.b) b = nb(rng);
    raw.r_raw = ur(rng);
    const double cx = uc(rng);
    const double cy = uc(rng);
    const double cz = uc(rng);
    raw.c_raw = {cx, cy, cz};
    return raw;
}

/// (x² + y² + z²)² − r⁴ as a quadratic form: zero set is the sphere of radius r.
inline ias::SymMatrix10 sphere_form(double r = 1.0) {
    ias::SymMatrix10 a;
    a.set(0, 0, -r * r * r * r);
    for (int i = 4; i < 7; ++i)
        for (int j = 4; j < 7; ++j) a.set(i, j, 1.0);
    return a;
}

inline ias::AssembledPrimitive sphere_primitive(double r = 1.0, Vec3 center = {}) {
    return ias::make_primitive(sphere_form(r), center, r * r * r * r);
}

}  // namespace test
