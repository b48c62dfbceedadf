#include "ias/primitive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ias/error.hpp"
#include "ias/symeig.hpp"

namespace ias {

std::array<double, kParamsPerPrimitive> RawPrimitiveParams::flatten() const {
    std::array<double, kParamsPerPrimitive> out{};
    std::copy(b.begin(), b.end(), out.begin());
    out[kFlatR] = r_raw;
    out[kFlatC + 0] = c_raw.x;
    out[kFlatC + 1] = c_raw.y;
    out[kFlatC + 2] = c_raw.z;
    return out;
}

RawPrimitiveParams RawPrimitiveParams::unflatten(std::span<const double, kParamsPerPrimitive> flat) {
    RawPrimitiveParams raw;
    std::copy(flat.begin(), flat.begin() + kNumBParams, raw.b.begin());
    raw.r_raw = flat[kFlatR];
    raw.c_raw = {flat[kFlatC], flat[kFlatC + 1], flat[kFlatC + 2]};
    return raw;
}

SymMatrix10 bound_form(double r) {
    SymMatrix10 q;
    q.set(0, 0, -r);
    q.set(4, 4, 1.0);
    q.set(5, 5, 1.0);
    q.set(6, 6, 1.0);
    return q;
}

double clamped_sigmoid(double raw) {
    const double x = std::clamp(raw, -kActivationClamp, kActivationClamp);
    // sigmoid(40) rounds to 1; stay strictly below it.
    return std::min(1.0 / (1.0 + std::exp(-x)), std::nextafter(1.0, 0.0));
}

double clamped_tanh(double raw) {
    return std::tanh(std::clamp(raw, -kActivationClamp, kActivationClamp));
}

AssembledPrimitive assemble(const RawPrimitiveParams& raw, double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("alpha must be positive and finite");
    const auto flat = raw.flatten();
    if (!std::all_of(flat.begin(), flat.end(), [](double v) { return std::isfinite(v); }))
        throw InvalidArgument("raw primitive parameters must be finite");

    AssembledPrimitive prim;
    prim.r = clamped_sigmoid(raw.r_raw);
    // tanh saturates to exactly ±1 in double precision well before the clamp; keep the
    // center strictly inside the open box.
    constexpr double kCenterLimit = 1.0 - 1e-12;
    prim.center = {std::clamp(clamped_tanh(raw.c_raw.x), -kCenterLimit, kCenterLimit),
                   std::clamp(clamped_tanh(raw.c_raw.y), -kCenterLimit, kCenterLimit),
                   std::clamp(clamped_tanh(raw.c_raw.z), -kCenterLimit, kCenterLimit)};

    const SymMatrix10 b = SymMatrix10::from_lower(raw.b);
    prim.a = gram(b) + bound_form(prim.r);
    for (int i = 0; i < kNumMonomials; ++i) prim.a.add(i, i, alpha);
    prim.coeffs = expand_to_monomials(prim.a);
    return prim;
}

AssembledPrimitive make_primitive(const SymMatrix10& a, const Vec3& center, double r) {
    AssembledPrimitive prim;
    prim.a = a;
    prim.center = center;
    prim.r = r;
    prim.coeffs = expand_to_monomials(a);
    return prim;
}

double min_eigenvalue(const AssembledPrimitive& prim) { return ias::min_eigenvalue(prim.a); }

bool is_empty(const AssembledPrimitive& prim, double tol) { return min_eigenvalue(prim) >= -tol; }

double closedness_margin(const AssembledPrimitive& prim) { return ias::min_eigenvalue(fourth_block(prim.a)); }

double grid_probe_min(const AssembledPrimitive& prim, int n, const Box3& domain) {
    if (n < 2) throw InvalidArgument("grid probe needs at least 2 nodes per axis");
    const Vec3 e = domain.extent();
    const double step = 1.0 / (n - 1);
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const Vec3 p{domain.lo.x + e.x * (i * step), domain.lo.y + e.y * (j * step),
                             domain.lo.z + e.z * (k * step)};
                best = std::min(best, prim.eval(p));
            }
    return best;
}

}  // namespace ias
