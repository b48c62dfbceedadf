#pragma once

#include <array>
#include <span>

#include "ias/polynomial.hpp"
#include "ias/vec3.hpp"

namespace ias {

inline constexpr double kDefaultAlpha = 1e-4;
/// Pre-activation magnitude limit for the scale and center logits.
inline constexpr double kActivationClamp = 40.0;
/// Eigenvalue tolerance below which a coefficient matrix still counts as PSD.
inline constexpr double kEmptyTolerance = 1e-9;

inline constexpr int kNumBParams = SymMatrix10::kFreeEntries;  // 55
inline constexpr int kParamsPerPrimitive = kNumBParams + 1 + 3;  // 59

/// Unconstrained optimization variables of one primitive.
struct RawPrimitiveParams {
    std::array<double, kNumBParams> b{};  // lower triangle of symmetric B, row-major
    double r_raw = 0.0;
    Vec3 c_raw{};

    /// Flat layout: b[0..55), r_raw, c_raw.x, c_raw.y, c_raw.z.
    std::array<double, kParamsPerPrimitive> flatten() const;
    static RawPrimitiveParams unflatten(std::span<const double, kParamsPerPrimitive> flat);

    friend bool operator==(const RawPrimitiveParams&, const RawPrimitiveParams&) = default;
};

inline constexpr int kFlatR = kNumBParams;
inline constexpr int kFlatC = kNumBParams + 1;

/// Coefficient matrix of the bound surface x⁴ + y⁴ + z⁴ − R.
SymMatrix10 bound_form(double r);

double clamped_sigmoid(double raw);
double clamped_tanh(double raw);

/// A primitive in evaluation-ready form. A is the (uncentered) quadratic-form matrix;
/// the primitive evaluates it at p − center.
struct AssembledPrimitive {
    SymMatrix10 a;
    Vec3 center{};
    double r = 0.0;
    QuarticCoeffs coeffs;

    double eval(const Vec3& p) const { return eval_centered(coeffs, center, p); }
    Vec3 grad(const Vec3& p) const { return grad_centered(coeffs, center, p); }
};

/// A = BBᵀ + αI + Q(R) with R = sigmoid(r_raw), center = tanh(c_raw).
/// Throws InvalidArgument on non-finite input or alpha ≤ 0.
AssembledPrimitive assemble(const RawPrimitiveParams& raw, double alpha = kDefaultAlpha);

/// Wraps an arbitrary coefficient matrix. Used for hand-built forms that are not
/// reachable through `assemble` (e.g. test fixtures); no constraint is implied.
AssembledPrimitive make_primitive(const SymMatrix10& a, const Vec3& center = {}, double r = 0.0);

/// True when min eig(A) ≥ −tol: vAvᵀ is then non-negative up to tol·‖v‖², so no interior.
bool is_empty(const AssembledPrimitive& prim, double tol = kEmptyTolerance);

double min_eigenvalue(const AssembledPrimitive& prim);

/// Minimum eigenvalue of the quartic-term block of A.
double closedness_margin(const AssembledPrimitive& prim);

/// Smallest value of the primitive over an n³ node lattice spanning the domain. A
/// non-negative result with is_empty false marks an eigenvalue/grid disagreement.
double grid_probe_min(const AssembledPrimitive& prim, int n = 64, const Box3& domain = kDefaultDomain);

}  // namespace ias
