#pragma once

#include <array>
#include <optional>
#include <vector>

#include "ias/scene.hpp"

namespace ias {

/// Real roots of c[0]t⁴ + c[1]t³ + c[2]t² + c[3]t + c[4], ascending, Newton-polished,
/// with roots closer than 1e-7 merged. Leading coefficients below 1e-14 in magnitude
/// drop the degree. Throws InvalidArgument for the zero polynomial.
std::vector<double> solve_quartic(const std::array<double, 5>& c);

/// Real roots of c[0]t³ + c[1]t² + c[2]t + c[3] (unpolished, may contain near-duplicates).
std::vector<double> solve_cubic(double a, double b, double c, double d);
std::vector<double> solve_quadratic(double a, double b, double c);

struct RayHit {
    double t = 0.0;
    Vec3 point{};
    int primitive_index = 0;
    Vec3 normal{};
};

/// Smallest ray parameter in (1e-6, t_max] where the union surface is entered: the
/// union value is within 1e-6 of zero there and changes from ≥ 0 to < 0 across it.
/// Primitives with a PSD matrix have no interior and are skipped.
std::optional<RayHit> ray_intersect(const Scene& scene, const Vec3& origin, const Vec3& dir,
                                    double t_max);

/// Per-scene precomputation for repeated ray casts (which primitives are non-empty).
class RayCaster {
public:
    explicit RayCaster(const Scene& scene);
    std::optional<RayHit> intersect(const Vec3& origin, const Vec3& dir, double t_max) const;

private:
    const Scene* scene_;
    std::vector<int> active_;
    std::vector<double> radius_;  // bounding-ball radius per active primitive
};

}  // namespace ias
