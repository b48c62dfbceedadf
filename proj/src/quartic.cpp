#include "ias/quartic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ias/error.hpp"

namespace ias {
namespace {

constexpr double kDegenerateLeading = 1e-14;
constexpr double kMergeTolerance = 1e-7;
constexpr double kRayTMin = 1e-6;
constexpr double kSurfaceTolerance = 1e-6;
constexpr double kCrossingProbe = 1e-7;

struct Candidate {
    double t;
    bool exact;  // from a non-negative discriminant branch
};

void push_quadratic(double a, double b, double c, std::vector<Candidate>& out) {
    // Same as solve_quadratic, but slightly negative discriminants count as a double root.
    const double disc = b * b - 4.0 * a * c;
    const double scale = std::max({b * b, std::abs(4.0 * a * c), 1e-300});
    if (disc < 0.0) {
        if (disc > -1e-10 * scale) out.push_back({-b / (2.0 * a), false});
        return;
    }
    const double sq = std::sqrt(disc);
    const double qq = -0.5 * (b + std::copysign(sq, b));
    if (qq != 0.0) {
        out.push_back({qq / a, true});
        out.push_back({c / qq, true});
    } else {
        out.push_back({0.0, true});
    }
}

double eval_poly(const std::array<double, 5>& c, double t, double& deriv) {
    double p = c[0];
    double d = 0.0;
    for (int i = 1; i < 5; ++i) {
        d = d * t + p;
        p = p * t + c[i];
    }
    deriv = d;
    return p;
}

double polish(const std::array<double, 5>& c, double t) {
    double d = 0.0;
    double f = eval_poly(c, t, d);
    for (int it = 0; it < 5; ++it) {
        if (f == 0.0 || d == 0.0) break;
        const double next = t - f / d;
        double dn = 0.0;
        const double fn = eval_poly(c, next, dn);
        if (!std::isfinite(fn) || std::abs(fn) >= std::abs(f)) break;
        t = next;
        f = fn;
        d = dn;
    }
    return t;
}

double largest_cubic_root(double p2, double p1, double p0) {
    // Monic t³ + p2 t² + p1 t + p0.
    const auto roots = solve_cubic(1.0, p2, p1, p0);
    double m = roots.empty() ? 0.0 : *std::max_element(roots.begin(), roots.end());
    for (int it = 0; it < 4; ++it) {
        const double f = ((m + p2) * m + p1) * m + p0;
        const double df = (3.0 * m + 2.0 * p2) * m + p1;
        if (df == 0.0) break;
        const double next = m - f / df;
        if (!std::isfinite(next)) break;
        const double fn = ((next + p2) * next + p1) * next + p0;
        if (std::abs(fn) >= std::abs(f)) break;
        m = next;
    }
    return m;
}

std::vector<double> finalize(const std::array<double, 5>& c, std::vector<Candidate> cands) {
    double cmax = 0.0;
    for (double v : c) cmax = std::max(cmax, std::abs(v));
    const double tol = 1e-10 * std::max(1.0, cmax);

    struct Root {
        double t;
        double residual;
    };
    std::vector<Root> roots;
    for (const Candidate& cand : cands) {
        if (!std::isfinite(cand.t)) continue;
        const double t = polish(c, cand.t);
        double d = 0.0;
        const double r = std::abs(eval_poly(c, t, d));
        if (!cand.exact && r > tol) continue;
        roots.push_back({t, r});
    }
    std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) { return a.t < b.t; });
    std::vector<double> out;
    std::vector<double> res;
    for (const Root& r : roots) {
        if (!out.empty() && r.t - out.back() < kMergeTolerance) {
            if (r.residual < res.back()) {
                out.back() = r.t;
                res.back() = r.residual;
            }
            continue;
        }
        out.push_back(r.t);
        res.push_back(r.residual);
    }
    return out;
}

}  // namespace

std::vector<double> solve_quadratic(double a, double b, double c) {
    if (a == 0.0) {
        if (b == 0.0) return {};
        return {-c / b};
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return {};
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (b + std::copysign(sq, b));
    if (q == 0.0) return {0.0};
    double r1 = q / a;
    double r2 = c / q;
    if (r1 > r2) std::swap(r1, r2);
    return {r1, r2};
}

std::vector<double> solve_cubic(double a, double b, double c, double d) {
    if (a == 0.0) return solve_quadratic(b, c, d);
    b /= a;
    c /= a;
    d /= a;
    // t = y − b/3 gives y³ + p y + q = 0.
    const double shift = b / 3.0;
    const double p = c - b * b / 3.0;
    const double q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    const double half_q = 0.5 * q;
    const double third_p = p / 3.0;
    const double disc = half_q * half_q + third_p * third_p * third_p;

    std::vector<double> roots;
    if (disc > 0.0) {
        const double u = std::cbrt(-half_q - std::copysign(std::sqrt(disc), half_q));
        const double y = (u != 0.0) ? u - third_p / u : 0.0;
        roots.push_back(y - shift);
    } else if (p == 0.0) {
        roots.push_back(-shift);
    } else {
        const double r = std::sqrt(-third_p);
        const double arg = std::clamp(-half_q / (r * r * r), -1.0, 1.0);
        const double phi = std::acos(arg);
        constexpr double kTwoPiOver3 = 2.0943951023931954923;
        for (int k = 0; k < 3; ++k) roots.push_back(2.0 * r * std::cos(phi / 3.0 - k * kTwoPiOver3) - shift);
        std::sort(roots.begin(), roots.end());
    }
    return roots;
}

std::vector<double> solve_quartic(const std::array<double, 5>& c) {
    if (std::all_of(c.begin(), c.end(), [](double v) { return v == 0.0; }))
        throw InvalidArgument("identically zero polynomial has no isolated roots");
    for (double v : c)
        if (!std::isfinite(v)) throw InvalidArgument("quartic coefficients must be finite");

    std::vector<Candidate> cands;
    if (std::abs(c[0]) < kDegenerateLeading) {
        std::array<double, 5> lowered = c;
        lowered[0] = 0.0;
        if (std::abs(c[1]) >= kDegenerateLeading) {
            for (double t : solve_cubic(c[1], c[2], c[3], c[4])) cands.push_back({t, true});
        } else if (std::abs(c[2]) >= kDegenerateLeading) {
            push_quadratic(c[2], c[3], c[4], cands);
        } else if (c[3] != 0.0) {
            cands.push_back({-c[4] / c[3], true});
        }
        return finalize(lowered, std::move(cands));
    }

    const double a = c[1] / c[0];
    const double b = c[2] / c[0];
    const double cc = c[3] / c[0];
    const double d = c[4] / c[0];
    // t = y − a/4: y⁴ + p y² + q y + r = 0.
    const double a2 = a * a;
    const double p = b - 3.0 * a2 / 8.0;
    const double q = cc - a * b / 2.0 + a2 * a / 8.0;
    const double r = d - a * cc / 4.0 + a2 * b / 16.0 - 3.0 * a2 * a2 / 256.0;
    const double shift = a / 4.0;
    const double scale = std::max({1.0, std::abs(p), std::sqrt(std::abs(r))});

    std::vector<Candidate> ys;
    const bool biquadratic = std::abs(q) <= 1e-14 * scale * scale * std::sqrt(scale);
    // Resolvent: (y² + p/2 + m)² = 2m (y − q/(4m))², with m the largest real root.
    const double m = biquadratic ? 0.0 : largest_cubic_root(p, p * p / 4.0 - r, -q * q / 8.0);
    if (m > 0.0) {
        const double s = std::sqrt(2.0 * m);
        const double k = q / (2.0 * s);
        push_quadratic(1.0, -s, p / 2.0 + m + k, ys);
        push_quadratic(1.0, s, p / 2.0 + m - k, ys);
    } else {
        std::vector<Candidate> zs;
        push_quadratic(1.0, p, r, zs);
        for (const Candidate& z : zs) {
            if (z.t > 0.0) {
                const double s = std::sqrt(z.t);
                ys.push_back({s, z.exact});
                ys.push_back({-s, z.exact});
            } else if (z.t > -1e-12 * scale) {
                ys.push_back({0.0, false});
            }
        }
    }
    for (const Candidate& y : ys) cands.push_back({y.t - shift, y.exact});
    return finalize(c, std::move(cands));
}

RayCaster::RayCaster(const Scene& scene) : scene_(&scene) {
    for (std::size_t i = 0; i < scene.size(); ++i) {
        if (is_empty(scene.primitive(i))) continue;
        active_.push_back(static_cast<int>(i));
        // Assembled primitives lie inside Σ(x − c)⁴ ≤ R, hence inside the ball of radius (3R)^¼.
        radius_.push_back(scene.has_raw() ? std::pow(3.0 * scene.primitive(i).r, 0.25) * (1.0 + 1e-6) + 1e-9
                                          : std::numeric_limits<double>::infinity());
    }
}

std::optional<RayHit> RayCaster::intersect(const Vec3& origin, const Vec3& dir, double t_max) const {
    if (!(t_max > 0.0)) throw InvalidArgument("t_max must be positive");
    struct Cand {
        double t;
        int prim;
    };
    std::vector<Cand> cands;
    for (std::size_t a = 0; a < active_.size(); ++a) {
        const int m = active_[a];
        const AssembledPrimitive& prim = scene_->primitive(m);
        if (std::isfinite(radius_[a])) {
            const Vec3 oc = origin - prim.center;
            const double b = dot(oc, dir);
            const double disc = b * b - (norm2(oc) - radius_[a] * radius_[a]);
            if (disc < 0.0 || -b + std::sqrt(disc) < kRayTMin) continue;
        }
        const auto poly = restrict_to_ray(prim.coeffs, prim.center, origin, dir);
        for (double t : solve_quartic(poly))
            if (t > kRayTMin && t <= t_max) cands.push_back({t, m});
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        return a.t < b.t || (a.t == b.t && a.prim < b.prim);
    });

    for (const Cand& cand : cands) {
        const Vec3 point = origin + cand.t * dir;
        const UnionValue here = eval_union(*scene_, point);
        if (std::abs(here.value) > kSurfaceTolerance) continue;
        const double before = eval_union(*scene_, origin + (cand.t - kCrossingProbe) * dir).value;
        const double after = eval_union(*scene_, origin + (cand.t + kCrossingProbe) * dir).value;
        if (!(before >= 0.0 && after < 0.0)) continue;

        RayHit hit;
        hit.t = cand.t;
        hit.point = point;
        hit.primitive_index = cand.prim;
        const Vec3 g = scene_->primitive(cand.prim).grad(point);
        const double n = norm(g);
        hit.normal = n > 1e-12 ? g / n : -dir;
        return hit;
    }
    return std::nullopt;
}

std::optional<RayHit> ray_intersect(const Scene& scene, const Vec3& origin, const Vec3& dir,
                                    double t_max) {
    return RayCaster(scene).intersect(origin, dir, t_max);
}

}  // namespace ias
