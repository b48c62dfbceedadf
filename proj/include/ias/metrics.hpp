#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ias/mesh.hpp"
#include "ias/scene.hpp"

namespace ias {

using InsideFn = std::function<bool(const Vec3&)>;

/// Monte-Carlo |A ∩ B| / |A ∪ B| over n uniform domain points; 0 when the union is empty.
double iou(const InsideFn& a, const InsideFn& b, std::size_t n, const Box3& domain, std::uint64_t seed);

/// Uniform-grid nearest-neighbor index over a fixed point set.
class NearestIndex {
public:
    explicit NearestIndex(std::vector<Vec3> points);
    ~NearestIndex();
    NearestIndex(NearestIndex&&) noexcept;
    NearestIndex& operator=(NearestIndex&&) noexcept;

    /// Euclidean distance to the closest indexed point.
    double distance(const Vec3& q) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Distance from every query to its nearest target (OpenMP over queries).
std::vector<double> nearest_distances(const std::vector<Vec3>& queries, const std::vector<Vec3>& targets);

namespace serial {
/// Brute-force double loop.
std::vector<double> nearest_distances(const std::vector<Vec3>& queries, const std::vector<Vec3>& targets);
}

/// 0.5 · (mean nearest distance a→b + mean nearest distance b→a).
double chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

struct FScore {
    double precision = 0.0;  // percent
    double recall = 0.0;     // percent
    double fscore = 0.0;     // percent
};

/// Precision, recall and their harmonic mean (all in [0, 100]) at threshold tau.
FScore fscore_detail(const std::vector<Vec3>& pred, const std::vector<Vec3>& gt, double tau);
double fscore(const std::vector<Vec3>& pred, const std::vector<Vec3>& gt, double tau);

struct MetricReport {
    double iou = 0.0;
    double chamfer = 0.0;
    double fscore = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double tau = 0.02;
    std::size_t n_points = 0;
    std::uint64_t seed = 0;

    std::string to_json() const;
    std::string to_table() const;
};

struct EvalOptions {
    double tau = 0.02;
    std::size_t n_points = 100000;     // surface points per side for Chamfer / F-score
    std::size_t n_iou_points = 100000;  // volume points for IoU
    int resolution = 128;              // extraction resolution for the scene surface
    Box3 domain = kDefaultDomain;
    std::uint64_t seed = 0;
};

/// Scene vs ground-truth mesh. The scene surface is its extracted mesh.
MetricReport evaluate(const Scene& scene, const TriMesh& gt, const EvalOptions& opt = {});

}  // namespace ias
