#include "ias/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "ias/error.hpp"
#include "ias/extractor.hpp"
#include "ias/rng.hpp"

namespace ias {

namespace {
constexpr std::uint64_t kIouStream = 0x494f5530ULL;  // "IOU0"
constexpr std::uint64_t kPredStream = 0x50524544ULL;
constexpr std::uint64_t kGtStream = 0x47545054ULL;
}  // namespace

double iou(const InsideFn& a, const InsideFn& b, std::size_t n, const Box3& domain, std::uint64_t seed) {
    const Vec3 e = domain.extent();
    long long inter = 0;
    long long uni = 0;
#pragma omp parallel for schedule(static) reduction(+ : inter, uni)
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(stream_seed(seed, kIouStream, i));
        const double x = rng.uniform();
        const double y = rng.uniform();
        const double z = rng.uniform();
        const Vec3 p{domain.lo.x + e.x * x, domain.lo.y + e.y * y, domain.lo.z + e.z * z};
        const bool ia = a(p);
        const bool ib = b(p);
        inter += (ia && ib) ? 1 : 0;
        uni += (ia || ib) ? 1 : 0;
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// ---------------------------------------------------------------------------

struct NearestIndex::Impl {
    std::vector<Vec3> pts;  // sorted by cell
    std::vector<std::uint32_t> offsets;
    Vec3 lo;
    double h = 1.0;
    int n[3] = {1, 1, 1};

    int cell_coord(double v, int axis) const {
        return std::clamp(static_cast<int>(std::floor((v - lo[axis]) / h)), 0, n[axis] - 1);
    }
    std::size_t cell_id(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * n[1] + j) * n[0] + i;
    }
};

NearestIndex::NearestIndex(std::vector<Vec3> points) : impl_(std::make_unique<Impl>()) {
    if (points.empty()) throw InvalidArgument("nearest-neighbor index needs at least one point");
    Impl& s = *impl_;
    Box3 b{points[0], points[0]};
    for (const Vec3& p : points) {
        b.lo = {std::min(b.lo.x, p.x), std::min(b.lo.y, p.y), std::min(b.lo.z, p.z)};
        b.hi = {std::max(b.hi.x, p.x), std::max(b.hi.y, p.y), std::max(b.hi.z, p.z)};
    }
    const Vec3 e = b.extent();
    const double longest = std::max({e.x, e.y, e.z, 1e-12});
    // About two points per cell for a surface-like set, capped per axis.
    const double cells = std::clamp(std::sqrt(points.size() / 2.0), 1.0, 256.0);
    s.h = longest / cells;
    s.lo = b.lo;
    for (int a = 0; a < 3; ++a) s.n[a] = std::max(1, static_cast<int>(std::floor(e[a] / s.h)) + 1);

    const std::size_t total = static_cast<std::size_t>(s.n[0]) * s.n[1] * s.n[2];
    std::vector<std::uint32_t> counts(total + 1, 0);
    std::vector<std::size_t> ids(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Vec3& p = points[i];
        ids[i] = s.cell_id(s.cell_coord(p.x, 0), s.cell_coord(p.y, 1), s.cell_coord(p.z, 2));
        ++counts[ids[i] + 1];
    }
    for (std::size_t c = 1; c <= total; ++c) counts[c] += counts[c - 1];
    s.offsets = counts;
    s.pts.resize(points.size());
    std::vector<std::uint32_t> fill(counts.begin(), counts.end() - 1);
    for (std::size_t i = 0; i < points.size(); ++i) s.pts[fill[ids[i]]++] = points[i];
}

NearestIndex::~NearestIndex() = default;
NearestIndex::NearestIndex(NearestIndex&&) noexcept = default;
NearestIndex& NearestIndex::operator=(NearestIndex&&) noexcept = default;

double NearestIndex::distance(const Vec3& q) const {
    const Impl& s = *impl_;
    const int c[3] = {s.cell_coord(q.x, 0), s.cell_coord(q.y, 1), s.cell_coord(q.z, 2)};
    double best2 = std::numeric_limits<double>::infinity();
    const int max_ring = std::max({s.n[0], s.n[1], s.n[2]});
    for (int r = 0; r <= max_ring; ++r) {
        const int lo[3] = {c[0] - r, c[1] - r, c[2] - r};
        const int hi[3] = {c[0] + r, c[1] + r, c[2] + r};
        for (int k = std::max(lo[2], 0); k <= std::min(hi[2], s.n[2] - 1); ++k)
            for (int j = std::max(lo[1], 0); j <= std::min(hi[1], s.n[1] - 1); ++j)
                for (int i = std::max(lo[0], 0); i <= std::min(hi[0], s.n[0] - 1); ++i) {
                    // Shell cells only.
                    if (r > 0 && i != lo[0] && i != hi[0] && j != lo[1] && j != hi[1] && k != lo[2] && k != hi[2])
                        continue;
                    const std::size_t id = s.cell_id(i, j, k);
                    for (std::uint32_t t = s.offsets[id]; t < s.offsets[id + 1]; ++t) {
                        const Vec3 d = s.pts[t] - q;
                        best2 = std::min(best2, d.x * d.x + d.y * d.y + d.z * d.z);
                    }
                }
        // Lower bound on the distance to any cell outside the searched block.
        double bound = std::numeric_limits<double>::infinity();
        for (int a = 0; a < 3; ++a) {
            if (lo[a] > 0) bound = std::min(bound, std::max(0.0, q[a] - (s.lo[a] + lo[a] * s.h)));
            if (hi[a] < s.n[a] - 1) bound = std::min(bound, std::max(0.0, s.lo[a] + (hi[a] + 1) * s.h - q[a]));
        }
        if (bound == std::numeric_limits<double>::infinity() || best2 <= bound * bound) break;
    }
    return std::sqrt(best2);
}

std::vector<double> nearest_distances(const std::vector<Vec3>& queries, const std::vector<Vec3>& targets) {
    const NearestIndex index(targets);
    std::vector<double> out(queries.size());
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < queries.size(); ++i) out[i] = index.distance(queries[i]);
    return out;
}

std::vector<double> serial::nearest_distances(const std::vector<Vec3>& queries, const std::vector<Vec3>& targets) {
    if (targets.empty()) throw InvalidArgument("nearest-neighbor search needs at least one target");
    std::vector<double> out(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) {
        double best2 = std::numeric_limits<double>::infinity();
        for (const Vec3& t : targets) {
            const Vec3 d = t - queries[i];
            best2 = std::min(best2, d.x * d.x + d.y * d.y + d.z * d.z);
        }
        out[i] = std::sqrt(best2);
    }
    return out;
}

namespace {

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double fraction_within(const std::vector<double>& d, double tau) {
    std::size_t k = 0;
    for (double x : d) k += x <= tau ? 1 : 0;
    return d.empty() ? 0.0 : static_cast<double>(k) / static_cast<double>(d.size());
}

}  // namespace

double chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    if (a.empty() || b.empty()) throw InvalidArgument("chamfer needs non-empty point sets");
    return 0.5 * (mean(nearest_distances(a, b)) + mean(nearest_distances(b, a)));
}

FScore fscore_detail(const std::vector<Vec3>& pred, const std::vector<Vec3>& gt, double tau) {
    if (pred.empty() || gt.empty()) throw InvalidArgument("F-score needs non-empty point sets");
    if (!(tau > 0.0)) throw InvalidArgument("F-score threshold must be positive");
    FScore f;
    const double p = fraction_within(nearest_distances(pred, gt), tau);
    const double r = fraction_within(nearest_distances(gt, pred), tau);
    f.precision = 100.0 * p;
    f.recall = 100.0 * r;
    f.fscore = (p + r) > 0.0 ? 100.0 * 2.0 * p * r / (p + r) : 0.0;
    return f;
}

double fscore(const std::vector<Vec3>& pred, const std::vector<Vec3>& gt, double tau) {
    return fscore_detail(pred, gt, tau).fscore;
}

std::string MetricReport::to_json() const {
    nlohmann::ordered_json j;
    j["iou"] = iou;
    j["chamfer"] = chamfer;
    j["fscore"] = fscore;
    j["precision"] = precision;
    j["recall"] = recall;
    j["tau"] = tau;
    j["n_points"] = n_points;
    j["seed"] = seed;
    return j.dump(2);
}

std::string MetricReport::to_table() const {
    std::ostringstream out;
    out << std::fixed;
    out << std::left << std::setw(12) << "metric" << std::right << std::setw(14) << "value" << '\n';
    out << std::left << std::setw(12) << "IoU" << std::right << std::setw(14) << std::setprecision(4) << iou << '\n';
    out << std::left << std::setw(12) << "Chamfer" << std::right << std::setw(14) << std::setprecision(6) << chamfer << '\n';
    out << std::left << std::setw(12) << "F-score" << std::right << std::setw(14) << std::setprecision(2) << fscore << '\n';
    out << std::left << std::setw(12) << "precision" << std::right << std::setw(14) << precision << '\n';
    out << std::left << std::setw(12) << "recall" << std::right << std::setw(14) << recall << '\n';
    out << std::left << std::setw(12) << "tau" << std::right << std::setw(14) << std::setprecision(4) << tau << '\n';
    out << std::left << std::setw(12) << "points" << std::right << std::setw(14) << n_points << '\n';
    return out.str();
}

MetricReport evaluate(const Scene& scene, const TriMesh& gt, const EvalOptions& opt) {
    MetricReport rep;
    rep.tau = opt.tau;
    rep.n_points = opt.n_points;
    rep.seed = opt.seed;

    const MeshSignOracle oracle(gt);
    rep.iou = iou([&](const Vec3& p) { return eval_union(scene, p).value < 0.0; },
                  [&](const Vec3& p) { return oracle.inside(p); }, opt.n_iou_points, opt.domain, opt.seed);

    const TriMesh pred_mesh = extract_mesh(scene, opt.resolution, opt.domain);
    if (pred_mesh.triangles.empty()) {
        rep.chamfer = std::numeric_limits<double>::infinity();
        return rep;
    }
    std::vector<Vec3> pred, ref;
    for (const auto& s : sample_surface(pred_mesh, opt.n_points, stream_seed(opt.seed, kPredStream, 0)))
        pred.push_back(s.point);
    for (const auto& s : sample_surface(gt, opt.n_points, stream_seed(opt.seed, kGtStream, 0))) ref.push_back(s.point);
    rep.chamfer = chamfer(pred, ref);
    const FScore f = fscore_detail(pred, ref, opt.tau);
    rep.fscore = f.fscore;
    rep.precision = f.precision;
    rep.recall = f.recall;
    return rep;
}

}  // namespace ias
