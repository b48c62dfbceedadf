#include "ias/fitter.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "ias/error.hpp"
#include "ias/parallel.hpp"
#include "ias/rng.hpp"

namespace ias {

// ---------------------------------------------------------------------------
// Config

void FitConfig::validate() const {
    if (primitives < 1 || primitives > static_cast<int>(kMaxPrimitives))
        throw InvalidArgument("primitives must be in [1, 100]");
    if (iters < 0) throw InvalidArgument("iters must be non-negative");
    if (!(lr > 0.0)) throw InvalidArgument("lr must be positive");
    for (double l : {lambda.on, lambda.in, lambda.out, lambda.normal})
        if (!(l >= 0.0)) throw InvalidArgument("loss weights must be non-negative");
    if (!(volume_batch_fraction > 0.0 && volume_batch_fraction <= 1.0))
        throw InvalidArgument("volume_batch_fraction must be in (0, 1]");
    if (!(surface_batch_fraction > 0.0 && surface_batch_fraction <= 1.0))
        throw InvalidArgument("surface_batch_fraction must be in (0, 1]");
    if (!(alpha > 0.0)) throw InvalidArgument("alpha must be positive");
    if (!(init_b_sigma >= 0.0)) throw InvalidArgument("init_b_sigma must be non-negative");
}

namespace {

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw InvalidArgument("bad numeric value for " + key + ": '" + v + "'");
    return d;
}

long long to_int(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long long d = 0;
    try {
        d = std::stoll(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw InvalidArgument("bad integer value for " + key + ": '" + v + "'");
    return d;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw InvalidArgument("bad boolean value for " + key + ": '" + v + "'");
}

std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n\"");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n\"");
    return s.substr(b, e - b + 1);
}

}  // namespace

void FitConfig::set(const std::string& key, const std::string& value) {
    if (key == "primitives" || key == "M") primitives = static_cast<int>(to_int(key, value));
    else if (key == "iters") iters = static_cast<int>(to_int(key, value));
    else if (key == "lr") lr = to_double(key, value);
    else if (key == "lambda_on") lambda.on = to_double(key, value);
    else if (key == "lambda_in") lambda.in = to_double(key, value);
    else if (key == "lambda_out") lambda.out = to_double(key, value);
    else if (key == "lambda_n") lambda.normal = to_double(key, value);
    else if (key == "volume_batch_fraction") volume_batch_fraction = to_double(key, value);
    else if (key == "surface_batch_fraction") surface_batch_fraction = to_double(key, value);
    else if (key == "alpha") alpha = to_double(key, value);
    else if (key == "seed") seed = static_cast<std::uint64_t>(to_int(key, value));
    else if (key == "prune_on_finish") prune_on_finish = to_bool(key, value);
    else if (key == "init_b_sigma") init_b_sigma = to_double(key, value);
    else throw InvalidArgument("unknown fit config key '" + key + "'");
}

void FitConfig::merge_text(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
        }
        for (const auto& [k, v] : j.items()) set(k, v.is_string() ? v.get<std::string>() : v.dump());
        return;
    }
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        if (strip(line).empty()) continue;
        const auto sep = line.find_first_of("=:");
        if (sep == std::string::npos) throw InvalidArgument("config line without '=': " + line);
        set(strip(line.substr(0, sep)), strip(line.substr(sep + 1)));
    }
}

void FitConfig::merge_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    merge_text(ss.str());
}

std::string FitConfig::to_json() const {
    nlohmann::ordered_json j;
    j["primitives"] = primitives;
    j["iters"] = iters;
    j["lr"] = lr;
    j["lambda_on"] = lambda.on;
    j["lambda_in"] = lambda.in;
    j["lambda_out"] = lambda.out;
    j["lambda_n"] = lambda.normal;
    j["volume_batch_fraction"] = volume_batch_fraction;
    j["surface_batch_fraction"] = surface_batch_fraction;
    j["alpha"] = alpha;
    j["seed"] = seed;
    j["prune_on_finish"] = prune_on_finish;
    j["init_b_sigma"] = init_b_sigma;
    return j.dump();
}

// ---------------------------------------------------------------------------
// Losses

double sign_loss(const Scene& scene, const Batch& batch, const LossWeights& w) {
    auto class_term = [&](const std::vector<Vec3>& pts, double target, double lambda) {
        if (pts.empty()) return 0.0;
        double s = 0.0;
        for (const Vec3& p : pts) {
            const double e = std::tanh(eval_union(scene, p).value) - target;
            s += e * e;
        }
        return lambda * s / static_cast<double>(pts.size());
    };
    return class_term(batch.on, 0.0, w.on) + class_term(batch.inside, -1.0, w.in) +
           class_term(batch.outside, 1.0, w.out);
}

NormalLoss normal_loss(const Scene& scene, const Batch& batch) {
    NormalLoss out;
    double s = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < batch.on.size(); ++i) {
        Vec3 n;
        try {
            n = surface_normal(scene, batch.on[i]);
        } catch (const DegenerateGradient&) {
            ++out.skipped;
            continue;
        }
        s += norm2(n - batch.on_normals[i]);
        ++used;
    }
    if (2 * out.skipped > batch.on.size())
        throw DegenerateGradient("more than half of the surface points have a vanishing gradient");
    out.value = used ? s / static_cast<double>(used) : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Gradient

namespace {

constexpr int kGLower = kNumBParams;  // 55 entries of dL/dA (lower triangle)
constexpr int kAccStride = kGLower + 3;  // plus dL/dcenter

int lower_index(int i, int j) {
    if (i < j) std::swap(i, j);
    return i * (i + 1) / 2 + j;
}

/// Local quadratic-form pieces at x = p − center.
struct FormJet {
    MonomialVector v;
    std::array<MonomialVector, 3> d{};  // ∂v/∂x_k
    MonomialVector av;                  // A v
    std::array<MonomialVector, 3> ad{};  // A d_k
};

FormJet form_jet(const SymMatrix10& a, const Vec3& x) {
    FormJet j;
    j.v = monomials(x);
    j.d[0] = {0, 1, 0, 0, 2 * x.x, 0, 0, x.y, 0, x.z};
    j.d[1] = {0, 0, 1, 0, 0, 2 * x.y, 0, x.x, x.z, 0};
    j.d[2] = {0, 0, 0, 1, 0, 0, 2 * x.z, 0, x.y, x.x};
    for (int i = 0; i < kNumMonomials; ++i) {
        double s = 0.0;
        for (int k = 0; k < kNumMonomials; ++k) s += a(i, k) * j.v[k];
        j.av[i] = s;
    }
    static constexpr int kNz[3][4] = {{1, 4, 7, 9}, {2, 5, 7, 8}, {3, 6, 8, 9}};
    for (int k = 0; k < 3; ++k)
        for (int i = 0; i < kNumMonomials; ++i) {
            double s = 0.0;
            for (int n : kNz[k]) s += a(i, n) * j.d[k][n];
            j.ad[k][i] = s;
        }
    return j;
}

double dot10(const MonomialVector& a, const MonomialVector& b) {
    double s = 0.0;
    for (int i = 0; i < kNumMonomials; ++i) s += a[i] * b[i];
    return s;
}

/// Adds the contribution of one point to the argmin primitive's accumulator.
/// w_value = dL/dS; w_grad = dL/d(∇p) or nullptr.
void add_point(const FormJet& j, const Vec3& grad_p, double w_value, const Vec3* w_grad, double* acc) {
    if (w_value != 0.0) {
        for (int r = 0; r < kNumMonomials; ++r) {
            const double wr = w_value * j.v[r];
            for (int c = 0; c <= r; ++c) acc[lower_index(r, c)] += wr * j.v[c];
        }
        acc[kGLower + 0] -= w_value * grad_p.x;
        acc[kGLower + 1] -= w_value * grad_p.y;
        acc[kGLower + 2] -= w_value * grad_p.z;
    }
    if (w_grad) {
        const Vec3& wg = *w_grad;
        // ∂g_k/∂A_rc = d_k,r v_c + v_r d_k,c
        for (int r = 0; r < kNumMonomials; ++r) {
            const double dr = wg.x * j.d[0][r] + wg.y * j.d[1][r] + wg.z * j.d[2][r];
            for (int c = 0; c <= r; ++c) {
                const double dc = wg.x * j.d[0][c] + wg.y * j.d[1][c] + wg.z * j.d[2][c];
                acc[lower_index(r, c)] += dr * j.v[c] + j.v[r] * dc;
            }
        }
        // Hessian of p at x: 2 (d_kᵀ A d_l + vᵀ A ∂²v/∂x_k∂x_l)
        double h[3][3];
        for (int k = 0; k < 3; ++k)
            for (int l = 0; l <= k; ++l) h[k][l] = h[l][k] = 2.0 * dot10(j.d[k], j.ad[l]);
        h[0][0] += 4.0 * j.av[4];
        h[1][1] += 4.0 * j.av[5];
        h[2][2] += 4.0 * j.av[6];
        h[0][1] += 2.0 * j.av[7];
        h[1][0] += 2.0 * j.av[7];
        h[1][2] += 2.0 * j.av[8];
        h[2][1] += 2.0 * j.av[8];
        h[2][0] += 2.0 * j.av[9];
        h[0][2] += 2.0 * j.av[9];
        for (int k = 0; k < 3; ++k) acc[kGLower + k] -= h[k][0] * wg.x + h[k][1] * wg.y + h[k][2] * wg.z;
    }
}

/// dL/d(∇p) for the normal term λ · ‖∇p/‖∇p‖ − n_gt‖².
Vec3 normal_weight(const Vec3& g, const Vec3& n_gt, double scale) {
    const double len = norm(g);
    const Vec3 n = g / len;
    const Vec3 e = 2.0 * (n - n_gt);
    return (scale / len) * (e - dot(n, e) * n);
}

void finalize_grad(const Scene& scene, const std::vector<double>& acc, std::vector<double>& grad) {
    const std::size_t m_count = scene.size();
    grad.assign(m_count * kParamsPerPrimitive, 0.0);
    for (std::size_t m = 0; m < m_count; ++m) {
        const double* a = acc.data() + m * kAccStride;
        const RawPrimitiveParams& raw = scene.raw()[m];
        double* g = grad.data() + m * kParamsPerPrimitive;

        const SymMatrix10 gmat = SymMatrix10::from_lower(std::span<const double, kNumBParams>(a, kNumBParams));
        const SymMatrix10 b = SymMatrix10::from_lower(raw.b);
        // dL/dB = 2 G B for A = B Bᵀ; symmetric B ties (i, j) and (j, i).
        std::array<std::array<double, kNumMonomials>, kNumMonomials> db{};
        for (int i = 0; i < kNumMonomials; ++i)
            for (int k = 0; k < kNumMonomials; ++k) {
                double s = 0.0;
                for (int l = 0; l < kNumMonomials; ++l) s += gmat(i, l) * b(l, k);
                db[i][k] = 2.0 * s;
            }
        int idx = 0;
        for (int i = 0; i < kNumMonomials; ++i)
            for (int k = 0; k <= i; ++k) g[idx++] = (i == k) ? db[i][i] : db[i][k] + db[k][i];

        // A₀₀ carries −R.
        const double d_r = -gmat(0, 0);
        const double r = scene.primitive(m).r;
        g[kFlatR] = std::abs(raw.r_raw) < kActivationClamp ? d_r * r * (1.0 - r) : 0.0;
        for (int k = 0; k < 3; ++k) {
            const double c_raw = raw.c_raw[k];
            const double t = std::tanh(c_raw);
            g[kFlatC + k] = std::abs(c_raw) < kActivationClamp ? a[kGLower + k] * (1.0 - t * t) : 0.0;
        }
        for (int k = 0; k < kParamsPerPrimitive; ++k)
            if (!std::isfinite(g[k]))
                throw NumericError("non-finite gradient for primitive " + std::to_string(m) + " (entry " +
                                   std::to_string(k) + ")");
    }
}

struct PointView {
    const Batch& batch;
    std::size_t n_on, n_in, n_out;

    explicit PointView(const Batch& b)
        : batch(b), n_on(b.on.size()), n_in(b.inside.size()), n_out(b.outside.size()) {}
    std::size_t size() const { return n_on + n_in + n_out; }
    const Vec3& point(std::size_t i) const {
        if (i < n_on) return batch.on[i];
        if (i < n_on + n_in) return batch.inside[i - n_on];
        return batch.outside[i - n_on - n_in];
    }
    // 0 on, 1 in, 2 out
    int cls(std::size_t i) const { return i < n_on ? 0 : (i < n_on + n_in ? 1 : 2); }
};

constexpr double kTargets[3] = {0.0, -1.0, 1.0};

void check_preconditions(const Scene& scene, const Batch& batch) {
    if (!scene.has_raw()) throw InvalidArgument("loss gradient needs a scene built from raw parameters");
    if (batch.on.size() != batch.on_normals.size())
        throw InvalidArgument("every on-point needs a ground-truth normal");
}

struct PointEval {
    double value = 0.0;
    int prim = 0;
    Vec3 grad{};
    bool degenerate = false;
};

PointEval evaluate_point(const Scene& scene, const Vec3& p, bool want_grad) {
    PointEval e;
    const UnionValue u = eval_union(scene, p);
    e.value = u.value;
    e.prim = u.index;
    const AssembledPrimitive& prim = scene.primitive(u.index);
    e.grad = prim.grad(p);
    e.degenerate = want_grad && !(norm(e.grad) > 1e-9);
    return e;
}

void throw_nonfinite(std::size_t point, int prim) {
    throw NumericError("non-finite loss contribution at batch point " + std::to_string(point) +
                       " (primitive " + std::to_string(prim) + ")");
}

}  // namespace

LossGrad total_loss_and_grad(const Scene& scene, const Batch& batch, const LossWeights& w) {
    check_preconditions(scene, batch);
    const PointView pts(batch);
    const std::size_t n = pts.size();
    const std::size_t m_count = scene.size();

    std::vector<PointEval> evals(n);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) evals[i] = evaluate_point(scene, pts.point(i), pts.cls(i) == 0);

    std::size_t skipped = 0;
    for (std::size_t i = 0; i < pts.n_on; ++i) skipped += evals[i].degenerate ? 1 : 0;
    if (2 * skipped > pts.n_on)
        throw DegenerateGradient("more than half of the surface points have a vanishing gradient");
    const std::size_t n_valid = pts.n_on - skipped;

    const double class_scale[3] = {
        pts.n_on ? w.on / static_cast<double>(pts.n_on) : 0.0,
        pts.n_in ? w.in / static_cast<double>(pts.n_in) : 0.0,
        pts.n_out ? w.out / static_cast<double>(pts.n_out) : 0.0,
    };
    const double normal_scale = n_valid ? w.normal / static_cast<double>(n_valid) : 0.0;

    const std::size_t chunks = num_chunks(n);
    // Per chunk: loss partials [on, in, out, normal] then per-primitive accumulators.
    const std::size_t stride = 4 + m_count * kAccStride;
    std::vector<double> partial(chunks * stride, 0.0);
    std::vector<long long> bad(chunks, -1);

#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < chunks; ++c) {
        double* buf = partial.data() + c * stride;
        const std::size_t end = std::min(n, (c + 1) * kReductionChunk);
        for (std::size_t i = c * kReductionChunk; i < end; ++i) {
            const PointEval& e = evals[i];
            const int cls = pts.cls(i);
            const AssembledPrimitive& prim = scene.primitive(e.prim);
            const double th = std::tanh(e.value);
            const double err = th - kTargets[cls];
            buf[cls] += err * err;
            const double w_value = class_scale[cls] * 2.0 * err * (1.0 - th * th);
            Vec3 wg{};
            const bool use_normal = cls == 0 && !e.degenerate && normal_scale != 0.0;
            if (cls == 0 && !e.degenerate) {
                const Vec3 n_r = e.grad / norm(e.grad);
                buf[3] += norm2(n_r - batch.on_normals[i]);
                if (use_normal) wg = normal_weight(e.grad, batch.on_normals[i], normal_scale);
            }
            if (!std::isfinite(w_value) || !std::isfinite(wg.x + wg.y + wg.z)) {
                if (bad[c] < 0) bad[c] = static_cast<long long>(i);
                continue;
            }
            const FormJet jet = form_jet(prim.a, pts.point(i) - prim.center);
            add_point(jet, e.grad, w_value, use_normal ? &wg : nullptr, buf + 4 + e.prim * kAccStride);
        }
    }
    for (std::size_t c = 0; c < chunks; ++c)
        if (bad[c] >= 0) throw_nonfinite(static_cast<std::size_t>(bad[c]), evals[bad[c]].prim);

    std::vector<double> total(stride, 0.0);
    for (std::size_t c = 0; c < chunks; ++c) {
        const double* buf = partial.data() + c * stride;
        for (std::size_t k = 0; k < stride; ++k) total[k] += buf[k];
    }

    LossGrad out;
    out.skipped = skipped;
    out.sign_loss = class_scale[0] * total[0] + class_scale[1] * total[1] + class_scale[2] * total[2];
    out.normal_loss = n_valid ? total[3] / static_cast<double>(n_valid) : 0.0;
    out.total = out.sign_loss + w.normal * out.normal_loss;
    finalize_grad(scene, std::vector<double>(total.begin() + 4, total.end()), out.grad);
    return out;
}

namespace serial {

LossGrad total_loss_and_grad(const Scene& scene, const Batch& batch, const LossWeights& w) {
    check_preconditions(scene, batch);
    const PointView pts(batch);
    const std::size_t n = pts.size();

    std::size_t skipped = 0;
    for (std::size_t i = 0; i < pts.n_on; ++i)
        if (evaluate_point(scene, batch.on[i], true).degenerate) ++skipped;
    if (2 * skipped > pts.n_on)
        throw DegenerateGradient("more than half of the surface points have a vanishing gradient");
    const std::size_t n_valid = pts.n_on - skipped;
    const std::size_t counts[3] = {pts.n_on, pts.n_in, pts.n_out};
    const double lambdas[3] = {w.on, w.in, w.out};

    std::vector<double> acc(scene.size() * kAccStride, 0.0);
    double class_sum[3] = {0, 0, 0};
    double normal_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const int cls = pts.cls(i);
        const Vec3& p = pts.point(i);
        const PointEval e = evaluate_point(scene, p, cls == 0);
        const double th = std::tanh(e.value);
        const double err = th - kTargets[cls];
        class_sum[cls] += err * err;
        const double w_value = lambdas[cls] / static_cast<double>(counts[cls]) * 2.0 * err * (1.0 - th * th);
        Vec3 wg{};
        bool use_normal = false;
        if (cls == 0 && !e.degenerate) {
            normal_sum += norm2(normalized(e.grad) - batch.on_normals[i]);
            if (w.normal != 0.0) {
                wg = normal_weight(e.grad, batch.on_normals[i], w.normal / static_cast<double>(n_valid));
                use_normal = true;
            }
        }
        if (!std::isfinite(w_value) || !std::isfinite(wg.x + wg.y + wg.z)) throw_nonfinite(i, e.prim);
        const AssembledPrimitive& prim = scene.primitive(e.prim);
        add_point(form_jet(prim.a, p - prim.center), e.grad, w_value, use_normal ? &wg : nullptr,
                  acc.data() + e.prim * kAccStride);
    }

    LossGrad out;
    out.skipped = skipped;
    for (int c = 0; c < 3; ++c)
        if (counts[c]) out.sign_loss += lambdas[c] * class_sum[c] / static_cast<double>(counts[c]);
    out.normal_loss = n_valid ? normal_sum / static_cast<double>(n_valid) : 0.0;
    out.total = out.sign_loss + w.normal * out.normal_loss;
    finalize_grad(scene, acc, out.grad);
    return out;
}

}  // namespace serial

// ---------------------------------------------------------------------------
// Optimization

std::string LossReport::to_csv() const {
    std::ostringstream out;
    out.precision(10);
    out << "iter,sign_loss,normal_loss,total\n";
    for (const auto& r : history) out << r.iter << ',' << r.sign_loss << ',' << r.normal_loss << ',' << r.total << '\n';
    return out.str();
}

namespace {

constexpr std::uint64_t kInitStream = 0x494e4954ULL;   // "INIT"
constexpr std::uint64_t kBatchStream = 0x42415443ULL;  // "BATC"

Batch draw_batch(const SampleSet& samples, const FitConfig& cfg, int iter) {
    Rng rng(stream_seed(cfg.seed, kBatchStream, static_cast<std::uint64_t>(iter)));
    Batch b;
    const std::size_t n_vol = samples.inside.size() + samples.outside.size();
    const auto n_vol_batch = static_cast<std::size_t>(std::max(1.0, std::round(cfg.volume_batch_fraction * n_vol)));
    for (std::size_t k = 0; k < n_vol_batch && n_vol > 0; ++k) {
        const std::size_t idx = rng.below(n_vol);
        if (idx < samples.inside.size()) b.inside.push_back(samples.inside[idx]);
        else b.outside.push_back(samples.outside[idx - samples.inside.size()]);
    }
    const std::size_t n_on = samples.on.size();
    const auto n_on_batch = static_cast<std::size_t>(std::max(1.0, std::round(cfg.surface_batch_fraction * n_on)));
    for (std::size_t k = 0; k < n_on_batch && n_on > 0; ++k) {
        const auto& s = samples.on[rng.below(n_on)];
        b.on.push_back(s.point);
        b.on_normals.push_back(s.normal);
    }
    return b;
}

void check_iterate(const Scene& scene, int iter) {
    for (std::size_t m = 0; m < scene.size(); ++m) {
        const AssembledPrimitive& p = scene.primitive(m);
        const bool center_ok = std::abs(p.center.x) < 1.0 && std::abs(p.center.y) < 1.0 && std::abs(p.center.z) < 1.0;
        if (!center_ok || !(closedness_margin(p) >= scene.alpha() * (1.0 - 1e-9)))
            throw NumericError("constraint violated by primitive " + std::to_string(m) + " at iteration " +
                               std::to_string(iter));
    }
}

}  // namespace

std::vector<RawPrimitiveParams> initialize_params(const SampleSet& samples, const FitConfig& cfg) {
    cfg.validate();
    if (samples.on.empty()) throw InvalidArgument("initialization needs surface samples");
    Rng rng(stream_seed(cfg.seed, kInitStream, 0));
    const std::size_t n = samples.on.size();
    const auto m_count = static_cast<std::size_t>(cfg.primitives);

    std::vector<std::size_t> chosen{static_cast<std::size_t>(rng.below(n))};
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    while (chosen.size() < m_count) {
        const Vec3& last = samples.on[chosen.back()].point;
        std::size_t far = 0;
        for (std::size_t i = 0; i < n; ++i) {
            dist[i] = std::min(dist[i], norm2(samples.on[i].point - last));
            if (dist[i] > dist[far]) far = i;
        }
        chosen.push_back(far);
    }

    std::vector<RawPrimitiveParams> out(m_count);
    for (std::size_t m = 0; m < m_count; ++m) {
        const Vec3& c = samples.on[chosen[m]].point;
        auto logit = [](double x) { return std::atanh(std::clamp(x, -0.95, 0.95)); };
        out[m].c_raw = {logit(c.x), logit(c.y), logit(c.z)};
        out[m].r_raw = 0.0;
        for (double& b : out[m].b) b = cfg.init_b_sigma * rng.normal();
    }
    return out;
}

FitResult fit(const SampleSet& samples, const FitConfig& cfg, const FitProgress& progress) {
    cfg.validate();
    if (samples.on.empty() || samples.inside.empty() || samples.outside.empty())
        throw InvalidArgument("fitting needs on-surface, inside and outside samples");

    const auto init = initialize_params(samples, cfg);
    const std::size_t m_count = init.size();
    std::vector<double> theta;
    theta.reserve(m_count * kParamsPerPrimitive);
    for (const auto& r : init) {
        const auto f = r.flatten();
        theta.insert(theta.end(), f.begin(), f.end());
    }
    auto unpack = [&] {
        std::vector<RawPrimitiveParams> raw(m_count);
        for (std::size_t m = 0; m < m_count; ++m)
            raw[m] = RawPrimitiveParams::unflatten(
                std::span<const double, kParamsPerPrimitive>(theta.data() + m * kParamsPerPrimitive, kParamsPerPrimitive));
        return raw;
    };

    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kEps = 1e-8;
    std::vector<double> m1(theta.size(), 0.0);
    std::vector<double> m2(theta.size(), 0.0);
    double beta1_t = 1.0;
    double beta2_t = 1.0;

    LossReport report;
    report.lambda = cfg.lambda;
    report.history.reserve(static_cast<std::size_t>(cfg.iters));
    double initial_total = 0.0;
    int over_budget = 0;

    for (int it = 0; it < cfg.iters; ++it) {
        const Scene scene = Scene::from_raw(unpack(), cfg.alpha);
        check_iterate(scene, it);
        const Batch batch = draw_batch(samples, cfg, it);
        const LossGrad lg = total_loss_and_grad(scene, batch, cfg.lambda);

        const IterationRecord rec{it, lg.sign_loss, lg.normal_loss, lg.total};
        report.history.push_back(rec);
        if (progress) progress(rec);

        if (it == 0) initial_total = lg.total;
        over_budget = lg.total > 10.0 * initial_total ? over_budget + 1 : 0;
        if (over_budget >= 100)
            throw NumericError("fit diverged: loss above 10x its initial value for 100 consecutive steps");

        beta1_t *= kBeta1;
        beta2_t *= kBeta2;
        for (std::size_t k = 0; k < theta.size(); ++k) {
            const double g = lg.grad[k];
            m1[k] = kBeta1 * m1[k] + (1.0 - kBeta1) * g;
            m2[k] = kBeta2 * m2[k] + (1.0 - kBeta2) * g * g;
            const double mhat = m1[k] / (1.0 - beta1_t);
            const double vhat = m2[k] / (1.0 - beta2_t);
            theta[k] -= cfg.lr * mhat / (std::sqrt(vhat) + kEps);
        }
    }

    Scene final_scene = Scene::from_raw(unpack(), cfg.alpha);
    check_iterate(final_scene, cfg.iters);
    final_scene.set_meta("fit_config", cfg.to_json());
    FitResult result{final_scene, final_scene, std::move(report), 0, false};
    if (cfg.prune_on_finish) {
        PruneResult pr = prune(final_scene);
        result.scene = std::move(pr.scene);
        result.removed = pr.removed;
        result.prune_all_empty = pr.all_empty;
    }
    return result;
}

}  // namespace ias
