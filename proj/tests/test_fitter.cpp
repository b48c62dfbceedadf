#include <doctest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "ias/error.hpp"
#include "ias/fitter.hpp"
#include "ias/parallel.hpp"
#include "support.hpp"

using namespace ias;

namespace {

Scene random_scene(std::mt19937_64& rng, int m, double sigma = 0.3) {
    std::vector<RawPrimitiveParams> raw;
    for (int i = 0; i < m; ++i) raw.push_back(test::random_raw(rng, sigma));
    return Scene::from_raw(raw);
}

Batch random_batch(std::mt19937_64& rng, int n_on, int n_in, int n_out) {
    Batch b;
    for (int i = 0; i < n_on; ++i) {
        b.on.push_back(test::random_point(rng, -1, 1));
        b.on_normals.push_back(test::random_unit(rng));
    }
    for (int i = 0; i < n_in; ++i) b.inside.push_back(test::random_point(rng, -1, 1));
    for (int i = 0; i < n_out; ++i) b.outside.push_back(test::random_point(rng));
    return b;
}

// Second evaluation path: explicit per-primitive minimum and direct normal formula.
double min_value(const Scene& s, const Vec3& p, int* arg = nullptr) {
    double best = 0.0;
    int idx = -1;
    for (std::size_t m = 0; m < s.size(); ++m) {
        const double v = s.primitive(m).eval(p);
        if (idx < 0 || v < best) {
            best = v;
            idx = static_cast<int>(m);
        }
    }
    if (arg) *arg = idx;
    return best;
}

double reference_sign_loss(const Scene& s, const Batch& b, const LossWeights& w) {
    auto term = [&](const std::vector<Vec3>& pts, double target, double lambda) {
        if (pts.empty()) return 0.0;
        double acc = 0.0;
        for (const Vec3& p : pts) {
            const double e = std::tanh(min_value(s, p)) - target;
            acc += e * e;
        }
        return lambda * acc / pts.size();
    };
    return term(b.on, 0.0, w.on) + term(b.inside, -1.0, w.in) + term(b.outside, 1.0, w.out);
}

double reference_normal_loss(const Scene& s, const Batch& b) {
    double acc = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < b.on.size(); ++i) {
        int arg = 0;
        min_value(s, b.on[i], &arg);
        const Vec3 g = s.primitive(arg).grad(b.on[i]);
        if (norm(g) <= 1e-9) continue;
        acc += norm2(g / norm(g) - b.on_normals[i]);
        ++n;
    }
    return n ? acc / n : 0.0;
}

double total_at(const std::vector<RawPrimitiveParams>& raw, const Batch& b, const LossWeights& w) {
    const Scene s = Scene::from_raw(raw);
    return sign_loss(s, b, w) + w.normal * normal_loss(s, b).value;
}

}  // namespace

TEST_CASE("sign loss examples") {
    LossWeights w;
    // Constant −10 field at in-points and +10 field at out-points; zero at on-points.
    SymMatrix10 neg, pos, zero;
    neg.set(0, 0, -10);
    pos.set(0, 0, 10);
    Batch in_only;
    in_only.inside = {{0, 0, 0}, {0.1, 0.2, 0.3}};
    Batch out_only;
    out_only.outside = {{1, 0, 0}};
    Batch on_only;
    on_only.on = {{0.5, 0.5, 0.5}};
    on_only.on_normals = {{1, 0, 0}};
    const double in_loss = sign_loss(Scene::from_primitives({make_primitive(neg)}), in_only, w);
    const double out_loss = sign_loss(Scene::from_primitives({make_primitive(pos)}), out_only, w);
    const double on_loss = sign_loss(Scene::from_primitives({make_primitive(zero)}), on_only, w);
    CHECK(in_loss + out_loss + on_loss <= 1e-8);

    Batch balanced;
    balanced.inside = {{0, 0, 0}, {0.2, 0, 0}};
    balanced.outside = {{1, 1, 1}, {0.9, 0, 0}};
    CHECK(sign_loss(Scene::from_primitives({make_primitive(zero)}), balanced, w) == 11.0);
}

TEST_CASE("losses match a second evaluation path") {
    std::mt19937_64 rng(61);
    LossWeights w;
    for (int trial = 0; trial < 50; ++trial) {
        const Scene s = random_scene(rng, 1 + trial % 5);
        const Batch b = random_batch(rng, 20, 15, 30);
        CHECK(std::abs(sign_loss(s, b, w) - reference_sign_loss(s, b, w)) <= 1e-12);
        CHECK(std::abs(normal_loss(s, b).value - reference_normal_loss(s, b)) <= 1e-12);
    }
}

TEST_CASE("normal loss examples") {
    const Scene sphere = Scene::from_primitives({test::sphere_primitive(0.7)});
    std::mt19937_64 rng(62);
    Batch b, flipped;
    for (int i = 0; i < 200; ++i) {
        const Vec3 n = test::random_unit(rng);
        b.on.push_back(0.7 * n);
        b.on_normals.push_back(n);
        flipped.on.push_back(0.7 * n);
        flipped.on_normals.push_back(-1.0 * n);
    }
    const NormalLoss ok = normal_loss(sphere, b);
    CHECK(ok.value <= 1e-10);
    CHECK(ok.skipped == 0);
    CHECK(normal_loss(sphere, flipped).value == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("normal loss skips degenerate points and errors past half") {
    const Scene sphere = Scene::from_primitives({test::sphere_primitive(0.7)});
    Batch b;
    b.on = {{0.7, 0, 0}, {0, 0, 0}, {0, 0.7, 0}};
    b.on_normals = {{1, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    const NormalLoss nl = normal_loss(sphere, b);
    CHECK(nl.skipped == 1);
    CHECK(nl.value <= 1e-12);
    b.on = {{0, 0, 0}, {0, 0, 0}, {0.7, 0, 0}};
    CHECK_THROWS_AS(normal_loss(sphere, b), DegenerateGradient);
}

TEST_CASE("total equals sign + lambda_n * normal") {
    std::mt19937_64 rng(63);
    LossWeights w;
    w.normal = 0.37;
    const Scene s = random_scene(rng, 4);
    const Batch b = random_batch(rng, 30, 30, 30);
    const LossGrad lg = total_loss_and_grad(s, b, w);
    CHECK(lg.total == lg.sign_loss + w.normal * lg.normal_loss);
    CHECK(std::abs(lg.sign_loss - sign_loss(s, b, w)) <= 1e-12);
    CHECK(std::abs(lg.normal_loss - normal_loss(s, b).value) <= 1e-12);
    CHECK(lg.grad.size() == 4 * kParamsPerPrimitive);
}

TEST_CASE("single in-point gradient matches central differences") {
    std::mt19937_64 rng(64);
    LossWeights w;
    for (int trial = 0; trial < 10; ++trial) {
        const std::vector<RawPrimitiveParams> raw{test::random_raw(rng, 0.3)};
        Batch b;
        b.inside = {test::random_point(rng, -0.8, 0.8)};
        const LossGrad lg = total_loss_and_grad(Scene::from_raw(raw), b, w);
        const double h = 1e-4;
        for (int k = 0; k < kParamsPerPrimitive; ++k) {
            auto lo = raw, hi = raw;
            auto fl = lo[0].flatten(), fh = hi[0].flatten();
            fl[k] -= h;
            fh[k] += h;
            lo[0] = RawPrimitiveParams::unflatten(fl);
            hi[0] = RawPrimitiveParams::unflatten(fh);
            const double fd = (total_at(hi, b, w) - total_at(lo, b, w)) / (2 * h);
            const double g = lg.grad[k];
            if (std::abs(g) > 1e-6) CHECK(std::abs(g - fd) <= 1e-3 * std::abs(g));
            else CHECK(std::abs(fd) <= 1e-5);
        }
    }
}

TEST_CASE("argmin routing leaves unused primitives with zero gradient") {
    std::mt19937_64 rng(65);
    RawPrimitiveParams near = test::random_raw(rng, 0.05);
    near.c_raw = {0, 0, 0};
    RawPrimitiveParams far = test::random_raw(rng, 0.05);
    far.c_raw = {3, 3, 3};  // center near (0.995, 0.995, 0.995)
    const Scene s = Scene::from_raw({near, far});
    Batch b;
    b.on = {{0.1, 0, 0}, {0, -0.1, 0}};
    b.on_normals = {{1, 0, 0}, {0, -1, 0}};
    b.inside = {{0, 0, 0.05}};
    for (const Vec3& p : b.on) REQUIRE(eval_union(s, p).index == 0);
    REQUIRE(eval_union(s, b.inside[0]).index == 0);
    const LossGrad lg = total_loss_and_grad(s, b, LossWeights{});
    for (int k = 0; k < kParamsPerPrimitive; ++k) CHECK(lg.grad[kParamsPerPrimitive + k] == 0.0);
    double block0 = 0.0;
    for (int k = 0; k < kParamsPerPrimitive; ++k) block0 += std::abs(lg.grad[k]);
    CHECK(block0 > 0.0);
}

TEST_CASE("scaling all weights by 2 doubles loss and gradient") {
    std::mt19937_64 rng(66);
    const Scene s = random_scene(rng, 3);
    const Batch b = random_batch(rng, 25, 25, 25);
    LossWeights w, w2;
    w2.on = 2 * w.on;
    w2.in = 2 * w.in;
    w2.out = 2 * w.out;
    w2.normal = 2 * w.normal;
    const LossGrad a = total_loss_and_grad(s, b, w);
    const LossGrad d = total_loss_and_grad(s, b, w2);
    CHECK(d.total == doctest::Approx(2 * a.total).epsilon(1e-14));
    for (std::size_t k = 0; k < a.grad.size(); ++k) CHECK(d.grad[k] == doctest::Approx(2 * a.grad[k]).epsilon(1e-12).scale(1e-12));
}

TEST_CASE("parallel kernel matches the serial reference and ignores thread count") {
    std::mt19937_64 rng(67);
    const Scene s = random_scene(rng, 6);
    const Batch b = random_batch(rng, 700, 900, 1100);
    const LossGrad ref = serial::total_loss_and_grad(s, b, LossWeights{});
    set_num_threads(1);
    const LossGrad one = total_loss_and_grad(s, b, LossWeights{});
    set_num_threads(4);
    const LossGrad four = total_loss_and_grad(s, b, LossWeights{});
    set_num_threads(0);
    CHECK(one.total == four.total);
    CHECK(one.grad == four.grad);
    CHECK(one.total == doctest::Approx(ref.total).epsilon(1e-12));
    for (std::size_t k = 0; k < ref.grad.size(); ++k)
        CHECK(one.grad[k] == doctest::Approx(ref.grad[k]).epsilon(1e-10).scale(1e-10));
}

TEST_CASE("FitConfig parsing and validation") {
    FitConfig c;
    c.merge_text("# comment\nprimitives = 12\niters: 40\nlr=0.01\nlambda_n = 0\nprune_on_finish = false\n");
    CHECK(c.primitives == 12);
    CHECK(c.iters == 40);
    CHECK(c.lr == 0.01);
    CHECK(c.lambda.normal == 0.0);
    CHECK_FALSE(c.prune_on_finish);
    c.merge_text(R"({"primitives": 7, "lambda_out": 5, "seed": 9})");
    CHECK(c.primitives == 7);
    CHECK(c.lambda.out == 5.0);
    CHECK(c.seed == 9);
    CHECK_NOTHROW(c.validate());

    const auto j = nlohmann::json::parse(c.to_json());
    CHECK(j["primitives"] == 7);
    FitConfig d;
    d.merge_text(c.to_json());
    CHECK(d.to_json() == c.to_json());

    CHECK_THROWS_AS(c.set("bogus", "1"), InvalidArgument);
    CHECK_THROWS_AS(c.set("lr", "fast"), InvalidArgument);
    CHECK_THROWS_AS(c.merge_text("primitives 3"), InvalidArgument);
    FitConfig bad;
    bad.primitives = 101;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = FitConfig{};
    bad.lambda.in = -1;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = FitConfig{};
    bad.volume_batch_fraction = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = FitConfig{};
    bad.surface_batch_fraction = 1.5;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("initialization spreads centers over the surface") {
    const SampleSet set = build_sample_set(make_icosphere(0.8, 3), 2000, 2000, 68);
    FitConfig cfg;
    cfg.primitives = 8;
    const auto raw = initialize_params(set, cfg);
    REQUIRE(raw.size() == 8);
    double min_pair = 1e9;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const AssembledPrimitive p = assemble(raw[i]);
        CHECK(p.r == 0.5);
        CHECK(norm(p.center) == doctest::Approx(0.8).epsilon(0.02));
        for (std::size_t j = 0; j < i; ++j) min_pair = std::min(min_pair, norm(p.center - assemble(raw[j]).center));
    }
    CHECK(min_pair > 0.4);
}

TEST_CASE("short fit: determinism, constraints, loss decrease") {
    const SampleSet set = build_sample_set(make_icosphere(0.8, 3), 20000, 2000, 69);
    FitConfig cfg;
    cfg.primitives = 4;
    cfg.iters = 300;
    cfg.seed = 5;
    std::size_t steps = 0;
    const FitResult a = fit(set, cfg, [&](const IterationRecord&) { ++steps; });
    CHECK(steps == 300);
    const FitResult b = fit(set, cfg);
    CHECK(scene_to_json(a.scene) == scene_to_json(b.scene));
    REQUIRE(a.report.history.size() == 300);
    for (const auto& r : a.report.history) CHECK(r.total == r.sign_loss + cfg.lambda.normal * r.normal_loss);
    for (const auto& p : a.unpruned.primitives()) {
        CHECK(closedness_margin(p) >= cfg.alpha * (1 - 1e-9));
        for (int k = 0; k < 3; ++k) CHECK(std::abs(p.center[k]) < 1.0);
    }
    auto median = [](std::vector<double> v) {
        std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
        return v[v.size() / 2];
    };
    std::vector<double> first, last;
    for (int i = 0; i < 30; ++i) first.push_back(a.report.history[i].total);
    for (int i = 270; i < 300; ++i) last.push_back(a.report.history[i].total);
    CHECK(median(last) < median(first));

    const std::string csv = a.report.to_csv();
    CHECK(csv.rfind("iter,sign_loss,normal_loss,total\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 301);

    cfg.seed = 6;
    const FitResult c = fit(set, cfg);
    CHECK(scene_to_json(c.scene) != scene_to_json(a.scene));
}

TEST_CASE("fit rejects incomplete sample sets") {
    SampleSet s = build_sample_set(make_icosphere(0.8, 2), 0, 100, 70);
    FitConfig cfg;
    cfg.primitives = 2;
    cfg.iters = 5;
    CHECK_THROWS_AS(fit(s, cfg), InvalidArgument);
}
