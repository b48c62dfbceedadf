// Serial reference vs OpenMP kernels. Arg(0) selects the serial path, Arg(1) the parallel one.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ias/extractor.hpp"
#include "ias/fitter.hpp"
#include "ias/metrics.hpp"
#include "ias/renderer.hpp"

using namespace ias;

namespace {

Vec3 uniform_point(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    const double x = u(rng), y = u(rng), z = u(rng);
    return {x, y, z};
}

Scene bench_scene(int m) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nb(0.0, 0.3);
    std::uniform_real_distribution<double> uc(-0.8, 0.8);
    std::vector<RawPrimitiveParams> raw(static_cast<std::size_t>(m));
    for (auto& r : raw) {
        for (double& b : r.b) b = nb(rng);
        r.c_raw = {uc(rng), uc(rng), uc(rng)};
    }
    return Scene::from_raw(raw);
}

Batch bench_batch(std::size_t n) {
    std::mt19937_64 rng(6);
    Batch b;
    for (std::size_t i = 0; i < n; ++i) {
        b.on.push_back(uniform_point(rng, -1, 1));
        b.on_normals.push_back(normalized(uniform_point(rng, -1, 1) + Vec3{0, 0, 1e-3}));
        b.inside.push_back(uniform_point(rng, -1, 1));
        b.outside.push_back(uniform_point(rng, -1.1, 1.1));
    }
    return b;
}

void BM_loss_and_grad(benchmark::State& state) {
    const Scene scene = bench_scene(16);
    const Batch batch = bench_batch(2000);
    const LossWeights w;
    for (auto _ : state) {
        auto r = state.range(0) ? total_loss_and_grad(scene, batch, w) : serial::total_loss_and_grad(scene, batch, w);
        benchmark::DoNotOptimize(r.total);
    }
}
BENCHMARK(BM_loss_and_grad)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_eval_grid(benchmark::State& state) {
    const Scene scene = bench_scene(16);
    GridSpec grid;
    grid.resolution = 64;
    for (auto _ : state) {
        auto f = state.range(0) ? eval_grid(scene, grid) : serial::eval_grid(scene, grid);
        benchmark::DoNotOptimize(f.data());
    }
}
BENCHMARK(BM_eval_grid)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_render(benchmark::State& state) {
    const Scene scene = bench_scene(16);
    Camera cam;
    cam.width = cam.height = 128;
    for (auto _ : state) {
        auto img = state.range(0) ? render(scene, cam) : serial::render(scene, cam);
        benchmark::DoNotOptimize(img.rgb.data());
    }
}
BENCHMARK(BM_render)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_nearest_distances(benchmark::State& state) {
    std::mt19937_64 rng(7);
    std::vector<Vec3> a, b;
    for (int i = 0; i < 5000; ++i) a.push_back(uniform_point(rng, -1, 1));
    for (int i = 0; i < 5000; ++i) b.push_back(uniform_point(rng, -1, 1));
    for (auto _ : state) {
        auto d = state.range(0) ? nearest_distances(a, b) : serial::nearest_distances(a, b);
        benchmark::DoNotOptimize(d.data());
    }
}
BENCHMARK(BM_nearest_distances)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
