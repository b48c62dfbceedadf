#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ias/mesh.hpp"
#include "ias/scene.hpp"

namespace ias {

struct LossWeights {
    double on = 2.0;
    double in = 1.0;
    double out = 10.0;
    double normal = 1.0;
};

struct FitConfig {
    int primitives = 100;
    int iters = 5000;
    double lr = 5e-3;
    LossWeights lambda;
    double volume_batch_fraction = 0.01;
    double surface_batch_fraction = 0.20;
    double alpha = kDefaultAlpha;
    std::uint64_t seed = 0;
    bool prune_on_finish = true;
    double init_b_sigma = 0.05;

    /// Throws InvalidArgument when a field is out of range.
    void validate() const;
    /// Applies `key=value` (or `key: value`) lines, or a JSON object, on top of the current values.
    void merge_text(const std::string& text);
    void merge_file(const std::filesystem::path& path);
    /// Sets one field by name; throws InvalidArgument for unknown keys or bad values.
    void set(const std::string& key, const std::string& value);
    std::string to_json() const;
};

/// Labeled points for one optimization step. `on_normals` pairs with `on`.
struct Batch {
    std::vector<Vec3> on;
    std::vector<Vec3> on_normals;
    std::vector<Vec3> inside;
    std::vector<Vec3> outside;
};

/// Σ over present classes of λ · mean (tanh S(p) − target)², targets 0 / −1 / +1.
double sign_loss(const Scene& scene, const Batch& batch, const LossWeights& w);

struct NormalLoss {
    double value = 0.0;
    std::size_t skipped = 0;  // on-points with ‖∇p‖ ≤ 1e-9
};

/// Mean ‖n_union(p) − n_gt‖² over non-degenerate on-points. Throws DegenerateGradient
/// when more than half of them are degenerate.
NormalLoss normal_loss(const Scene& scene, const Batch& batch);

struct LossGrad {
    double sign_loss = 0.0;
    double normal_loss = 0.0;
    double total = 0.0;
    std::size_t skipped = 0;
    std::vector<double> grad;  // 59 per primitive, RawPrimitiveParams::flatten layout
};

/// total = sign_loss + λ_n · normal_loss and its exact gradient with respect to the raw
/// parameters of every primitive. Min routes to the argmin primitive only. Requires a
/// scene built from raw parameters. Parallel over fixed point chunks, reduced in chunk
/// order, so the result does not depend on the worker count.
LossGrad total_loss_and_grad(const Scene& scene, const Batch& batch, const LossWeights& w);

namespace serial {
/// Single-pass reference of total_loss_and_grad (accumulates in point order).
LossGrad total_loss_and_grad(const Scene& scene, const Batch& batch, const LossWeights& w);
}  // namespace serial

struct IterationRecord {
    int iter = 0;
    double sign_loss = 0.0;
    double normal_loss = 0.0;
    double total = 0.0;
};

struct LossReport {
    std::vector<IterationRecord> history;
    LossWeights lambda;

    /// CSV with header `iter,sign_loss,normal_loss,total`.
    std::string to_csv() const;
};

struct FitResult {
    Scene scene;     // final scene, pruned when requested
    Scene unpruned;  // final iterate before pruning
    LossReport report;
    std::size_t removed = 0;
    bool prune_all_empty = false;
};

using FitProgress = std::function<void(const IterationRecord&)>;

/// Initial raw parameters: centers by farthest-point sampling of the on-points,
/// B ~ N(0, σ²), R = 0.5.
std::vector<RawPrimitiveParams> initialize_params(const SampleSet& samples, const FitConfig& cfg);

/// Adam on mini-batches drawn per the batch fractions; deterministic under (seed, config).
/// Throws NumericError if the loss stays above 10× its initial value for 100 steps.
FitResult fit(const SampleSet& samples, const FitConfig& cfg, const FitProgress& progress = {});

}  // namespace ias
