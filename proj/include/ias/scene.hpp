#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ias/primitive.hpp"

namespace ias {

inline constexpr std::size_t kMaxPrimitives = 100;
inline constexpr int kSceneFormatVersion = 1;

/// Union of primitives; the surface is the zero set of the pointwise minimum.
/// Immutable once built; pruning and refitting produce new values.
class Scene {
public:
    /// Assembles every raw parameter block under `alpha`. Requires 1..kMaxPrimitives entries.
    static Scene from_raw(std::vector<RawPrimitiveParams> raw, double alpha = kDefaultAlpha,
                          std::map<std::string, std::string> meta = {});

    /// Scene of hand-built primitives with no raw parameters behind them. Such scenes
    /// evaluate and render normally but cannot be saved.
    static Scene from_primitives(std::vector<AssembledPrimitive> prims);

    std::size_t size() const { return prims_.size(); }
    const AssembledPrimitive& primitive(std::size_t i) const { return prims_[i]; }
    const std::vector<AssembledPrimitive>& primitives() const { return prims_; }
    bool has_raw() const { return !raw_.empty(); }
    const std::vector<RawPrimitiveParams>& raw() const { return raw_; }
    double alpha() const { return alpha_; }
    const std::map<std::string, std::string>& meta() const { return meta_; }
    void set_meta(const std::string& key, const std::string& value) { meta_[key] = value; }

private:
    Scene() = default;

    std::vector<RawPrimitiveParams> raw_;
    std::vector<AssembledPrimitive> prims_;
    double alpha_ = kDefaultAlpha;
    std::map<std::string, std::string> meta_;
};

struct UnionValue {
    double value = 0.0;
    int index = 0;
};

/// min over primitives, lowest index on ties.
UnionValue eval_union(const Scene& scene, const Vec3& p);

/// Normalized gradient of the argmin primitive. Throws DegenerateGradient when its norm ≤ 1e-9.
Vec3 surface_normal(const Scene& scene, const Vec3& p);

struct PruneResult {
    Scene scene;
    std::size_t removed = 0;
    /// Every primitive was empty; the one with the most negative eigenvalue was kept.
    bool all_empty = false;
};

PruneResult prune(const Scene& scene, double tol = kEmptyTolerance);

/// Writes the JSON scene file (`.ias.json`). Raw parameters are authoritative; a
/// "derived" block carries R, center, margins and the 35 coefficients per primitive.
void save_scene(const Scene& scene, const std::filesystem::path& path);
std::string scene_to_json(const Scene& scene, bool with_derived = true);

/// Throws SchemaError on version or shape mismatch and IntegrityError when the
/// re-assembled primitives violate the closedness bound or disagree with a stored
/// "derived" block.
Scene load_scene(const std::filesystem::path& path);
Scene scene_from_json(const std::string& text);

}  // namespace ias
