#include "ias/scene.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "ias/error.hpp"

namespace ias {

using Json = nlohmann::ordered_json;

Scene Scene::from_raw(std::vector<RawPrimitiveParams> raw, double alpha,
                      std::map<std::string, std::string> meta) {
    if (raw.empty() || raw.size() > kMaxPrimitives)
        throw InvalidArgument("scene must hold between 1 and " + std::to_string(kMaxPrimitives) +
                              " primitives");
    Scene s;
    s.alpha_ = alpha;
    s.meta_ = std::move(meta);
    s.prims_.reserve(raw.size());
    for (const auto& r : raw) s.prims_.push_back(assemble(r, alpha));
    s.raw_ = std::move(raw);
    return s;
}

Scene Scene::from_primitives(std::vector<AssembledPrimitive> prims) {
    if (prims.empty() || prims.size() > kMaxPrimitives)
        throw InvalidArgument("scene must hold between 1 and " + std::to_string(kMaxPrimitives) +
                              " primitives");
    Scene s;
    s.prims_ = std::move(prims);
    return s;
}

UnionValue eval_union(const Scene& scene, const Vec3& p) {
    UnionValue best{std::numeric_limits<double>::infinity(), 0};
    const auto& prims = scene.primitives();
    for (std::size_t i = 0; i < prims.size(); ++i) {
        const double v = prims[i].eval(p);
        if (v < best.value) best = {v, static_cast<int>(i)};
    }
    return best;
}

Vec3 surface_normal(const Scene& scene, const Vec3& p) {
    const UnionValue u = eval_union(scene, p);
    const Vec3 g = scene.primitive(u.index).grad(p);
    const double n = norm(g);
    if (!(n > 1e-9)) throw DegenerateGradient("union gradient vanishes at query point");
    return g / n;
}

PruneResult prune(const Scene& scene, double tol) {
    std::vector<std::size_t> keep;
    std::size_t most_negative = 0;
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < scene.size(); ++i) {
        const double ev = min_eigenvalue(scene.primitive(i));
        if (ev < lowest) {
            lowest = ev;
            most_negative = i;
        }
        if (!(ev >= -tol)) keep.push_back(i);
    }
    PruneResult out{scene, scene.size() - keep.size(), false};
    if (keep.size() == scene.size()) return out;
    if (keep.empty()) {
        keep.push_back(most_negative);
        out.all_empty = true;
        out.removed = scene.size() - 1;
    }
    if (scene.has_raw()) {
        std::vector<RawPrimitiveParams> raw;
        for (std::size_t i : keep) raw.push_back(scene.raw()[i]);
        out.scene = Scene::from_raw(std::move(raw), scene.alpha(), scene.meta());
    } else {
        std::vector<AssembledPrimitive> prims;
        for (std::size_t i : keep) prims.push_back(scene.primitive(i));
        out.scene = Scene::from_primitives(std::move(prims));
    }
    if (out.all_empty) out.scene.set_meta("prune_warning", "all primitives empty; kept most negative");
    return out;
}

namespace {

Json derived_block(const AssembledPrimitive& prim) {
    Json d;
    d["R"] = prim.r;
    d["center"] = {prim.center.x, prim.center.y, prim.center.z};
    d["closedness_margin"] = closedness_margin(prim);
    d["min_eigenvalue"] = min_eigenvalue(prim);
    d["coefficients"] = prim.coeffs.a;
    return d;
}

bool close_rel(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

void check_derived(const Json& d, const AssembledPrimitive& prim, std::size_t index) {
    const auto fail = [&](const std::string& what) {
        throw IntegrityError("primitive " + std::to_string(index) + ": stored " + what +
                             " disagrees with re-assembled value");
    };
    if (d.contains("R") && !close_rel(d["R"].get<double>(), prim.r)) fail("R");
    if (d.contains("center")) {
        const auto c = d["center"].get<std::vector<double>>();
        if (c.size() != 3 || !close_rel(c[0], prim.center.x) || !close_rel(c[1], prim.center.y) ||
            !close_rel(c[2], prim.center.z))
            fail("center");
    }
    if (d.contains("closedness_margin") && !close_rel(d["closedness_margin"].get<double>(), closedness_margin(prim)))
        fail("closedness margin");
    if (d.contains("min_eigenvalue") && !close_rel(d["min_eigenvalue"].get<double>(), min_eigenvalue(prim)))
        fail("minimum eigenvalue");
    if (d.contains("coefficients")) {
        const auto c = d["coefficients"].get<std::vector<double>>();
        if (c.size() != static_cast<std::size_t>(kNumQuarticCoeffs)) fail("coefficients");
        for (int n = 0; n < kNumQuarticCoeffs; ++n)
            if (!close_rel(c[n], prim.coeffs.a[n])) fail("coefficients");
    }
}

}  // namespace

std::string scene_to_json(const Scene& scene, bool with_derived) {
    if (!scene.has_raw()) throw InvalidArgument("scene has no raw parameters to serialize");
    Json j;
    j["version"] = kSceneFormatVersion;
    j["alpha"] = scene.alpha();
    Json prims = Json::array();
    for (std::size_t i = 0; i < scene.size(); ++i) {
        const auto& raw = scene.raw()[i];
        Json p;
        p["b"] = raw.b;
        p["r_raw"] = raw.r_raw;
        p["c_raw"] = {raw.c_raw.x, raw.c_raw.y, raw.c_raw.z};
        if (with_derived) p["derived"] = derived_block(scene.primitive(i));
        prims.push_back(std::move(p));
    }
    j["primitives"] = std::move(prims);
    j["meta"] = scene.meta();
    return j.dump(1) + "\n";
}

void save_scene(const Scene& scene, const std::filesystem::path& path) {
    const std::string text = scene_to_json(scene);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw Error("failed writing " + path.string());
}

Scene scene_from_json(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("scene file is not valid JSON: ") + e.what());
    }
    try {
        if (!j.contains("version") || j["version"].get<int>() != kSceneFormatVersion)
            throw SchemaError("unsupported scene format version");
        const double alpha = j.at("alpha").get<double>();
        if (!(alpha > 0.0)) throw SchemaError("alpha must be positive");
        const auto& prims = j.at("primitives");
        if (!prims.is_array() || prims.empty() || prims.size() > kMaxPrimitives)
            throw SchemaError("primitives must be a non-empty array of at most 100 entries");

        std::vector<RawPrimitiveParams> raw;
        for (const auto& p : prims) {
            const auto b = p.at("b").get<std::vector<double>>();
            if (b.size() != static_cast<std::size_t>(kNumBParams))
                throw SchemaError("each primitive needs exactly 55 B entries (got " +
                                  std::to_string(b.size()) + ")");
            const auto c = p.at("c_raw").get<std::vector<double>>();
            if (c.size() != 3) throw SchemaError("c_raw must have 3 entries");
            RawPrimitiveParams r;
            std::copy(b.begin(), b.end(), r.b.begin());
            r.r_raw = p.at("r_raw").get<double>();
            r.c_raw = {c[0], c[1], c[2]};
            raw.push_back(r);
        }
        std::map<std::string, std::string> meta;
        if (j.contains("meta")) meta = j["meta"].get<std::map<std::string, std::string>>();

        Scene scene = Scene::from_raw(std::move(raw), alpha, std::move(meta));
        for (std::size_t i = 0; i < scene.size(); ++i) {
            const double margin = closedness_margin(scene.primitive(i));
            if (!(margin >= alpha * (1.0 - 1e-9)))
                throw IntegrityError("primitive " + std::to_string(i) + " violates closedness bound");
            if (prims[i].contains("derived")) check_derived(prims[i]["derived"], scene.primitive(i), i);
        }
        return scene;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed scene file: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw IntegrityError(std::string("scene parameters rejected: ") + e.what());
    }
}

Scene load_scene(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return scene_from_json(ss.str());
}

}  // namespace ias
