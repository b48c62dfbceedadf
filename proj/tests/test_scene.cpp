#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "ias/error.hpp"
#include "ias/scene.hpp"
#include "support.hpp"

using namespace ias;

namespace {

AssembledPrimitive constant_primitive(double value) {
    SymMatrix10 a;
    a.set(0, 0, value);
    return make_primitive(a);
}

Scene random_scene(std::mt19937_64& rng, int m) {
    std::vector<RawPrimitiveParams> raw;
    for (int i = 0; i < m; ++i) raw.push_back(test::random_raw(rng, 0.3));
    return Scene::from_raw(raw);
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("ias_test_scene_" + name);
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("scene size limits") {
    CHECK_THROWS_AS(Scene::from_raw({}), InvalidArgument);
    std::vector<RawPrimitiveParams> many(101);
    CHECK_THROWS_AS(Scene::from_raw(many), InvalidArgument);
    std::vector<RawPrimitiveParams> max(100);
    CHECK(Scene::from_raw(max).size() == 100);
}

TEST_CASE("eval_union examples") {
    const Scene s = Scene::from_primitives({constant_primitive(-1.0), constant_primitive(2.0)});
    const UnionValue u = eval_union(s, {0.1, 0.2, 0.3});
    CHECK(u.value == -1.0);
    CHECK(u.index == 0);

    const Scene swapped = Scene::from_primitives({constant_primitive(2.0), constant_primitive(-1.0)});
    CHECK(eval_union(swapped, {}).index == 1);

    const Scene tie = Scene::from_primitives({constant_primitive(-1.0), constant_primitive(-1.0)});
    CHECK(eval_union(tie, {}).index == 0);

    std::mt19937_64 rng(21);
    const AssembledPrimitive p = assemble(test::random_raw(rng));
    const Scene single = Scene::from_primitives({p});
    for (int k = 0; k < 50; ++k) {
        const Vec3 x = test::random_point(rng);
        CHECK(eval_union(single, x).value == p.eval(x));
    }
}

TEST_CASE("union monotonicity and argmin stability") {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 20; ++trial) {
        const Scene s = random_scene(rng, 5);
        std::vector<RawPrimitiveParams> sub(s.raw().begin(), s.raw().end() - 1);
        const Scene smaller = Scene::from_raw(sub);
        for (int k = 0; k < 100; ++k) {
            const Vec3 x = test::random_point(rng);
            const UnionValue u = eval_union(s, x);
            CHECK(eval_union(smaller, x).value >= u.value);
            CHECK(u.value == s.primitive(u.index).eval(x));
        }
    }
}

TEST_CASE("surface_normal examples") {
    const Scene s = Scene::from_primitives({test::sphere_primitive(1.0)});
    const Vec3 n = surface_normal(s, {1, 0, 0});
    CHECK(n.x == doctest::Approx(1.0));
    CHECK(std::abs(n.y) < 1e-15);
    const Vec3 m = surface_normal(s, {0, -1, 0});
    CHECK(m.y == doctest::Approx(-1.0));
    CHECK_THROWS_AS(surface_normal(s, {0, 0, 0}), DegenerateGradient);
}

TEST_CASE("surface_normal matches finite differences of the union") {
    std::mt19937_64 rng(23);
    const double h = 1e-6;
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const Scene s = random_scene(rng, 3);
        const Vec3 x = test::random_point(rng, -1, 1);
        const int idx = eval_union(s, x).index;
        Vec3 fd;
        bool stable = true;
        for (int a = 0; a < 3; ++a) {
            Vec3 lo = x, hi = x;
            lo[a] -= h;
            hi[a] += h;
            const UnionValue ul = eval_union(s, lo), uh = eval_union(s, hi);
            stable = stable && ul.index == idx && uh.index == idx;
            fd[a] = (uh.value - ul.value) / (2 * h);
        }
        if (!stable || norm(fd) < 1e-3) continue;
        CHECK(norm(surface_normal(s, x) - normalized(fd)) <= 1e-4);
        ++checked;
    }
    CHECK(checked > 150);
}

TEST_CASE("prune removes PSD primitives and keeps order") {
    std::mt19937_64 rng(24);
    RawPrimitiveParams a = test::random_raw(rng, 0.05);
    RawPrimitiveParams b = test::random_raw(rng, 0.05);
    RawPrimitiveParams c = test::random_raw(rng, 0.05);
    RawPrimitiveParams empty;
    empty.b[0] = 3.0;  // BBᵀ gets 9 at the constant entry, far above R < 1
    const Scene s = Scene::from_raw({a, empty, b, c});
    REQUIRE(is_empty(s.primitive(1)));
    const PruneResult pr = prune(s);
    CHECK(pr.removed == 1);
    CHECK_FALSE(pr.all_empty);
    REQUIRE(pr.scene.size() == 3);
    CHECK(pr.scene.raw()[0] == a);
    CHECK(pr.scene.raw()[1] == b);
    CHECK(pr.scene.raw()[2] == c);

    const PruneResult same = prune(Scene::from_raw({a, b, c}));
    CHECK(same.removed == 0);
    CHECK(same.scene.raw() == std::vector<RawPrimitiveParams>{a, b, c});
}

TEST_CASE("prune keeps the most negative primitive when all are empty") {
    // With only b[0] set, A = diag(b0² + α − 0.5, α, ...), so the constant entry sets the
    // minimum eigenvalue once it drops below α.
    RawPrimitiveParams e1, e2, e3;
    e1.b[0] = std::sqrt(0.5 - 0.5 * kDefaultAlpha);
    e2.b[0] = std::sqrt(0.5 - 0.75 * kDefaultAlpha);
    e3.b[0] = 3.0;
    const Scene s = Scene::from_raw({e1, e2, e3});
    const PruneResult pr = prune(s);
    CHECK(pr.all_empty);
    REQUIRE(pr.scene.size() == 1);
    CHECK(pr.scene.raw()[0] == e2);
    CHECK(pr.scene.meta().count("prune_warning") == 1);
}

TEST_CASE("save then load is bit-exact on raw params") {
    std::mt19937_64 rng(25);
    for (int trial = 0; trial < 5; ++trial) {
        Scene s = random_scene(rng, 1 + trial * 3);
        s.set_meta("source", "unit test");
        const auto path = temp_path("roundtrip.ias.json");
        save_scene(s, path);
        const Scene t = load_scene(path);
        REQUIRE(t.size() == s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            const auto fa = s.raw()[i].flatten();
            const auto fb = t.raw()[i].flatten();
            for (int k = 0; k < kParamsPerPrimitive; ++k) CHECK(std::bit_cast<std::uint64_t>(fa[k]) == std::bit_cast<std::uint64_t>(fb[k]));
        }
        CHECK(t.alpha() == s.alpha());
        CHECK(t.meta() == s.meta());
        CHECK(scene_to_json(t) == scene_to_json(s));
        std::filesystem::remove(path);
    }
}

TEST_CASE("scene file carries derived data") {
    std::mt19937_64 rng(26);
    const Scene s = random_scene(rng, 2);
    const auto j = nlohmann::json::parse(scene_to_json(s));
    CHECK(j["version"] == kSceneFormatVersion);
    CHECK(j["primitives"].size() == 2);
    const auto& d = j["primitives"][0]["derived"];
    CHECK(d["coefficients"].size() == 35);
    CHECK(d["R"].get<double>() == s.primitive(0).r);
    CHECK(d["closedness_margin"].get<double>() >= kDefaultAlpha * (1 - 1e-9));
    CHECK_THROWS_AS(scene_to_json(Scene::from_primitives({test::sphere_primitive()})), InvalidArgument);
}

TEST_CASE("load rejects schema violations") {
    std::mt19937_64 rng(27);
    const Scene s = random_scene(rng, 2);
    auto j = nlohmann::json::parse(scene_to_json(s));

    auto bad = j;
    bad["primitives"][1]["b"].push_back(0.25);  // 60 params per primitive
    CHECK_THROWS_AS(scene_from_json(bad.dump()), SchemaError);

    bad = j;
    bad["version"] = 2;
    CHECK_THROWS_AS(scene_from_json(bad.dump()), SchemaError);

    bad = j;
    bad["primitives"][0]["c_raw"].erase(0);
    CHECK_THROWS_AS(scene_from_json(bad.dump()), SchemaError);

    bad = j;
    bad["primitives"] = nlohmann::json::array();
    CHECK_THROWS_AS(scene_from_json(bad.dump()), SchemaError);

    CHECK_THROWS_AS(scene_from_json("{ not json"), SchemaError);
    CHECK_THROWS_AS(load_scene(temp_path("does_not_exist.ias.json")), Error);

    auto stripped = j;
    for (auto& p : stripped["primitives"]) p.erase("derived");
    CHECK(scene_from_json(stripped.dump()).raw() == s.raw());
}

TEST_CASE("load rejects a corrupted byte") {
    std::mt19937_64 rng(28);
    const Scene s = random_scene(rng, 3);
    const auto path = temp_path("corrupt.ias.json");
    save_scene(s, path);
    const std::string text = read_file(path);
    std::filesystem::remove(path);

    // Leading significant digit of the first B entries.
    int corrupted = 0;
    const auto j = nlohmann::json::parse(text);
    std::size_t pos = text.find('[', text.find("\"b\""));
    for (int i = 0; i < 12; ++i) {
        const std::size_t end = text.find_first_of(",]", pos + 1);
        const std::size_t digit = text.find_first_of("123456789", pos + 1);
        REQUIRE(digit < end);
        std::string bad = text;
        bad[digit] = bad[digit] == '9' ? '1' : static_cast<char>(bad[digit] + 1);
        CHECK_THROWS_AS(scene_from_json(bad), IntegrityError);
        ++corrupted;
        pos = end;
    }
    CHECK(corrupted == 12);

    auto tampered = j;
    tampered["primitives"][2]["derived"]["closedness_margin"] = 0.5 * kDefaultAlpha;
    CHECK_THROWS_AS(scene_from_json(tampered.dump()), IntegrityError);

    tampered = j;
    tampered["alpha"] = 2e-4;
    CHECK_THROWS_AS(scene_from_json(tampered.dump()), IntegrityError);
}
