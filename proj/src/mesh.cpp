#include "ias/mesh.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>

#include "ias/error.hpp"
#include "ias/rng.hpp"

namespace ias {

Vec3 TriMesh::face_normal(std::size_t t) const {
    const auto& tri = triangles[t];
    const Vec3 n = cross(vertices[tri[1]] - vertices[tri[0]], vertices[tri[2]] - vertices[tri[0]]);
    return normalized(n);
}

double TriMesh::face_area(std::size_t t) const {
    const auto& tri = triangles[t];
    return 0.5 * norm(cross(vertices[tri[1]] - vertices[tri[0]], vertices[tri[2]] - vertices[tri[0]]));
}

Box3 TriMesh::bounds() const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    Box3 b{{inf, inf, inf}, {-inf, -inf, -inf}};
    for (const Vec3& v : vertices) {
        b.lo = {std::min(b.lo.x, v.x), std::min(b.lo.y, v.y), std::min(b.lo.z, v.z)};
        b.hi = {std::max(b.hi.x, v.x), std::max(b.hi.y, v.y), std::max(b.hi.z, v.z)};
    }
    return b;
}

bool is_watertight(const TriMesh& mesh) {
    std::unordered_map<std::uint64_t, int> edges;
    edges.reserve(mesh.triangles.size() * 3);
    for (const auto& tri : mesh.triangles)
        for (int e = 0; e < 3; ++e) {
            auto a = static_cast<std::uint64_t>(tri[e]);
            auto b = static_cast<std::uint64_t>(tri[(e + 1) % 3]);
            if (a > b) std::swap(a, b);
            ++edges[(a << 32) | b];
        }
    return !mesh.triangles.empty() &&
           std::all_of(edges.begin(), edges.end(), [](const auto& kv) { return kv.second == 2; });
}

double surface_area(const TriMesh& mesh) {
    double a = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) a += mesh.face_area(t);
    return a;
}

double enclosed_volume(const TriMesh& mesh) {
    double v = 0.0;
    for (const auto& t : mesh.triangles)
        v += dot(mesh.vertices[t[0]], cross(mesh.vertices[t[1]], mesh.vertices[t[2]]));
    return v / 6.0;
}

long euler_characteristic(const TriMesh& mesh) {
    std::vector<char> used(mesh.vertices.size(), 0);
    std::unordered_map<std::uint64_t, char> edges;
    edges.reserve(mesh.triangles.size() * 2);
    for (const auto& tri : mesh.triangles)
        for (int e = 0; e < 3; ++e) {
            used[tri[e]] = 1;
            auto a = static_cast<std::uint64_t>(tri[e]);
            auto b = static_cast<std::uint64_t>(tri[(e + 1) % 3]);
            if (a > b) std::swap(a, b);
            edges.emplace((a << 32) | b, 1);
        }
    const long v = std::count(used.begin(), used.end(), 1);
    return v - static_cast<long>(edges.size()) + static_cast<long>(mesh.triangles.size());
}

std::vector<Vec3> vertex_normals(const TriMesh& mesh) {
    std::vector<Vec3> n(mesh.vertices.size());
    for (const auto& t : mesh.triangles) {
        const Vec3 f = cross(mesh.vertices[t[1]] - mesh.vertices[t[0]], mesh.vertices[t[2]] - mesh.vertices[t[0]]);
        for (int k = 0; k < 3; ++k) n[t[k]] += f;
    }
    for (Vec3& v : n) {
        const double l = norm(v);
        if (l > 0.0) v = v / l;
    }
    return n;
}

// ---------------------------------------------------------------------------
// OBJ

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

double parse_double(std::string_view tok, std::size_t line) {
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw ParseError("invalid number '" + std::string(tok) + "'", line);
    return v;
}

long parse_index(std::string_view tok, std::size_t line) {
    const auto slash = tok.find('/');
    const std::string_view head = tok.substr(0, slash);
    long v = 0;
    const auto res = std::from_chars(head.data(), head.data() + head.size(), v);
    if (res.ec != std::errc() || res.ptr != head.data() + head.size() || v == 0)
        throw ParseError("invalid face index '" + std::string(tok) + "'", line);
    return v;
}

}  // namespace

TriMesh parse_obj(const std::string& text) {
    TriMesh mesh;
    struct Face {
        std::vector<long> idx;
        std::size_t line;
    };
    std::vector<Face> faces;
    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view s = trim(raw);
        if (const auto hash = s.find('#'); hash != std::string_view::npos) s = trim(s.substr(0, hash));
        if (s.empty()) continue;
        const auto tok = split_ws(s);
        if (tok[0] == "v") {
            if (tok.size() < 4) throw ParseError("vertex record needs 3 coordinates", line);
            mesh.vertices.push_back({parse_double(tok[1], line), parse_double(tok[2], line),
                                     parse_double(tok[3], line)});
        } else if (tok[0] == "f") {
            if (tok.size() < 4) throw ParseError("face record needs at least 3 indices", line);
            Face f{{}, line};
            for (std::size_t i = 1; i < tok.size(); ++i) {
                long v = parse_index(tok[i], line);
                // Negative indices are relative to the vertices read so far.
                if (v < 0) v = static_cast<long>(mesh.vertices.size()) + v + 1;
                f.idx.push_back(v - 1);
            }
            faces.push_back(std::move(f));
        }
    }
    const long nv = static_cast<long>(mesh.vertices.size());
    for (const Face& f : faces) {
        for (long v : f.idx)
            if (v < 0 || v >= nv) throw ParseError("face index out of range", f.line);
        for (std::size_t i = 1; i + 1 < f.idx.size(); ++i) {
            const std::array<int, 3> tri{static_cast<int>(f.idx[0]), static_cast<int>(f.idx[i]),
                                         static_cast<int>(f.idx[i + 1])};
            const Vec3& a = mesh.vertices[tri[0]];
            const Vec3 n = cross(mesh.vertices[tri[1]] - a, mesh.vertices[tri[2]] - a);
            if (norm2(n) == 0.0) continue;
            mesh.triangles.push_back(tri);
        }
    }
    mesh.not_watertight = !is_watertight(mesh);
    return mesh;
}

TriMesh load_obj(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_obj(ss.str());
}

void save_obj(const TriMesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << std::setprecision(17);
    for (const Vec3& v : mesh.vertices) out << "v " << v.x << ' ' << v.y << ' ' << v.z << '\n';
    for (const auto& t : mesh.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    if (!out) throw Error("failed writing " + path.string());
}

NormalizedMesh normalize_mesh(const TriMesh& mesh) {
    if (mesh.vertices.empty()) throw InvalidArgument("cannot normalize an empty mesh");
    const Box3 b = mesh.bounds();
    const Vec3 e = b.extent();
    const double longest = std::max({e.x, e.y, e.z});
    if (!(longest > 0.0)) throw InvalidArgument("mesh has zero extent");
    NormalizedMesh out;
    out.transform.scale = 2.0 / longest;
    out.transform.offset = -out.transform.scale * (0.5 * (b.lo + b.hi));
    out.mesh = mesh;
    for (Vec3& v : out.mesh.vertices) v = out.transform.apply(v);
    return out;
}

// ---------------------------------------------------------------------------
// Ray parity

struct MeshSignOracle::Impl {
    struct AxisGrid {
        int u = 0, v = 0;
        double u0 = 0, v0 = 0, inv_cu = 0, inv_cv = 0;
        int nu = 1, nv = 1;
        std::vector<std::uint32_t> offsets;
        std::vector<std::uint32_t> items;
    };

    std::vector<Vec3> verts;
    std::vector<std::array<int, 3>> tris;
    std::array<AxisGrid, 3> grids;
    Box3 bounds;
    double scale = 1.0;

    void build(int axis) {
        AxisGrid& g = grids[axis];
        g.u = (axis + 1) % 3;
        g.v = (axis + 2) % 3;
        const int res = std::clamp(static_cast<int>(std::sqrt(static_cast<double>(tris.size()))), 1, 512);
        g.nu = g.nv = res;
        g.u0 = bounds.lo[g.u];
        g.v0 = bounds.lo[g.v];
        const double eu = std::max(bounds.hi[g.u] - bounds.lo[g.u], 1e-12);
        const double ev = std::max(bounds.hi[g.v] - bounds.lo[g.v], 1e-12);
        g.inv_cu = res / eu;
        g.inv_cv = res / ev;

        std::vector<std::uint32_t> counts(static_cast<std::size_t>(res) * res + 1, 0);
        auto cell_range = [&](const std::array<int, 3>& t, int& iu0, int& iu1, int& iv0, int& iv1) {
            double umin = 1e300, umax = -1e300, vmin = 1e300, vmax = -1e300;
            for (int k = 0; k < 3; ++k) {
                umin = std::min(umin, verts[t[k]][g.u]);
                umax = std::max(umax, verts[t[k]][g.u]);
                vmin = std::min(vmin, verts[t[k]][g.v]);
                vmax = std::max(vmax, verts[t[k]][g.v]);
            }
            iu0 = std::clamp(static_cast<int>(std::floor((umin - g.u0) * g.inv_cu)) - 1, 0, res - 1);
            iu1 = std::clamp(static_cast<int>(std::floor((umax - g.u0) * g.inv_cu)) + 1, 0, res - 1);
            iv0 = std::clamp(static_cast<int>(std::floor((vmin - g.v0) * g.inv_cv)) - 1, 0, res - 1);
            iv1 = std::clamp(static_cast<int>(std::floor((vmax - g.v0) * g.inv_cv)) + 1, 0, res - 1);
        };
        for (const auto& t : tris) {
            int a, b, c, d;
            cell_range(t, a, b, c, d);
            for (int iu = a; iu <= b; ++iu)
                for (int iv = c; iv <= d; ++iv) ++counts[static_cast<std::size_t>(iu) * res + iv + 1];
        }
        for (std::size_t i = 1; i < counts.size(); ++i) counts[i] += counts[i - 1];
        g.offsets = counts;
        g.items.resize(counts.back());
        std::vector<std::uint32_t> fill(counts.begin(), counts.end() - 1);
        for (std::uint32_t ti = 0; ti < tris.size(); ++ti) {
            int a, b, c, d;
            cell_range(tris[ti], a, b, c, d);
            for (int iu = a; iu <= b; ++iu)
                for (int iv = c; iv <= d; ++iv) g.items[fill[static_cast<std::size_t>(iu) * res + iv]++] = ti;
        }
    }

    enum class Cast { ok, degenerate };

    Cast cast(const Vec3& q, int axis, int& count) const {
        const AxisGrid& g = grids[axis];
        count = 0;
        const double pu = q[g.u];
        const double pv = q[g.v];
        const int iu = static_cast<int>(std::floor((pu - g.u0) * g.inv_cu));
        const int iv = static_cast<int>(std::floor((pv - g.v0) * g.inv_cv));
        if (iu < 0 || iv < 0 || iu >= g.nu || iv >= g.nv) return Cast::ok;
        const std::size_t cell = static_cast<std::size_t>(iu) * g.nv + iv;
        constexpr double kEdgeEps = 1e-9;
        for (std::uint32_t k = g.offsets[cell]; k < g.offsets[cell + 1]; ++k) {
            const auto& t = tris[g.items[k]];
            const Vec3& A = verts[t[0]];
            const Vec3& B = verts[t[1]];
            const Vec3& C = verts[t[2]];
            auto orient = [&](const Vec3& X, const Vec3& Y) {
                return (Y[g.u] - X[g.u]) * (pv - X[g.v]) - (Y[g.v] - X[g.v]) * (pu - X[g.u]);
            };
            auto len = [&](const Vec3& X, const Vec3& Y) { return std::hypot(Y[g.u] - X[g.u], Y[g.v] - X[g.v]); };
            const double e0 = orient(B, C);
            const double e1 = orient(C, A);
            const double e2 = orient(A, B);
            const double area2 = (B[g.u] - A[g.u]) * (C[g.v] - A[g.v]) - (B[g.v] - A[g.v]) * (C[g.u] - A[g.u]);
            if (area2 == 0.0) continue;  // parallel to the ray
            const double s = area2 > 0 ? 1.0 : -1.0;
            const double d0 = s * e0 / len(B, C);
            const double d1 = s * e1 / len(C, A);
            const double d2 = s * e2 / len(A, B);
            const double dmin = std::min({d0, d1, d2});
            if (dmin < -kEdgeEps) continue;
            if (dmin <= kEdgeEps) return Cast::degenerate;
            const double along = (e0 * A[axis] + e1 * B[axis] + e2 * C[axis]) / area2;
            if (std::abs(along - q[axis]) <= kEdgeEps) return Cast::degenerate;
            if (along > q[axis]) ++count;
        }
        return Cast::ok;
    }

    int crossings(const Vec3& p, int axis) const {
        static constexpr Vec3 kJitter{0.7548776662466927, 0.5698402909980532, 0.4301597090019468};
        int count = 0;
        Vec3 q = p;
        for (int attempt = 0; attempt < 24; ++attempt) {
            if (cast(q, axis, count) == Cast::ok) return count;
            const double step = 1e-9 * scale * std::ldexp(1.0, attempt);
            q = p + step * Vec3{kJitter.x, kJitter.y, kJitter.z};
        }
        return count;
    }
};

MeshSignOracle::MeshSignOracle(const TriMesh& mesh) : impl_(std::make_unique<Impl>()) {
    if (mesh.triangles.empty()) throw InvalidArgument("sign oracle needs a non-empty mesh");
    impl_->verts = mesh.vertices;
    impl_->tris = mesh.triangles;
    impl_->bounds = mesh.bounds();
    impl_->scale = std::max(1.0, norm(impl_->bounds.extent()));
    for (int a = 0; a < 3; ++a) impl_->build(a);
}

MeshSignOracle::~MeshSignOracle() = default;
MeshSignOracle::MeshSignOracle(MeshSignOracle&&) noexcept = default;
MeshSignOracle& MeshSignOracle::operator=(MeshSignOracle&&) noexcept = default;

int MeshSignOracle::crossings(const Vec3& p, int axis) const { return impl_->crossings(p, axis); }

MeshSignOracle::Result MeshSignOracle::classify(const Vec3& p) const {
    int inside_votes = 0;
    for (int a = 0; a < 3; ++a) inside_votes += impl_->crossings(p, a) % 2;
    return {inside_votes >= 2 ? -1 : 1, inside_votes == 0 || inside_votes == 3};
}

int point_sign(const TriMesh& mesh, const Vec3& p) { return MeshSignOracle(mesh).sign(p); }

// ---------------------------------------------------------------------------
// Sampling

namespace {

constexpr std::uint64_t kSurfaceStream = 0x53555246ULL;  // "SURF"
constexpr std::uint64_t kVolumeStream = 0x564f4c55ULL;   // "VOLU"

}  // namespace

std::vector<SurfaceSample> sample_surface(const TriMesh& mesh, std::size_t n, std::uint64_t seed) {
    if (mesh.triangles.empty()) throw InvalidArgument("cannot sample an empty mesh");
    std::vector<double> cdf(mesh.triangles.size());
    double total = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        total += mesh.face_area(t);
        cdf[t] = total;
    }
    std::vector<SurfaceSample> out(n);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng(stream_seed(seed, kSurfaceStream, i));
        const double pick = rng.uniform() * total;
        std::size_t t = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), pick) - cdf.begin());
        t = std::min(t, cdf.size() - 1);
        const auto& tri = mesh.triangles[t];
        const double r1 = std::sqrt(rng.uniform());
        const double r2 = rng.uniform();
        const Vec3& a = mesh.vertices[tri[0]];
        const Vec3& b = mesh.vertices[tri[1]];
        const Vec3& c = mesh.vertices[tri[2]];
        out[i].point = (1.0 - r1) * a + (r1 * (1.0 - r2)) * b + (r1 * r2) * c;
        out[i].normal = mesh.face_normal(t);
        out[i].triangle = static_cast<int>(t);
    }

    if (n > 0) {
        const MeshSignOracle oracle(mesh);
        const std::size_t probes = std::max<std::size_t>(1, n / 100);
        const double eps = 1e-4 * std::max(1e-12, norm(mesh.bounds().extent()));
        std::size_t inward = 0;
        for (std::size_t k = 0; k < probes; ++k) {
            const SurfaceSample& s = out[k * n / probes];
            if (oracle.sign(s.point + eps * s.normal) < 0) ++inward;
        }
        if (2 * inward > probes)
            for (auto& s : out) s.normal = -s.normal;
    }
    return out;
}

SampleSet build_sample_set(const TriMesh& mesh, std::size_t n_volume, std::size_t n_surface,
                           std::uint64_t seed, const Box3& domain, SampleStats* stats) {
    const Box3 b = mesh.bounds();
    if (!domain.contains(b.lo) || !domain.contains(b.hi))
        throw InvalidArgument("mesh extends outside the sampling domain; normalize it first");

    SampleSet set;
    set.domain = domain;
    const MeshSignOracle oracle(mesh);
    std::vector<Vec3> pts(n_volume);
    std::vector<signed char> label(n_volume);
    std::vector<unsigned char> split(n_volume);
    const Vec3 e = domain.extent();
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n_volume; ++i) {
        Rng rng(stream_seed(seed, kVolumeStream, i));
        const double x = rng.uniform();
        const double y = rng.uniform();
        const double z = rng.uniform();
        pts[i] = {domain.lo.x + e.x * x, domain.lo.y + e.y * y, domain.lo.z + e.z * z};
        const auto r = oracle.classify(pts[i]);
        label[i] = static_cast<signed char>(r.sign);
        split[i] = r.unanimous ? 0 : 1;
    }
    std::size_t disagreements = 0;
    for (std::size_t i = 0; i < n_volume; ++i) {
        disagreements += split[i];
        (label[i] < 0 ? set.inside : set.outside).push_back(pts[i]);
    }
    if (stats) stats->disagreements = disagreements;
    if (n_volume > 0 && static_cast<double>(disagreements) > 1e-3 * static_cast<double>(n_volume))
        throw Error("inside/outside parities disagree on " + std::to_string(disagreements) + " of " +
                    std::to_string(n_volume) + " points; mesh is not watertight");

    for (const SurfaceSample& s : sample_surface(mesh, n_surface, seed))
        set.on.push_back({s.point, s.normal});
    return set;
}

// ---------------------------------------------------------------------------
// Binary sample cache

namespace {

template <typename T>
void put(std::ostream& out, T v) {
    static_assert(std::endian::native == std::endian::little, "sample cache assumes a little-endian host");
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    char buf[sizeof(T)];
    if (!in.read(buf, sizeof(T))) throw SchemaError("sample cache is truncated");
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

void put_vec(std::ostream& out, const Vec3& v) {
    put(out, v.x);
    put(out, v.y);
    put(out, v.z);
}

Vec3 get_vec(std::istream& in) {
    const double x = get<double>(in);
    const double y = get<double>(in);
    const double z = get<double>(in);
    return {x, y, z};
}

}  // namespace

void save_samples(const SampleSet& set, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.write("IASS", 4);
    put<std::uint32_t>(out, kSampleFormatVersion);
    put<std::uint64_t>(out, set.on.size());
    put<std::uint64_t>(out, set.inside.size());
    put<std::uint64_t>(out, set.outside.size());
    put_vec(out, set.domain.lo);
    put_vec(out, set.domain.hi);
    for (const auto& o : set.on) {
        put_vec(out, o.point);
        put_vec(out, o.normal);
    }
    for (const Vec3& p : set.inside) put_vec(out, p);
    for (const Vec3& p : set.outside) put_vec(out, p);
    if (!out) throw Error("failed writing " + path.string());
}

SampleSet load_samples(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "IASS", 4) != 0) throw SchemaError("not a sample cache (bad magic)");
    if (get<std::uint32_t>(in) != kSampleFormatVersion) throw SchemaError("unsupported sample cache version");
    const auto n_on = get<std::uint64_t>(in);
    const auto n_in = get<std::uint64_t>(in);
    const auto n_out = get<std::uint64_t>(in);
    SampleSet set;
    set.domain.lo = get_vec(in);
    set.domain.hi = get_vec(in);
    set.on.resize(n_on);
    for (auto& o : set.on) {
        o.point = get_vec(in);
        o.normal = get_vec(in);
    }
    set.inside.resize(n_in);
    for (auto& p : set.inside) p = get_vec(in);
    set.outside.resize(n_out);
    for (auto& p : set.outside) p = get_vec(in);
    return set;
}

// ---------------------------------------------------------------------------
// Fixture meshes

TriMesh make_icosphere(double radius, int subdivisions) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    TriMesh m;
    m.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                  {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    m.triangles = {{0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                   {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
                   {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
    for (auto& v : m.vertices) v = normalized(v);
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> mid;
        auto midpoint = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            if (auto it = mid.find(key); it != mid.end()) return it->second;
            m.vertices.push_back(normalized(m.vertices[a] + m.vertices[b]));
            const int id = static_cast<int>(m.vertices.size()) - 1;
            mid.emplace(key, id);
            return id;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(m.triangles.size() * 4);
        for (const auto& tri : m.triangles) {
            const int ab = midpoint(tri[0], tri[1]);
            const int bc = midpoint(tri[1], tri[2]);
            const int ca = midpoint(tri[2], tri[0]);
            next.push_back({tri[0], ab, ca});
            next.push_back({tri[1], bc, ab});
            next.push_back({tri[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        m.triangles = std::move(next);
    }
    for (auto& v : m.vertices) v *= radius;
    return m;
}

TriMesh make_box(const Vec3& lo, const Vec3& hi, int divisions) {
    const int n = std::max(1, divisions);
    TriMesh m;
    std::map<std::array<int, 3>, int> ids;
    auto vid = [&](std::array<int, 3> ijk) {
        if (auto it = ids.find(ijk); it != ids.end()) return it->second;
        const Vec3 f{static_cast<double>(ijk[0]) / n, static_cast<double>(ijk[1]) / n,
                     static_cast<double>(ijk[2]) / n};
        m.vertices.push_back({lo.x + (hi.x - lo.x) * f.x, lo.y + (hi.y - lo.y) * f.y, lo.z + (hi.z - lo.z) * f.z});
        const int id = static_cast<int>(m.vertices.size()) - 1;
        ids.emplace(ijk, id);
        return id;
    };
    // For each axis and side, a grid of quads on the face, wound counter-clockwise seen from outside.
    for (int axis = 0; axis < 3; ++axis) {
        const int u = (axis + 1) % 3;
        const int v = (axis + 2) % 3;
        for (int side = 0; side < 2; ++side) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    auto at = [&](int a, int b) {
                        std::array<int, 3> c{};
                        c[axis] = side * n;
                        c[u] = a;
                        c[v] = b;
                        return vid(c);
                    };
                    const int q00 = at(i, j), q10 = at(i + 1, j), q11 = at(i + 1, j + 1), q01 = at(i, j + 1);
                    if (side == 1) {
                        m.triangles.push_back({q00, q10, q11});
                        m.triangles.push_back({q00, q11, q01});
                    } else {
                        m.triangles.push_back({q00, q11, q10});
                        m.triangles.push_back({q00, q01, q11});
                    }
                }
        }
    }
    return m;
}

TriMesh make_torus(double major, double minor, int major_segments, int minor_segments) {
    TriMesh m;
    const int nu = std::max(3, major_segments);
    const int nv = std::max(3, minor_segments);
    constexpr double kTwoPi = 6.283185307179586477;
    for (int i = 0; i < nu; ++i) {
        const double u = kTwoPi * i / nu;
        for (int j = 0; j < nv; ++j) {
            const double v = kTwoPi * j / nv;
            const double ring = major + minor * std::cos(v);
            m.vertices.push_back({ring * std::cos(u), ring * std::sin(u), minor * std::sin(v)});
        }
    }
    auto id = [&](int i, int j) { return ((i % nu) * nv) + (j % nv); };
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) {
            const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
            m.triangles.push_back({a, b, c});
            m.triangles.push_back({a, c, d});
        }
    return m;
}

}  // namespace ias
