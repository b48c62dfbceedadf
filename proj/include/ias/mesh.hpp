#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "ias/vec3.hpp"

namespace ias {

struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
    /// Set when some edge is not shared by exactly two triangles.
    bool not_watertight = false;

    Vec3 face_normal(std::size_t t) const;  // unit, from winding
    double face_area(std::size_t t) const;
    Box3 bounds() const;
};

/// Recomputes TriMesh::not_watertight from edge incidence.
bool is_watertight(const TriMesh& mesh);

double surface_area(const TriMesh& mesh);
/// Signed volume by the divergence theorem; positive for outward winding.
double enclosed_volume(const TriMesh& mesh);
/// V − E + F over referenced vertices and unique undirected edges.
long euler_characteristic(const TriMesh& mesh);
/// Area-weighted unit vertex normals.
std::vector<Vec3> vertex_normals(const TriMesh& mesh);

/// ASCII OBJ: `v` and `f` records (polygons fan-split, `a/b/c` and negative indices
/// accepted, other records ignored). Zero-area triangles are dropped.
/// Throws ParseError with the offending line number.
TriMesh load_obj(const std::filesystem::path& path);
TriMesh parse_obj(const std::string& text);
void save_obj(const TriMesh& mesh, const std::filesystem::path& path);

/// p ↦ scale·p + offset.
struct NormalizeTransform {
    double scale = 1.0;
    Vec3 offset{};

    Vec3 apply(const Vec3& p) const { return scale * p + offset; }
    Vec3 invert(const Vec3& p) const { return (p - offset) / scale; }
};

struct NormalizedMesh {
    TriMesh mesh;
    NormalizeTransform transform;
};

/// Uniform scale and translation placing the bounding box center at the origin with the
/// longest side spanning [−1, 1]. Throws InvalidArgument for empty or zero-extent meshes.
NormalizedMesh normalize_mesh(const TriMesh& mesh);

/// Inside/outside classification by ray parity along +x, +y and +z with a majority vote.
/// Triangles are bucketed on a 2D grid per axis so each query touches only the triangles
/// whose projection covers the query point.
class MeshSignOracle {
public:
    explicit MeshSignOracle(const TriMesh& mesh);
    ~MeshSignOracle();
    MeshSignOracle(MeshSignOracle&&) noexcept;
    MeshSignOracle& operator=(MeshSignOracle&&) noexcept;

    struct Result {
        int sign = 1;          // −1 inside, +1 outside
        bool unanimous = true;  // all three axis parities agreed
    };

    Result classify(const Vec3& p) const;
    int sign(const Vec3& p) const { return classify(p).sign; }
    bool inside(const Vec3& p) const { return classify(p).sign < 0; }

    /// Number of crossings of the ray p + t·e_axis, t > 0 (after edge perturbation).
    int crossings(const Vec3& p, int axis) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// −1 inside, +1 outside. Builds a throwaway oracle; prefer MeshSignOracle for batches.
int point_sign(const TriMesh& mesh, const Vec3& p);

struct SurfaceSample {
    Vec3 point;
    Vec3 normal;  // unit, outward
    int triangle = 0;
};

/// Area-weighted surface samples with face normals. Orientation is checked against the
/// parity oracle on a 1% subsample and flipped globally if most normals point inward.
std::vector<SurfaceSample> sample_surface(const TriMesh& mesh, std::size_t n, std::uint64_t seed);

struct OrientedPoint {
    Vec3 point;
    Vec3 normal;
};

struct SampleSet {
    std::vector<OrientedPoint> on;
    std::vector<Vec3> inside;
    std::vector<Vec3> outside;
    Box3 domain = kDefaultDomain;
};

struct SampleStats {
    std::size_t disagreements = 0;  // volume points whose axis parities were not unanimous
};

/// n_volume uniform domain points labeled by parity plus n_surface oriented surface
/// points. Throws Error when axis parities disagree on more than 0.1% of volume points
/// (mesh not watertight) and InvalidArgument when the mesh leaves the domain.
SampleSet build_sample_set(const TriMesh& mesh, std::size_t n_volume, std::size_t n_surface,
                           std::uint64_t seed, const Box3& domain = kDefaultDomain,
                           SampleStats* stats = nullptr);

/// Binary cache: "IASS", u32 version, u64 counts (on, inside, outside), 6 f64 domain
/// bounds, then f64 records, little-endian.
void save_samples(const SampleSet& set, const std::filesystem::path& path);
SampleSet load_samples(const std::filesystem::path& path);

inline constexpr std::uint32_t kSampleFormatVersion = 1;

// Fixture meshes, all consistently wound with outward normals.
TriMesh make_icosphere(double radius, int subdivisions);
TriMesh make_box(const Vec3& lo, const Vec3& hi, int divisions = 1);
TriMesh make_torus(double major, double minor, int major_segments, int minor_segments);

}  // namespace ias
