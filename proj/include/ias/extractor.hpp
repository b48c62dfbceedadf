#pragma once

#include <filesystem>
#include <vector>

#include "ias/mesh.hpp"
#include "ias/scene.hpp"

namespace ias {

inline constexpr int kDefaultResolution = 128;

/// Node lattice over a box: (resolution + 1)³ samples, x fastest.
struct GridSpec {
    int resolution = kDefaultResolution;
    Box3 domain = kDefaultDomain;

    int nodes_per_axis() const { return resolution + 1; }
    std::size_t node_count() const {
        const auto n = static_cast<std::size_t>(nodes_per_axis());
        return n * n * n;
    }
    Vec3 node(int i, int j, int k) const;
};

/// Union value at every grid node (OpenMP over z-slabs).
std::vector<double> eval_grid(const Scene& scene, const GridSpec& grid);

namespace serial {
std::vector<double> eval_grid(const Scene& scene, const GridSpec& grid);
}

/// Marching cubes of the zero set of a node field. Vertices on shared grid edges are
/// shared, triangles are emitted in cell order and wound so normals point toward
/// positive values.
TriMesh marching_cubes(const std::vector<double>& field, const GridSpec& grid);

/// Zero set of the union as a triangle mesh. Resolution must be ≥ 8; the mesh is empty
/// when the field has one sign over the whole grid.
TriMesh extract_mesh(const Scene& scene, int resolution = kDefaultResolution,
                     const Box3& domain = kDefaultDomain);

struct LabeledMesh {
    TriMesh mesh;
    std::vector<int> labels;  // argmin primitive per vertex
};

LabeledMesh label_vertices(const Scene& scene, const TriMesh& mesh);

/// One label per line.
void save_labels(const LabeledMesh& lm, const std::filesystem::path& path);
/// ASCII PLY with per-vertex palette colors.
void save_colored_ply(const LabeledMesh& lm, const std::filesystem::path& path);

}  // namespace ias
