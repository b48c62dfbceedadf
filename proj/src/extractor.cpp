#include "ias/extractor.hpp"

#include <cstdint>
#include <fstream>
#include <unordered_map>

#include "ias/error.hpp"
#include "ias/renderer.hpp"
#include "mc_table.hpp"

namespace ias {

Vec3 GridSpec::node(int i, int j, int k) const {
    const Vec3 e = domain.extent();
    const double r = resolution;
    return {domain.lo.x + e.x * (i / r), domain.lo.y + e.y * (j / r), domain.lo.z + e.z * (k / r)};
}

namespace {

void eval_slab(const Scene& scene, const GridSpec& grid, int k, double* out) {
    const int n = grid.nodes_per_axis();
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(j) * n + i] = eval_union(scene, grid.node(i, j, k)).value;
}

void check_grid(const GridSpec& grid) {
    if (grid.resolution < 8) throw InvalidArgument("extraction resolution must be at least 8");
}

// Corner offsets and edge endpoints of the table's cube numbering.
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
constexpr int kEdge[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                              {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

}  // namespace

std::vector<double> eval_grid(const Scene& scene, const GridSpec& grid) {
    check_grid(grid);
    const int n = grid.nodes_per_axis();
    const std::size_t slab = static_cast<std::size_t>(n) * n;
    std::vector<double> field(grid.node_count());
#pragma omp parallel for schedule(dynamic, 1)
    for (int k = 0; k < n; ++k) eval_slab(scene, grid, k, field.data() + slab * k);
    return field;
}

std::vector<double> serial::eval_grid(const Scene& scene, const GridSpec& grid) {
    check_grid(grid);
    const int n = grid.nodes_per_axis();
    std::vector<double> field(grid.node_count());
    std::size_t idx = 0;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) field[idx++] = eval_union(scene, grid.node(i, j, k)).value;
    return field;
}

TriMesh marching_cubes(const std::vector<double>& field, const GridSpec& grid) {
    check_grid(grid);
    if (field.size() != grid.node_count()) throw InvalidArgument("field size does not match grid");
    const int n = grid.nodes_per_axis();
    const int res = grid.resolution;
    auto lin = [n](int i, int j, int k) {
        return (static_cast<std::uint64_t>(k) * n + j) * n + i;
    };

    TriMesh mesh;
    std::unordered_map<std::uint64_t, int> edge_vertex;
    auto vertex_on_edge = [&](int ci, int cj, int ck, int edge) {
        int a = kEdge[edge][0];
        int b = kEdge[edge][1];
        const std::array<int, 3> pa{ci + kCorner[a][0], cj + kCorner[a][1], ck + kCorner[a][2]};
        const std::array<int, 3> pb{ci + kCorner[b][0], cj + kCorner[b][1], ck + kCorner[b][2]};
        // Canonical direction: from the lower node to the upper node along one axis.
        const bool swap = pa[0] + pa[1] + pa[2] > pb[0] + pb[1] + pb[2];
        const auto& lo = swap ? pb : pa;
        const auto& hi = swap ? pa : pb;
        const int axis = hi[0] != lo[0] ? 0 : (hi[1] != lo[1] ? 1 : 2);
        const std::uint64_t key = lin(lo[0], lo[1], lo[2]) * 3 + axis;
        if (auto it = edge_vertex.find(key); it != edge_vertex.end()) return it->second;
        const double v0 = field[lin(lo[0], lo[1], lo[2])];
        const double v1 = field[lin(hi[0], hi[1], hi[2])];
        const double t = v0 / (v0 - v1);
        const Vec3 p0 = grid.node(lo[0], lo[1], lo[2]);
        const Vec3 p1 = grid.node(hi[0], hi[1], hi[2]);
        mesh.vertices.push_back(p0 + t * (p1 - p0));
        const int id = static_cast<int>(mesh.vertices.size()) - 1;
        edge_vertex.emplace(key, id);
        return id;
    };

    for (int k = 0; k < res; ++k)
        for (int j = 0; j < res; ++j)
            for (int i = 0; i < res; ++i) {
                int cube = 0;
                for (int c = 0; c < 8; ++c)
                    if (field[lin(i + kCorner[c][0], j + kCorner[c][1], k + kCorner[c][2])] < 0.0) cube |= 1 << c;
                if (cube == 0 || cube == 255) continue;
                const auto& row = detail::kTriTable[cube];
                for (int t = 0; row[t] != -1; t += 3) {
                    const int a = vertex_on_edge(i, j, k, row[t]);
                    const int b = vertex_on_edge(i, j, k, row[t + 1]);
                    const int c = vertex_on_edge(i, j, k, row[t + 2]);
                    mesh.triangles.push_back({a, c, b});
                }
            }
    mesh.not_watertight = !mesh.triangles.empty() && !is_watertight(mesh);
    return mesh;
}

TriMesh extract_mesh(const Scene& scene, int resolution, const Box3& domain) {
    const GridSpec grid{resolution, domain};
    return marching_cubes(eval_grid(scene, grid), grid);
}

LabeledMesh label_vertices(const Scene& scene, const TriMesh& mesh) {
    LabeledMesh out{mesh, std::vector<int>(mesh.vertices.size())};
#pragma omp parallel for schedule(static)
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) out.labels[v] = eval_union(scene, mesh.vertices[v]).index;
    return out;
}

void save_labels(const LabeledMesh& lm, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    for (int l : lm.labels) out << l << '\n';
}

void save_colored_ply(const LabeledMesh& lm, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << "ply\nformat ascii 1.0\n"
        << "element vertex " << lm.mesh.vertices.size() << "\n"
        << "property float x\nproperty float y\nproperty float z\n"
        << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
        << "element face " << lm.mesh.triangles.size() << "\n"
        << "property list uchar int vertex_indices\nend_header\n";
    out.precision(9);
    for (std::size_t v = 0; v < lm.mesh.vertices.size(); ++v) {
        const Vec3& p = lm.mesh.vertices[v];
        const Rgb c = primitive_color(lm.labels[v]);
        out << p.x << ' ' << p.y << ' ' << p.z << ' ' << int(c.r) << ' ' << int(c.g) << ' ' << int(c.b) << '\n';
    }
    for (const auto& t : lm.mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace ias
