#include "slicerec/geometry/marching_cubes.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "slicerec/geometry/mc_tables.hpp"

namespace srec {

namespace {

// Cell-corner offsets in table order.
constexpr int kCorner[8][3] = {
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
    {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
};
// Edge -> (corner, corner) in table order.
constexpr int kEdge[12][2] = {
    {0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
    {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7},
};

}  // namespace

bool VoxelField::finite() const {
    for (float v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

VoxelField VoxelField::from_function(int resolution, const std::function<double(const Vec3&)>& f,
                                     Vec3 lo, Vec3 hi) {
    VoxelField field(resolution, resolution, resolution, lo, hi);
    for (int z = 0; z < resolution; ++z)
        for (int y = 0; y < resolution; ++y)
            for (int x = 0; x < resolution; ++x)
                field.at(x, y, z) = static_cast<float>(f(field.node_position(x, y, z)));
    return field;
}

TriangleMesh marching_cubes(const VoxelField& field, double iso) {
    if (field.nx < 2 || field.ny < 2 || field.nz < 2)
        throw std::invalid_argument("marching_cubes: need at least 2 nodes per axis");
    if (!field.finite()) throw std::invalid_argument("marching_cubes: non-finite field");

    TriangleMesh mesh;
    // Weld vertices by global grid-edge key so shared edges reuse the same
    // interpolated vertex; this is what makes the output closed.
    std::unordered_map<uint64_t, int> edge_vertex;
    auto node_id = [&](int x, int y, int z) -> uint64_t {
        return (static_cast<uint64_t>(z) * field.ny + y) * field.nx + x;
    };

    auto edge_point = [&](int ax, int ay, int az, int bx, int by, int bz) -> int {
        uint64_t ia = node_id(ax, ay, az), ib = node_id(bx, by, bz);
        if (ia > ib) {
            std::swap(ia, ib);
            std::swap(ax, bx);
            std::swap(ay, by);
            std::swap(az, bz);
        }
        const uint64_t key = (ia << 32) | ib;
        auto it = edge_vertex.find(key);
        if (it != edge_vertex.end()) return it->second;

        const double va = field.at(ax, ay, az), vb = field.at(bx, by, bz);
        double t = 0.5;
        if (std::abs(vb - va) > 1e-30) t = (iso - va) / (vb - va);
        t = std::clamp(t, 0.0, 1.0);
        const Vec3 pa = field.node_position(ax, ay, az);
        const Vec3 pb = field.node_position(bx, by, bz);
        const int idx = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back(pa + (pb - pa) * t);
        edge_vertex[key] = idx;
        return idx;
    };

    for (int z = 0; z < field.nz - 1; ++z) {
        for (int y = 0; y < field.ny - 1; ++y) {
            for (int x = 0; x < field.nx - 1; ++x) {
                int cube = 0;
                double corner_val[8];
                for (int c = 0; c < 8; ++c) {
                    corner_val[c] =
                        field.at(x + kCorner[c][0], y + kCorner[c][1], z + kCorner[c][2]);
                    if (corner_val[c] < iso) cube |= 1 << c;
                }
                if (mc::kEdgeTable[cube] == 0) continue;

                int edge_idx[12];
                for (int e = 0; e < 12; ++e) {
                    if (!(mc::kEdgeTable[cube] & (1 << e))) continue;
                    const int* ca = kCorner[kEdge[e][0]];
                    const int* cb = kCorner[kEdge[e][1]];
                    edge_idx[e] = edge_point(x + ca[0], y + ca[1], z + ca[2],
                                             x + cb[0], y + cb[1], z + cb[2]);
                }
                for (int i = 0; mc::kTriTable[cube][i] != -1; i += 3) {
                    const int a = edge_idx[mc::kTriTable[cube][i]];
                    const int b = edge_idx[mc::kTriTable[cube][i + 1]];
                    const int c = edge_idx[mc::kTriTable[cube][i + 2]];
                    if (a == b || b == c || a == c) continue;  // collapsed sliver
                    // table order is CW from outside under this corner
                    // convention; flip for outward CCW winding
                    mesh.faces.push_back({a, c, b});
                }
            }
        }
    }
    return mesh;
}

}  // namespace srec
