#include "slicerec/metrics/carve.hpp"

#include <cmath>
#include <stdexcept>

#include "slicerec/geometry/sdf.hpp"

namespace srec {

size_t VoxelOccupancy::count() const {
    size_t n = 0;
    for (uint8_t v : occupied) n += v != 0;
    return n;
}

namespace {

bool mask_covers(const Mask& mask, const Vec2& pixel) {
    const int x = static_cast<int>(std::floor(pixel.x));
    const int y = static_cast<int>(std::floor(pixel.y));
    if (x < 0 || y < 0 || x >= mask.width || y >= mask.height) return false;
    return mask.at(y, x) != 0;
}

int slab_of(double coord, const std::vector<double>& offsets) {
    const int n = static_cast<int>(offsets.size()) - 1;
    if (coord <= offsets.front()) return 0;
    if (coord >= offsets.back()) return n - 1;
    for (int i = 0; i < n; ++i)
        if (coord <= offsets[i + 1]) return i;
    return n - 1;
}

}  // namespace

VoxelOccupancy slab_carve_oracle(const SliceStack& stack,
                                 const std::vector<std::vector<double>>& offsets_per_axis,
                                 const CameraPose& pose, const Intrinsics& intr,
                                 int grid_resolution) {
    if (offsets_per_axis.size() != 3)
        throw std::invalid_argument("slab_carve_oracle: need offsets for all three axes");
    VoxelOccupancy occ(grid_resolution);

    Vec3 dirs[3];
    for (int a = 0; a < 3; ++a) {
        dirs[a] = stack.frame == SliceFrame::Canonical
                      ? Vec3{a == 0 ? 1.0 : 0.0, a == 1 ? 1.0 : 0.0, a == 2 ? 1.0 : 0.0}
                      : pose.rotation.row(a);
    }

    for (int z = 0; z < grid_resolution; ++z) {
        for (int y = 0; y < grid_resolution; ++y) {
            for (int x = 0; x < grid_resolution; ++x) {
                const Vec3 p = occ.center(x, y, z);
                const Projection proj = project_point(p, pose, intr);
                if (proj.behind) continue;
                bool inside = true;
                for (int a = 0; a < 3 && inside; ++a) {
                    const double coord = p.dot(dirs[a]);
                    const auto& offsets = offsets_per_axis[a];
                    if (coord < offsets.front() || coord > offsets.back()) {
                        inside = false;
                        break;
                    }
                    const int slab = slab_of(coord, offsets);
                    inside = mask_covers(stack.mask(static_cast<Axis>(a), slab), proj.pixel);
                }
                if (inside) occ.at(x, y, z) = 1;
            }
        }
    }
    return occ;
}

VoxelOccupancy hull_occupancy(const Mask& silhouette, const CameraPose& pose,
                              const Intrinsics& intr, int grid_resolution) {
    VoxelOccupancy occ(grid_resolution);
    for (int z = 0; z < grid_resolution; ++z)
        for (int y = 0; y < grid_resolution; ++y)
            for (int x = 0; x < grid_resolution; ++x) {
                const Projection proj = project_point(occ.center(x, y, z), pose, intr);
                if (!proj.behind && mask_covers(silhouette, proj.pixel)) occ.at(x, y, z) = 1;
            }
    return occ;
}

VoxelOccupancy voxelize_mesh(const TriangleMesh& mesh, int grid_resolution) {
    VoxelOccupancy occ(grid_resolution);
    const SignedDistanceField sdf(mesh);
    for (int z = 0; z < grid_resolution; ++z)
        for (int y = 0; y < grid_resolution; ++y)
            for (int x = 0; x < grid_resolution; ++x)
                if (sdf.inside(occ.center(x, y, z))) occ.at(x, y, z) = 1;
    return occ;
}

double occupancy_iou(const VoxelOccupancy& a, const VoxelOccupancy& b) {
    if (a.resolution != b.resolution)
        throw std::invalid_argument("occupancy_iou: resolution mismatch");
    size_t inter = 0, uni = 0;
    for (size_t i = 0; i < a.occupied.size(); ++i) {
        const bool va = a.occupied[i] != 0, vb = b.occupied[i] != 0;
        inter += va && vb;
        uni += va || vb;
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
}

}  // namespace srec
