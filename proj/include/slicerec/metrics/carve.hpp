#pragma once

#include <vector>

#include "slicerec/camera/camera.hpp"
#include "slicerec/core/image.hpp"
#include "slicerec/geometry/mesh.hpp"
#include "slicerec/slicer/stack.hpp"

namespace srec {

// Boolean occupancy over a voxel-center grid spanning [-0.5,0.5]^3.
struct VoxelOccupancy {
    int resolution = 0;
    std::vector<uint8_t> occupied;  // x-fastest

    VoxelOccupancy() = default;
    explicit VoxelOccupancy(int res)
        : resolution(res), occupied(static_cast<size_t>(res) * res * res, 0) {}

    uint8_t& at(int x, int y, int z) {
        return occupied[(static_cast<size_t>(z) * resolution + y) * resolution + x];
    }
    uint8_t at(int x, int y, int z) const {
        return occupied[(static_cast<size_t>(z) * resolution + y) * resolution + x];
    }
    Vec3 center(int x, int y, int z) const {
        const double step = 1.0 / resolution;
        return {-0.5 + (x + 0.5) * step, -0.5 + (y + 0.5) * step, -0.5 + (z + 0.5) * step};
    }
    size_t count() const;
};

// Slab carving: a voxel stays occupied iff, for every axis, the occupancy
// mask of the slab containing it covers the voxel's projected pixel. A
// deterministic lower-bound reconstruction from exact slices.
VoxelOccupancy slab_carve_oracle(const SliceStack& stack,
                                 const std::vector<std::vector<double>>& offsets_per_axis,
                                 const CameraPose& pose, const Intrinsics& intrinsics,
                                 int grid_resolution);

// Classic single-view visual hull on the same grid.
VoxelOccupancy hull_occupancy(const Mask& silhouette, const CameraPose& pose,
                              const Intrinsics& intrinsics, int grid_resolution);

// Ground-truth occupancy by the parity-ray inside test at voxel centers.
VoxelOccupancy voxelize_mesh(const TriangleMesh& mesh, int grid_resolution);

double occupancy_iou(const VoxelOccupancy& a, const VoxelOccupancy& b);

}  // namespace srec
