#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "slicerec/core/vec.hpp"

namespace srec {

// Scalar samples on a regular node grid over an axis-aligned box
// (default the [-0.5,0.5]^3 query domain). resolution = nodes per axis,
// so there are resolution-1 cells per axis.
struct VoxelField {
    int nx = 0, ny = 0, nz = 0;
    Vec3 lo{-0.5, -0.5, -0.5};
    Vec3 hi{0.5, 0.5, 0.5};
    std::vector<float> values;  // x-fastest

    VoxelField() = default;
    VoxelField(int nx_, int ny_, int nz_, Vec3 lo_ = {-0.5, -0.5, -0.5},
               Vec3 hi_ = {0.5, 0.5, 0.5})
        : nx(nx_), ny(ny_), nz(nz_), lo(lo_), hi(hi_),
          values(static_cast<size_t>(nx_) * ny_ * nz_, 0.f) {}

    float& at(int x, int y, int z) {
        return values[(static_cast<size_t>(z) * ny + y) * nx + x];
    }
    float at(int x, int y, int z) const {
        return values[(static_cast<size_t>(z) * ny + y) * nx + x];
    }
    Vec3 node_position(int x, int y, int z) const {
        const Vec3 ext = hi - lo;
        return {lo.x + ext.x * x / (nx - 1), lo.y + ext.y * y / (ny - 1),
                lo.z + ext.z * z / (nz - 1)};
    }
    Vec3 cell_size() const {
        const Vec3 ext = hi - lo;
        return {ext.x / (nx - 1), ext.y / (ny - 1), ext.z / (nz - 1)};
    }
    bool finite() const;

    static VoxelField from_function(int resolution, const std::function<double(const Vec3&)>& f,
                                    Vec3 lo = {-0.5, -0.5, -0.5}, Vec3 hi = {0.5, 0.5, 0.5});
};

}  // namespace srec
