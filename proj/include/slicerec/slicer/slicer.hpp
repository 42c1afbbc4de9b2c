#pragma once

#include <string>
#include <vector>

#include "slicerec/camera/camera.hpp"
#include "slicerec/geometry/mesh.hpp"

namespace srec {

enum class Axis { X = 0, Y = 1, Z = 2 };
enum class SliceFrame { Canonical, CameraAligned };

inline const char* axis_name(Axis a) { return a == Axis::X ? "X" : (a == Axis::Y ? "Y" : "Z"); }

// One slicing direction cut into N_s slabs. Slab i covers
// [offsets[i], offsets[i+1]] along the (unit) direction, i increasing
// along +direction; offsets has N_s+1 entries tiling the bbox extent.
struct SlabSet {
    Axis axis = Axis::X;
    SliceFrame frame = SliceFrame::Canonical;
    Vec3 direction{1, 0, 0};
    std::vector<TriangleMesh> slabs;
    std::vector<double> offsets;

    size_t size() const { return slabs.size(); }
    // Interior cutting-plane offsets (N_s - 1 of them).
    std::vector<double> cutting_offsets() const {
        return {offsets.begin() + 1, offsets.end() - 1};
    }
};

// Cuts the mesh into n_slabs equal-interval slabs along the chosen axis.
// Canonical frame cuts along the object axis; camera-aligned cuts along the
// camera basis vector for that axis. Cross-sections are left open unless
// fill_holes is set, in which case each boundary loop is capped by planar
// polygon triangulation. Throws std::invalid_argument when n_slabs < 1.
SlabSet slice_mesh(const TriangleMesh& mesh, Axis axis, int n_slabs,
                   SliceFrame frame = SliceFrame::Canonical,
                   const CameraPose* pose = nullptr, bool fill_holes = false);

// Clips the mesh to the half-space dot(p, dir) <= bound (keep_below) or
// >= bound. Face attribution (part, color, source face) is inherited.
TriangleMesh clip_mesh(const TriangleMesh& mesh, const Vec3& dir, double bound, bool keep_below);

}  // namespace srec
