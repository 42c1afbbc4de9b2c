#pragma once

#include <vector>

#include "slicerec/slicer/raster.hpp"
#include "slicerec/slicer/slicer.hpp"

namespace srec {

// The 3*N_s grayscale slice images for one (shape, view), ordered X slabs
// near-to-far along +X, then Y, then Z (camera axes in camera-aligned
// frame). Occupancy masks ride along for representation-level tests.
struct SliceStack {
    int n_slices_per_axis = 0;
    SliceFrame frame = SliceFrame::Canonical;
    RenderOptions options;
    std::vector<Image> images;  // size 3*N_s, each HxWx1 in [0,1]
    std::vector<Mask> masks;

    int total() const { return static_cast<int>(images.size()); }
    int index(Axis axis, int slab) const {
        return static_cast<int>(axis) * n_slices_per_axis + slab;
    }
    const Image& image(Axis axis, int slab) const { return images[index(axis, slab)]; }
    const Mask& mask(Axis axis, int slab) const { return masks[index(axis, slab)]; }
};

SliceStack build_slice_stack(const TriangleMesh& mesh, const CameraPose& pose,
                             const Intrinsics& intrinsics, int n_slices_per_axis,
                             const RenderOptions& options = {},
                             SliceFrame frame = SliceFrame::Canonical);

// Pixelwise OR of one axis' occupancy masks.
Mask union_silhouette(const SliceStack& stack, Axis axis);

// Max over axes of |axis union XOR global union| / |global union|, after
// binarizing images at `threshold`. Zero for exact stacks; used to score the
// internal consistency of generated stacks.
double stack_consistency_deviation(const std::vector<Image>& images, int n_slices_per_axis,
                                   double threshold = 0.08);

}  // namespace srec
