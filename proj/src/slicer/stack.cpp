#include "slicerec/slicer/stack.hpp"

#include <stdexcept>

namespace srec {

SliceStack build_slice_stack(const TriangleMesh& mesh, const CameraPose& pose,
                             const Intrinsics& intr, int n_slices_per_axis,
                             const RenderOptions& options, SliceFrame frame) {
    SliceStack stack;
    stack.n_slices_per_axis = n_slices_per_axis;
    stack.frame = frame;
    stack.options = options;
    for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
        const SlabSet slabs =
            slice_mesh(mesh, axis, n_slices_per_axis, frame, &pose, options.fill_holes);
        for (const TriangleMesh& slab : slabs.slabs) {
            RasterOutput r = render_mesh(slab, pose, intr, options, /*channels=*/1);
            stack.images.push_back(std::move(r.image));
            stack.masks.push_back(std::move(r.mask));
        }
    }
    return stack;
}

Mask union_silhouette(const SliceStack& stack, Axis axis) {
    if (stack.masks.empty()) throw std::invalid_argument("union_silhouette: empty stack");
    Mask acc = stack.mask(axis, 0);
    for (int i = 1; i < stack.n_slices_per_axis; ++i) acc = mask_or(acc, stack.mask(axis, i));
    return acc;
}

double stack_consistency_deviation(const std::vector<Image>& images, int n_slices_per_axis,
                                   double threshold) {
    if (images.empty() || static_cast<int>(images.size()) != 3 * n_slices_per_axis)
        throw std::invalid_argument("stack_consistency_deviation: need 3*N_s images");
    const int W = images[0].width, H = images[0].height;

    auto binarize_union = [&](int first, int count) {
        Mask m(W, H);
        for (int s = first; s < first + count; ++s)
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x)
                    if (images[s].at(y, x) > threshold) m.at(y, x) = 1;
        return m;
    };

    Mask per_axis[3];
    for (int a = 0; a < 3; ++a) per_axis[a] = binarize_union(a * n_slices_per_axis, n_slices_per_axis);
    Mask global = mask_or(mask_or(per_axis[0], per_axis[1]), per_axis[2]);
    const double denom = std::max<size_t>(global.count(), 1);

    double worst = 0;
    for (int a = 0; a < 3; ++a)
        worst = std::max(worst, mask_diff_count(per_axis[a], global) / denom);
    return worst;
}

}  // namespace srec
