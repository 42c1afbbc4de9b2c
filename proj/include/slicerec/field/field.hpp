#pragma once

#include <vector>

#include "slicerec/camera/camera.hpp"
#include "slicerec/geometry/mesh.hpp"
#include "slicerec/geometry/voxel.hpp"
#include "slicerec/nets/common.hpp"

namespace srec {

struct FieldConfig {
    int image_size = 128;
    int n_slices_total = 12;  // 3 * N_s
    int n_channels = 128;     // N_c
    int levels = 3;           // feature pyramid depth (>= 2)
    int transformer_layers = 4;
    int heads = 4;
    // slice identity comes from token order plus a learned type embedding
};

// Implicit field from slices: a shared hierarchical CNN turns every slice
// image into a feature pyramid; a query point is projected to the slice
// plane, per-level features are bilinearly retrieved at the projection and
// concatenated to N_c; a transformer over [query token, slice tokens...]
// reads the signed distance off the query token.
class FieldModel {
public:
    FieldModel(const FieldConfig& config, uint64_t seed);

    // One pyramid per slice image ([slice][level], each [1,C_l,H_l,W_l]).
    std::vector<std::vector<nn::Var>> extract_pyramids(const std::vector<nn::Var>& slices) const;
    std::vector<nn::Var> extract_pyramid(const nn::Var& slice_image) const;

    // Per-level concatenated retrieval at continuous pixel positions
    // (original-image coordinates). Returns [M, N_c].
    nn::Var retrieve(const std::vector<nn::Var>& pyramid,
                     const std::vector<Vec2>& pixels) const;

    // Signed distances for a batch of queries. Tokens: the projected query
    // first, then slice features in stack order. Returns [M, 1].
    nn::Var predict(const std::vector<Vec3>& queries,
                    const std::vector<std::vector<nn::Var>>& pyramids, const CameraPose& pose,
                    const Intrinsics& intrinsics) const;
    // Same, with an explicit token permutation of the slice tokens
    // (order-sensitivity tests).
    nn::Var predict_permuted(const std::vector<Vec3>& queries,
                             const std::vector<std::vector<nn::Var>>& pyramids,
                             const CameraPose& pose, const Intrinsics& intrinsics,
                             const std::vector<int>& slice_order) const;

    // Dense field over a [-0.5,0.5]^3 node grid, evaluated in batches.
    VoxelField evaluate_grid(const std::vector<Image>& slice_images, const CameraPose& pose,
                             const Intrinsics& intrinsics, int resolution,
                             int batch = 2048) const;

    // Queries that projected behind the camera in the lifetime of this model
    // (clamped, still answered).
    size_t behind_camera_count() const { return behind_count_; }

    const FieldConfig& config() const { return cfg_; }
    nn::ParamRegistry& registry() { return reg_; }
    std::vector<nn::Var> parameters() const { return reg_.vars(); }

private:
    std::vector<int64_t> level_channels() const;

    FieldConfig cfg_;
    nn::ParamRegistry reg_;

    std::vector<nn::Conv> pyr_conv_;
    std::vector<nn::GroupNorm> pyr_norm_;
    nn::Linear query_proj_;
    nn::Var type_embedding_;  // [1 + n_slices_total, N_c]

    struct Block {
        nn::LayerNorm ln1, ln2;
        nn::Linear wq, wk, wv, wo, ff1, ff2;
    };
    std::vector<Block> blocks_;
    nn::LayerNorm final_norm_;
    nn::Linear readout_;

    mutable size_t behind_count_ = 0;
};

// Mean absolute error between predicted [M,1] (or [M]) and targets.
nn::Var loss_imp(const nn::Var& predicted, const std::vector<double>& target);

// Field evaluation + marching cubes. Returns an empty mesh (with a warning
// on stderr) when the field never crosses zero.
TriangleMesh reconstruct_from_slices(const FieldModel& model, const std::vector<Image>& slices,
                                     const CameraPose& pose, const Intrinsics& intrinsics,
                                     int grid_resolution);

}  // namespace srec
