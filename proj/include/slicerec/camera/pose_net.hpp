#pragma once

#include <vector>

#include "slicerec/camera/camera.hpp"
#include "slicerec/core/image.hpp"
#include "slicerec/nets/common.hpp"

namespace srec {

// CNN camera-pose estimator: input view -> raw 3x3 rotation + translation.
// The raw rotation is orthogonalized (nearest rotation) before use.
class PoseNet {
public:
    explicit PoseNet(int image_size, uint64_t seed);

    // Raw 12 outputs [N, 12]: 9 rotation entries row-major, then translation.
    nn::Var forward(const nn::Var& images) const;

    struct Estimate {
        Mat3 rotation;      // orthogonalized
        Mat3 raw_rotation;  // as regressed
        Vec3 translation;
    };
    Estimate estimate(const Image& image) const;
    std::vector<Estimate> estimate_batch(const std::vector<Image>& images) const;

    // Alignment loss on a query point cloud: P in object space, P_cam its
    // camera-space copy (row convention, matches the scalar loss_cam).
    nn::Var alignment_loss(const nn::Var& outputs, const std::vector<Vec3>& P,
                           const std::vector<Vec3>& P_cam) const;

    nn::ParamRegistry& registry() { return reg_; }
    std::vector<nn::Var> parameters() const { return reg_.vars(); }

private:
    int image_size_;
    nn::ParamRegistry reg_;
    std::vector<nn::Conv> convs_;
    std::vector<nn::GroupNorm> norms_;
    nn::Linear fc1_, fc2_;
};

}  // namespace srec
