#pragma once

#include <vector>

#include "slicerec/core/image.hpp"
#include "slicerec/nn/layers.hpp"

namespace srec {

// HWC images <-> NCHW tensors.
nn::Tensor image_to_tensor(const Image& image);                       // [1,C,H,W]
nn::Tensor images_to_tensor(const std::vector<Image>& images);        // [N,C,H,W]
Image tensor_to_image(const nn::Tensor& t, int batch_index = 0);      // clamped to [0,1]

// Sinusoidal timestep embedding, [1, dim].
nn::Tensor time_embedding(int t, int dim);

// Fixed, seeded, randomly initialized 3-level conv feature pyramid. Used as
// the perceptual-distance backbone and as the diffusion conditioning
// extractor; its weights are constants, never trained.
class FixedPyramid {
public:
    explicit FixedPyramid(int in_channels, uint64_t seed = 1234);

    // Feature maps at full, half, and quarter resolution.
    std::vector<nn::Var> operator()(const nn::Var& image) const;
    std::vector<int64_t> channels() const { return {16, 32, 64}; }

private:
    nn::Var w0_, b0_, w1_, b1_, w2_, b2_;
};

// Mean over levels of the mean squared distance between channel-unit-
// normalized activations of the fixed pyramid. Symmetric, zero iff the
// activations agree.
nn::Var perceptual_distance(const nn::Var& a, const nn::Var& b, const FixedPyramid& pyramid);
double perceptual_distance(const Image& a, const Image& b);

}  // namespace srec
