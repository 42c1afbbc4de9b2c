#pragma once

#include <vector>

#include "slicerec/nets/common.hpp"

namespace srec {

struct RegressorConfig {
    int image_size = 128;
    int in_channels = 3;
    int n_slices_total = 12;  // 3 * N_s
    int code_dim = 128;       // N_e
    int base_width = 32;
    int levels = 4;           // encoder levels including the bottleneck
    bool onehot_codes = false;
};

// Encoder-decoder with skip connections. The encoder runs once per input
// view; the decoder runs once per slice with that slice's indicator code
// broadcast-concatenated onto the bottleneck. Decoder output is sigmoid,
// already in [0,1].
class SlicerRegressor {
public:
    SlicerRegressor(const RegressorConfig& config, uint64_t seed);

    std::vector<nn::Var> encode(const nn::Var& image) const;
    nn::Var decode(const std::vector<nn::Var>& features, int slice_index) const;
    nn::Var decode_with_code(const std::vector<nn::Var>& features, const nn::Var& code_row) const;
    // All 3*N_s slices for one image, stack order.
    std::vector<nn::Var> regress_slices(const nn::Var& image) const;

    nn::Var code_row(int slice_index) const;  // [1, N_e]
    const nn::Var& codes() const { return codes_; }

    const RegressorConfig& config() const { return cfg_; }
    nn::ParamRegistry& registry() { return reg_; }
    std::vector<nn::Var> parameters() const { return reg_.vars(); }

private:
    int width(int level) const;

    RegressorConfig cfg_;
    nn::ParamRegistry reg_;
    nn::Var codes_;  // [3*N_s, N_e]; constant in one-hot mode

    nn::Conv stem_;
    std::vector<nn::Conv> down_, down_mix_;
    std::vector<nn::GroupNorm> down_norm_, down_mix_norm_, stem_norm_;
    nn::Conv bottleneck_mix_;
    nn::GroupNorm bottleneck_norm_;
    std::vector<nn::Conv> up_;
    std::vector<nn::GroupNorm> up_norm_;
    nn::Conv head_;
};

// Mean over slices of per-image mean L1 plus perceptual distance.
nn::Var loss_reg(const std::vector<nn::Var>& predicted, const std::vector<nn::Tensor>& ground_truth,
                 const FixedPyramid& pyramid);

}  // namespace srec
