#include "slicerec/nets/regressor.hpp"

#include <stdexcept>

namespace srec {

using namespace nn;

namespace {
int norm_groups(int channels) { return channels % 8 == 0 ? 8 : (channels % 4 == 0 ? 4 : 1); }
}

int SlicerRegressor::width(int level) const {
    return cfg_.base_width * (1 << std::min(level, 3));
}

SlicerRegressor::SlicerRegressor(const RegressorConfig& config, uint64_t seed) : cfg_(config) {
    Rng rng(seed);
    if (cfg_.onehot_codes) {
        // rows frozen to standard-basis vectors
        Tensor c({cfg_.n_slices_total, cfg_.code_dim});
        for (int i = 0; i < cfg_.n_slices_total; ++i) c.data[i * cfg_.code_dim + i % cfg_.code_dim] = 1.f;
        codes_ = constant(std::move(c));
    } else {
        codes_ = reg_.add("codes", Tensor::randn({cfg_.n_slices_total, cfg_.code_dim}, rng, 0.02));
    }

    stem_ = Conv(reg_, "enc.stem", cfg_.in_channels, width(0), 3, rng);
    stem_norm_.emplace_back(reg_, "enc.stem.norm", width(0), norm_groups(width(0)));
    for (int l = 1; l < cfg_.levels; ++l) {
        down_.emplace_back(reg_, "enc.down" + std::to_string(l), width(l - 1), width(l), 3, rng, 2);
        down_norm_.emplace_back(reg_, "enc.down" + std::to_string(l) + ".norm", width(l),
                                norm_groups(width(l)));
        down_mix_.emplace_back(reg_, "enc.mix" + std::to_string(l), width(l), width(l), 3, rng);
        down_mix_norm_.emplace_back(reg_, "enc.mix" + std::to_string(l) + ".norm", width(l),
                                    norm_groups(width(l)));
    }
    const int bw = width(cfg_.levels - 1);
    bottleneck_mix_ = Conv(reg_, "dec.bottleneck", bw + cfg_.code_dim, bw, 3, rng);
    bottleneck_norm_ = GroupNorm(reg_, "dec.bottleneck.norm", bw, norm_groups(bw));
    for (int l = cfg_.levels - 1; l >= 1; --l) {
        // input: upsampled width(l) + skip width(l-1)
        up_.emplace_back(reg_, "dec.up" + std::to_string(l), width(l) + width(l - 1), width(l - 1),
                         3, rng);
        up_norm_.emplace_back(reg_, "dec.up" + std::to_string(l) + ".norm", width(l - 1),
                              norm_groups(width(l - 1)));
    }
    head_ = Conv(reg_, "dec.head", width(0), 1, 3, rng);
}

std::vector<Var> SlicerRegressor::encode(const Var& image) const {
    std::vector<Var> feats;
    Var x = silu(stem_norm_[0](stem_(image)));
    feats.push_back(x);
    for (size_t l = 0; l < down_.size(); ++l) {
        x = silu(down_norm_[l](down_[l](x)));
        x = silu(down_mix_norm_[l](down_mix_[l](x)));
        feats.push_back(x);
    }
    return feats;
}

Var SlicerRegressor::code_row(int slice_index) const {
    if (slice_index < 0 || slice_index >= cfg_.n_slices_total)
        throw std::out_of_range("code_row: slice index out of range");
    return take_rows(codes_, {slice_index});
}

Var SlicerRegressor::decode_with_code(const std::vector<Var>& feats, const Var& code_row) const {
    const Var& bottom = feats.back();
    const int64_t h = bottom->value.shape[2], w = bottom->value.shape[3];
    Var x = concat({bottom, broadcast_spatial(code_row, h, w)}, 1);
    x = silu(bottleneck_norm_(bottleneck_mix_(x)));
    for (size_t i = 0; i < up_.size(); ++i) {
        const size_t skip_level = feats.size() - 2 - i;
        x = concat({upsample_nearest2(x), feats[skip_level]}, 1);
        x = silu(up_norm_[i](up_[i](x)));
    }
    return sigmoid(head_(x));
}

Var SlicerRegressor::decode(const std::vector<Var>& feats, int slice_index) const {
    return decode_with_code(feats, code_row(slice_index));
}

std::vector<Var> SlicerRegressor::regress_slices(const Var& image) const {
    const auto& s = image->value.shape;
    if (s.size() != 4 || s[1] != cfg_.in_channels || s[2] != cfg_.image_size ||
        s[3] != cfg_.image_size)
        throw std::invalid_argument("regress_slices: bad input shape " + image->value.shape_str());
    const auto feats = encode(image);
    std::vector<Var> out;
    out.reserve(cfg_.n_slices_total);
    for (int i = 0; i < cfg_.n_slices_total; ++i) out.push_back(decode(feats, i));
    return out;
}

Var loss_reg(const std::vector<Var>& predicted, const std::vector<Tensor>& ground_truth,
             const FixedPyramid& pyramid) {
    if (predicted.size() != ground_truth.size() || predicted.empty())
        throw std::invalid_argument("loss_reg: stack size mismatch");
    Var total;
    for (size_t i = 0; i < predicted.size(); ++i) {
        Var gt = constant(ground_truth[i]);
        if (!predicted[i]->value.same_shape(gt->value))
            throw std::invalid_argument("loss_reg: slice shape mismatch");
        Var term = add(l1_mean(predicted[i], gt), perceptual_distance(predicted[i], gt, pyramid));
        total = total ? add(total, term) : term;
    }
    return scale(total, 1.0 / predicted.size());
}

}  // namespace srec
