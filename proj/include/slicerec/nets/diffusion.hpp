#pragma once

#include <vector>

#include "slicerec/nets/common.hpp"
#include "slicerec/slicer/stack.hpp"

namespace srec {

// Forward-process coefficients. t = 0 means clean data; betas[t-1] is the
// step-t variance. Everything is kept in double so the telescoping
// identities hold to near machine precision.
struct DiffusionSchedule {
    std::vector<double> betas;      // size T
    std::vector<double> alpha_bar;  // size T+1, alpha_bar[0] = 1

    static DiffusionSchedule linear(int timesteps, double beta_start = 1e-4,
                                    double beta_end = 2e-2);
    int timesteps() const { return static_cast<int>(betas.size()); }
    double alpha(int t) const { return 1.0 - betas[t - 1]; }
};

enum class StackMode { Color, Spatial };

// All 3*N_s slices concatenated into one tensor: [|S|, H, W] in color mode
// or [1, |S|*H, W] in spatial mode. Round-trips losslessly to SliceStack
// image data.
struct StackedSlices {
    nn::Tensor tensor;
    StackMode mode = StackMode::Color;
    int n_slices = 0;  // |S| = 3*N_s
    int height = 0, width = 0;
};

StackedSlices stack_slices(const std::vector<Image>& images, StackMode mode);
StackedSlices stack_slices(const SliceStack& stack, StackMode mode);
std::vector<Image> unstack_slices(const StackedSlices& stacked);

// Closed-form forward marginal x_t = sqrt(ab_t) x0 + sqrt(1-ab_t) eps.
// t = 0 returns x0 exactly. Throws when t is outside [0, T].
nn::Tensor forward_diffuse(const nn::Tensor& x0, int t, const nn::Tensor& noise,
                           const DiffusionSchedule& schedule);

struct DenoiserConfig {
    int in_channels = 12;  // |S| in color mode, 1 in spatial mode
    int base_width = 32;
    int levels = 3;
    int time_dim = 64;
    int cond_channels = 3;  // input view
    int image_size = 128;   // conditioning view size
    StackMode mode = StackMode::Color;
    int n_slices = 12;
};

// U-Net noise predictor. The input view is conditioned through the fixed
// feature pyramid: multi-layer features are projected by learned 1x1 convs
// and added into the matching encoder levels. Timestep enters every level
// as a learned per-channel bias from a sinusoidal embedding.
class Denoiser {
public:
    Denoiser(const DenoiserConfig& config, uint64_t seed);

    // x [N,C,H,W] noised stack, t timestep, view [N,3,H,W] conditioning.
    nn::Var predict_noise(const nn::Var& x, int t, const nn::Var& view) const;
    // Conditioning features can be precomputed (and zeroed for ablations).
    std::vector<nn::Var> condition_features(const nn::Var& view) const;
    nn::Var predict_noise_with_features(const nn::Var& x, int t,
                                        const std::vector<nn::Var>& cond) const;

    const DenoiserConfig& config() const { return cfg_; }
    nn::ParamRegistry& registry() { return reg_; }
    std::vector<nn::Var> parameters() const { return reg_.vars(); }
    const FixedPyramid& pyramid() const { return cond_pyramid_; }

private:
    int width(int level) const { return cfg_.base_width << std::min(level, 2); }

    DenoiserConfig cfg_;
    nn::ParamRegistry reg_;
    FixedPyramid cond_pyramid_;

    nn::Linear time_mlp_, time_out_;
    std::vector<nn::Linear> time_proj_;
    std::vector<nn::Conv> cond_proj_;
    nn::Conv stem_;
    std::vector<nn::Conv> down_, mix_;
    std::vector<nn::GroupNorm> norm_a_, norm_b_;
    nn::GroupNorm stem_norm_;
    std::vector<nn::Conv> up_;
    std::vector<nn::GroupNorm> up_norm_;
    nn::Conv head_;
};

// ||eps_hat - eps||^2 as a mean (shape-checked).
nn::Var loss_gen(const nn::Var& predicted_noise, const nn::Tensor& noise);

// Ancestral DDPM sampling from pure noise, optionally strided to fewer
// steps. Returns slice images clamped to [0,1] in stack order.
std::vector<Image> sample_slice_stack(const Denoiser& denoiser, const Image& view,
                                      const DiffusionSchedule& schedule, uint64_t rng_seed,
                                      int stride_steps = 0);

}  // namespace srec
