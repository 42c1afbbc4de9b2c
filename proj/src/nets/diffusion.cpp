#include "slicerec/nets/diffusion.hpp"

#include <cmath>
#include <stdexcept>

namespace srec {

using namespace nn;

DiffusionSchedule DiffusionSchedule::linear(int timesteps, double beta_start, double beta_end) {
    if (timesteps < 1) throw std::invalid_argument("DiffusionSchedule: timesteps must be >= 1");
    DiffusionSchedule s;
    s.betas.resize(timesteps);
    for (int t = 0; t < timesteps; ++t)
        s.betas[t] = timesteps == 1
                         ? beta_start
                         : beta_start + (beta_end - beta_start) * t / (timesteps - 1);
    s.alpha_bar.resize(timesteps + 1);
    s.alpha_bar[0] = 1.0;
    for (int t = 1; t <= timesteps; ++t) s.alpha_bar[t] = s.alpha_bar[t - 1] * (1.0 - s.betas[t - 1]);
    return s;
}

StackedSlices stack_slices(const std::vector<Image>& images, StackMode mode) {
    if (images.empty()) throw std::invalid_argument("stack_slices: empty stack");
    const int H = images[0].height, W = images[0].width;
    const int S = static_cast<int>(images.size());
    for (const Image& im : images)
        if (im.width != W || im.height != H || im.channels != 1)
            throw std::invalid_argument("stack_slices: slices must be matching single-channel images");

    StackedSlices out;
    out.mode = mode;
    out.n_slices = S;
    out.height = H;
    out.width = W;
    if (mode == StackMode::Color) {
        out.tensor = Tensor({S, H, W});
        for (int s = 0; s < S; ++s)
            std::copy(images[s].data.begin(), images[s].data.end(),
                      out.tensor.data.begin() + static_cast<size_t>(s) * H * W);
    } else {
        out.tensor = Tensor({1, static_cast<int64_t>(S) * H, W});
        for (int s = 0; s < S; ++s)
            std::copy(images[s].data.begin(), images[s].data.end(),
                      out.tensor.data.begin() + static_cast<size_t>(s) * H * W);
    }
    return out;
}

StackedSlices stack_slices(const SliceStack& stack, StackMode mode) {
    return stack_slices(stack.images, mode);
}

std::vector<Image> unstack_slices(const StackedSlices& stacked) {
    const int S = stacked.n_slices, H = stacked.height, W = stacked.width;
    if (static_cast<int64_t>(S) * H * W != stacked.tensor.numel())
        throw std::invalid_argument("unstack_slices: inconsistent metadata");
    std::vector<Image> images(S, Image(W, H, 1));
    for (int s = 0; s < S; ++s)
        std::copy_n(stacked.tensor.data.begin() + static_cast<size_t>(s) * H * W, H * W,
                    images[s].data.begin());
    return images;
}

Tensor forward_diffuse(const Tensor& x0, int t, const Tensor& noise,
                       const DiffusionSchedule& schedule) {
    if (t < 0 || t > schedule.timesteps())
        throw std::out_of_range("forward_diffuse: t outside [0, T]");
    if (!x0.same_shape(noise)) throw std::invalid_argument("forward_diffuse: noise shape mismatch");
    if (t == 0) return x0;
    const double ab = schedule.alpha_bar[t];
    const float c0 = static_cast<float>(std::sqrt(ab));
    const float c1 = static_cast<float>(std::sqrt(1.0 - ab));
    Tensor out(x0.shape);
    for (int64_t i = 0; i < out.numel(); ++i) out.data[i] = c0 * x0.data[i] + c1 * noise.data[i];
    return out;
}

namespace {
int norm_groups(int channels) { return channels % 8 == 0 ? 8 : (channels % 4 == 0 ? 4 : 1); }
}

Denoiser::Denoiser(const DenoiserConfig& config, uint64_t seed)
    : cfg_(config), cond_pyramid_(config.cond_channels, seed ^ 0x9e3779b9) {
    Rng rng(seed);
    time_mlp_ = Linear(reg_, "time.mlp", cfg_.time_dim, cfg_.time_dim, rng);
    time_out_ = Linear(reg_, "time.out", cfg_.time_dim, cfg_.time_dim, rng);

    stem_ = Conv(reg_, "stem", cfg_.in_channels, width(0), 3, rng);
    stem_norm_ = GroupNorm(reg_, "stem.norm", width(0), norm_groups(width(0)));
    const auto cond_ch = cond_pyramid_.channels();
    for (int l = 0; l < cfg_.levels; ++l) {
        // scale + shift per channel (FiLM-style), so the noise level survives
        // the group normalizations
        time_proj_.emplace_back(reg_, "time.proj" + std::to_string(l), cfg_.time_dim,
                                2 * width(l), rng);
        if (l < static_cast<int>(cond_ch.size()))
            cond_proj_.emplace_back(reg_, "cond.proj" + std::to_string(l), cond_ch[l], width(l), 1,
                                    rng, 1, 0);
        if (l > 0) {
            down_.emplace_back(reg_, "down" + std::to_string(l), width(l - 1), width(l), 3, rng, 2);
            norm_a_.emplace_back(reg_, "down" + std::to_string(l) + ".norm", width(l),
                                 norm_groups(width(l)));
        }
        mix_.emplace_back(reg_, "mix" + std::to_string(l), width(l), width(l), 3, rng);
        norm_b_.emplace_back(reg_, "mix" + std::to_string(l) + ".norm", width(l),
                             norm_groups(width(l)));
    }
    for (int l = cfg_.levels - 1; l >= 1; --l) {
        up_.emplace_back(reg_, "up" + std::to_string(l), width(l) + width(l - 1), width(l - 1), 3,
                         rng);
        up_norm_.emplace_back(reg_, "up" + std::to_string(l) + ".norm", width(l - 1),
                              norm_groups(width(l - 1)));
    }
    head_ = Conv(reg_, "head", width(0), cfg_.in_channels, 3, rng);
}

std::vector<Var> Denoiser::condition_features(const Var& view) const {
    auto feats = cond_pyramid_(view);
    if (cfg_.mode == StackMode::Spatial) {
        // tile vertically so each slice row sees the same view features
        for (Var& f : feats) {
            std::vector<Var> tiles(cfg_.n_slices, f);
            f = concat(tiles, 2);
        }
    }
    std::vector<Var> projected;
    for (size_t l = 0; l < cond_proj_.size(); ++l) projected.push_back(cond_proj_[l](feats[l]));
    return projected;
}

Var Denoiser::predict_noise_with_features(const Var& x, int t,
                                          const std::vector<Var>& cond) const {
    if (x->value.shape[1] != cfg_.in_channels)
        throw std::invalid_argument("predict_noise: channel mismatch " + x->value.shape_str());
    Var temb = silu(time_mlp_(constant(time_embedding(t, cfg_.time_dim))));
    temb = silu(time_out_(temb));  // [1, time_dim]

    auto add_time = [&](Var h, int level) {
        const int64_t hh = h->value.shape[2], ww = h->value.shape[3];
        const int64_t c = h->value.shape[1];
        Var film = time_proj_[level](temb);  // [1, 2C]
        Var scale_part = broadcast_spatial(narrow(film, 1, 0, c), hh, ww);
        Var shift_part = broadcast_spatial(narrow(film, 1, c, c), hh, ww);
        return add(mul(h, add_scalar(scale_part, 1.0)), shift_part);
    };
    auto add_cond = [&](Var h, int level) {
        if (level >= static_cast<int>(cond.size())) return h;
        return add(h, cond[level]);
    };

    std::vector<Var> skips;
    Var h = silu(stem_norm_(stem_(x)));
    h = add_cond(add_time(h, 0), 0);
    h = silu(norm_b_[0](mix_[0](h)));
    skips.push_back(h);
    for (int l = 1; l < cfg_.levels; ++l) {
        h = silu(norm_a_[l - 1](down_[l - 1](h)));
        h = add_cond(add_time(h, l), l);
        h = silu(norm_b_[l](mix_[l](h)));
        skips.push_back(h);
    }
    for (size_t i = 0; i < up_.size(); ++i) {
        const size_t skip_level = cfg_.levels - 2 - i;
        h = concat({upsample_nearest2(h), skips[skip_level]}, 1);
        h = silu(up_norm_[i](up_[i](h)));
    }
    return head_(h);
}

Var Denoiser::predict_noise(const Var& x, int t, const Var& view) const {
    return predict_noise_with_features(x, t, condition_features(view));
}

Var loss_gen(const Var& predicted_noise, const Tensor& noise) {
    if (!predicted_noise->value.same_shape(noise))
        throw std::invalid_argument("loss_gen: shape mismatch");
    return mse_mean(predicted_noise, constant(noise));
}

std::vector<Image> sample_slice_stack(const Denoiser& denoiser, const Image& view,
                                      const DiffusionSchedule& schedule, uint64_t rng_seed,
                                      int stride_steps) {
    const DenoiserConfig& cfg = denoiser.config();
    Rng rng(rng_seed);
    const int T = schedule.timesteps();

    // Respaced timestep ladder (simple stride); full schedule when 0.
    std::vector<int> steps;
    const int n_steps = stride_steps > 0 ? std::min(stride_steps, T) : T;
    for (int i = 0; i < n_steps; ++i)
        steps.push_back(1 + (i * T) / n_steps);  // ascending, unique for n_steps <= T
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());

    const int H = cfg.mode == StackMode::Color ? cfg.image_size : cfg.image_size * cfg.n_slices;
    const int W = cfg.image_size;
    Tensor x({1, cfg.in_channels, H, W});
    for (float& v : x.data) v = static_cast<float>(rng.normal());

    Var view_var = constant(image_to_tensor(view));
    const auto cond = denoiser.condition_features(view_var);

    for (int k = static_cast<int>(steps.size()) - 1; k >= 0; --k) {
        const int t = steps[k];
        const double ab_t = schedule.alpha_bar[t];
        const double ab_prev = k > 0 ? schedule.alpha_bar[steps[k - 1]] : 1.0;
        const double alpha = ab_t / ab_prev;
        const double beta = 1.0 - alpha;

        Var eps_hat = denoiser.predict_noise_with_features(constant(x), t, cond);
        const Tensor& eh = eps_hat->value;

        const double c1 = 1.0 / std::sqrt(alpha);
        const double c2 = beta / std::sqrt(1.0 - ab_t);
        const double sigma = k > 0 ? std::sqrt(beta * (1.0 - ab_prev) / (1.0 - ab_t)) : 0.0;
        for (int64_t i = 0; i < x.numel(); ++i) {
            double v = c1 * (x.data[i] - c2 * eh.data[i]);
            if (sigma > 0) v += sigma * rng.normal();
            x.data[i] = static_cast<float>(v);
        }
    }

    // back from [-1,1] model range to [0,1] images
    StackedSlices out;
    out.mode = cfg.mode;
    out.n_slices = cfg.n_slices;
    out.height = cfg.image_size;
    out.width = cfg.image_size;
    out.tensor = Tensor({cfg.mode == StackMode::Color ? cfg.n_slices : 1,
                         cfg.mode == StackMode::Color ? cfg.image_size
                                                      : static_cast<int64_t>(cfg.image_size) * cfg.n_slices,
                         cfg.image_size});
    for (int64_t i = 0; i < x.numel(); ++i)
        out.tensor.data[i] = std::clamp(0.5f * (x.data[i] + 1.f), 0.f, 1.f);
    return unstack_slices(out);
}

}  // namespace srec
