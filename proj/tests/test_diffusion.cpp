#include <doctest.h>

#include <cmath>

#include "slicerec/nets/diffusion.hpp"
#include "slicerec/nn/optim.hpp"

using namespace srec;
using namespace srec::nn;

TEST_CASE("schedule invariants and telescoping identities") {
    const DiffusionSchedule s = DiffusionSchedule::linear(400);
    CHECK(s.timesteps() == 400);
    CHECK(s.alpha_bar[0] == 1.0);
    for (int t = 1; t < 400; ++t) CHECK(s.betas[t] > s.betas[t - 1]);
    CHECK(s.betas.front() == doctest::Approx(1e-4));
    CHECK(s.betas.back() == doctest::Approx(2e-2));
    for (int t = 1; t <= 400; ++t) CHECK(s.alpha_bar[t] < s.alpha_bar[t - 1]);

    // sqrt(ab_t) equals the product of sqrt(alpha_s)
    double prod = 1.0;
    for (int t = 1; t <= 400; ++t) {
        prod *= std::sqrt(s.alpha(t));
        CHECK(std::abs(prod - std::sqrt(s.alpha_bar[t])) < 1e-12);
    }
    // chain-composed noise variance telescopes to 1 - ab_t
    for (int t : {1, 7, 100, 400}) {
        double var = 0;
        for (int u = 1; u <= t; ++u) {
            double tail = 1.0;
            for (int v = u + 1; v <= t; ++v) tail *= s.alpha(v);
            var += s.betas[u - 1] * tail;
        }
        CHECK(std::abs(var - (1.0 - s.alpha_bar[t])) < 1e-10);
    }
}

TEST_CASE("forward_diffuse boundary behavior") {
    const DiffusionSchedule s = DiffusionSchedule::linear(1000);
    CHECK(s.alpha_bar[1000] < 1e-4);

    Rng rng(3);
    Tensor x0 = Tensor::randn({4, 8, 8}, rng);  // unit-scale data
    Tensor eps = Tensor::randn({4, 8, 8}, rng);

    // t = 0 is the identity
    const Tensor t0 = forward_diffuse(x0, 0, eps, s);
    for (int64_t i = 0; i < x0.numel(); ++i) CHECK(t0.data[i] == x0.data[i]);

    // t = T: within 2% (relative L2) of the pure noise
    const Tensor tT = forward_diffuse(x0, 1000, eps, s);
    double num = 0, den = 0;
    for (int64_t i = 0; i < x0.numel(); ++i) {
        num += (tT.data[i] - eps.data[i]) * (tT.data[i] - eps.data[i]);
        den += eps.data[i] * eps.data[i];
    }
    CHECK(std::sqrt(num / den) < 0.02);

    CHECK_THROWS(forward_diffuse(x0, -1, eps, s));
    CHECK_THROWS(forward_diffuse(x0, 1001, eps, s));
}

TEST_CASE("forward_diffuse matches the marginal variance empirically") {
    const DiffusionSchedule s = DiffusionSchedule::linear(400);
    Rng rng(5);
    // broad-scale data so Var(x0) is well away from 0
    Tensor x0({4, 4});
    for (float& v : x0.data) v = static_cast<float>(rng.uniform(-2, 2));
    double var_x0 = 0, mean_x0 = 0;
    for (float v : x0.data) mean_x0 += v;
    mean_x0 /= x0.numel();
    for (float v : x0.data) var_x0 += (v - mean_x0) * (v - mean_x0);
    var_x0 /= x0.numel();

    for (int t : {40, 200, 399}) {
        const double ab = s.alpha_bar[t];
        double mean = 0, var = 0;
        const int draws = 10000;
        std::vector<double> all;
        all.reserve(draws * x0.numel());
        for (int d = 0; d < draws; ++d) {
            Tensor eps = Tensor::randn(x0.shape, rng);
            const Tensor xt = forward_diffuse(x0, t, eps, s);
            for (float v : xt.data) all.push_back(v);
        }
        for (double v : all) mean += v;
        mean /= all.size();
        for (double v : all) var += (v - mean) * (v - mean);
        var /= all.size();
        const double expected = ab * var_x0 + (1.0 - ab);
        CHECK(std::abs(var - expected) / expected < 0.03);
    }
}

TEST_CASE("stack and unstack round trip in both modes") {
    Rng rng(7);
    std::vector<Image> images;
    for (int s = 0; s < 12; ++s) {
        Image im(16, 16, 1);
        for (auto& v : im.data) v = static_cast<float>(rng.uniform());
        images.push_back(im);
    }
    const StackedSlices color = stack_slices(images, StackMode::Color);
    CHECK(color.tensor.shape == std::vector<int64_t>{12, 16, 16});
    const StackedSlices spatial = stack_slices(images, StackMode::Spatial);
    CHECK(spatial.tensor.shape == std::vector<int64_t>{1, 192, 16});

    for (const auto& stacked : {color, spatial}) {
        const auto back = unstack_slices(stacked);
        REQUIRE(back.size() == images.size());
        for (size_t i = 0; i < back.size(); ++i) CHECK(back[i].data == images[i].data);
    }

    std::vector<Image> bad = images;
    bad[3] = Image(8, 8, 1);
    CHECK_THROWS(stack_slices(bad, StackMode::Color));
}

TEST_CASE("loss_gen identities and direct loop") {
    Rng rng(9);
    Tensor eps = Tensor::randn({2, 4, 4}, rng);
    CHECK(loss_gen(constant(eps), eps)->value.data[0] == doctest::Approx(0.0));

    Tensor shifted = eps;
    for (float& v : shifted.data) v += 1.f;
    CHECK(loss_gen(constant(shifted), eps)->value.data[0] == doctest::Approx(1.0).epsilon(1e-6));

    Tensor pred = Tensor::randn({2, 4, 4}, rng);
    double direct = 0;
    for (int64_t i = 0; i < eps.numel(); ++i)
        direct += (pred.data[i] - eps.data[i]) * (pred.data[i] - eps.data[i]);
    direct /= eps.numel();
    CHECK(loss_gen(constant(pred), eps)->value.data[0] == doctest::Approx(direct).epsilon(1e-5));

    CHECK_THROWS(loss_gen(constant(Tensor::zeros({3, 4, 4})), eps));
}

namespace {
DenoiserConfig tiny_denoiser(StackMode mode) {
    DenoiserConfig cfg;
    cfg.image_size = 16;
    cfg.n_slices = 6;
    cfg.in_channels = mode == StackMode::Color ? 6 : 1;
    cfg.base_width = 8;
    cfg.levels = 3;
    cfg.time_dim = 16;
    cfg.mode = mode;
    return cfg;
}
}  // namespace

TEST_CASE("denoiser shape contract in both stacking modes") {
    Rng rng(11);
    for (StackMode mode : {StackMode::Color, StackMode::Spatial}) {
        const DenoiserConfig cfg = tiny_denoiser(mode);
        Denoiser net(cfg, 21);
        const int H = mode == StackMode::Color ? 16 : 96;
        Tensor x = Tensor::randn({1, cfg.in_channels, H, 16}, rng);
        Tensor view = Tensor::randn({1, 3, 16, 16}, rng);
        Var out = net.predict_noise(constant(x), 10, constant(view));
        CHECK(out->value.shape == x.shape);
    }
}

TEST_CASE("conditioning features are wired into the denoiser") {
    const DenoiserConfig cfg = tiny_denoiser(StackMode::Color);
    Denoiser net(cfg, 23);
    Rng rng(13);
    Tensor x = Tensor::randn({1, 6, 16, 16}, rng);
    Tensor view({1, 3, 16, 16});
    for (float& v : view.data) v = static_cast<float>(rng.uniform());

    Var with_cond = net.predict_noise(constant(x), 5, constant(view));
    // zeroed conditioning features must change the prediction
    auto cond = net.condition_features(constant(view));
    std::vector<Var> zeroed;
    for (const Var& c : cond) zeroed.push_back(constant(Tensor::zeros(c->value.shape)));
    Var without = net.predict_noise_with_features(constant(x), 5, zeroed);
    double diff = 0;
    for (int64_t i = 0; i < with_cond->value.numel(); ++i)
        diff += std::abs(with_cond->value.data[i] - without->value.data[i]);
    CHECK(diff > 1e-3);

    // a different view gives a different prediction
    Tensor view2 = view;
    for (float& v : view2.data) v = 1.f - v;
    Var other = net.predict_noise(constant(x), 5, constant(view2));
    double diff2 = 0;
    for (int64_t i = 0; i < with_cond->value.numel(); ++i)
        diff2 += std::abs(with_cond->value.data[i] - other->value.data[i]);
    CHECK(diff2 > 1e-3);
}

TEST_CASE("sampler determinism, stride, and output contract") {
    const DenoiserConfig cfg = tiny_denoiser(StackMode::Color);
    Denoiser net(cfg, 31);
    const DiffusionSchedule schedule = DiffusionSchedule::linear(50);
    Image view(16, 16, 3);
    for (auto& v : view.data) v = 0.25f;

    const auto a = sample_slice_stack(net, view, schedule, 77);
    const auto b = sample_slice_stack(net, view, schedule, 77);
    REQUIRE(a.size() == 6);
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].data == b[i].data);

    const auto c = sample_slice_stack(net, view, schedule, 78);
    double diff = 0;
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t p = 0; p < a[i].data.size(); ++p) diff += std::abs(a[i].data[p] - c[i].data[p]);
    CHECK(diff > 0);

    // strided sampling still emits valid-range images
    const auto strided = sample_slice_stack(net, view, schedule, 79, 10);
    REQUIRE(strided.size() == 6);
    for (const Image& im : strided)
        for (float v : im.data) {
            CHECK(v >= 0.f);
            CHECK(v <= 1.f);
        }
}

TEST_CASE("denoiser overfits one record and samples it back") {
    // one fixed (view, stack) pair; after training, ancestral samples land
    // close to the ground-truth stack
    const int size = 16, S = 6;
    Rng rng(41);
    std::vector<Image> gt;
    for (int s = 0; s < S; ++s) {
        Image im(size, size, 1);
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x)
                im.at(y, x) = (x >= 2 + s && x < 10 + s && y >= 4 && y < 12) ? 0.85f : 0.f;
        gt.push_back(im);
    }
    Image view(size, size, 3);
    for (int y = 4; y < 12; ++y)
        for (int x = 4; x < 12; ++x)
            for (int c = 0; c < 3; ++c) view.at(y, x, c) = 0.7f;

    DenoiserConfig cfg = tiny_denoiser(StackMode::Color);
    Denoiser net(cfg, 43);
    // beta_end raised so alpha_bar at T is near zero and pure-noise sampling
    // matches the trained marginal
    const DiffusionSchedule schedule = DiffusionSchedule::linear(120, 1e-4, 0.05);

    const StackedSlices stacked = stack_slices(gt, StackMode::Color);
    Tensor x0({1, S, size, size});
    for (int64_t i = 0; i < stacked.tensor.numel(); ++i)
        x0.data[i] = 2.f * stacked.tensor.data[i] - 1.f;
    Var view_var = constant(image_to_tensor(view));

    Adam opt(2e-3);
    const auto params = net.parameters();
    Rng noise_rng(44);
    for (int step = 0; step < 1600; ++step) {
        const int t = static_cast<int>(noise_rng.integer(1, schedule.timesteps()));
        Tensor eps(x0.shape);
        for (float& v : eps.data) v = static_cast<float>(noise_rng.normal());
        zero_grad(params);
        Var loss = loss_gen(net.predict_noise(constant(forward_diffuse(x0, t, eps, schedule)),
                                              t, view_var),
                            eps);
        backward(loss);
        opt.step(params);
    }

    double best = 1e9;
    for (uint64_t seed : {1ull, 2ull, 3ull}) {
        const auto sampled = sample_slice_stack(net, view, schedule, seed);
        double err = 0;
        for (int s = 0; s < S; ++s)
            for (size_t i = 0; i < gt[s].data.size(); ++i)
                err += std::abs(sampled[s].data[i] - gt[s].data[i]);
        best = std::min(best, err / (S * size * size));
    }
    CHECK(best < 0.05);
}
