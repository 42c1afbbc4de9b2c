#include <doctest.h>

#include <cmath>

#include "slicerec/nets/regressor.hpp"
#include "slicerec/nn/optim.hpp"

using namespace srec;
using namespace srec::nn;

namespace {

RegressorConfig tiny_config() {
    RegressorConfig cfg;
    cfg.image_size = 16;
    cfg.in_channels = 3;
    cfg.n_slices_total = 6;  // N_s = 2
    cfg.code_dim = 8;
    cfg.base_width = 8;
    cfg.levels = 3;
    return cfg;
}

Tensor random_image(Rng& rng, int size, int channels) {
    Tensor t({1, channels, size, size});
    for (float& v : t.data) v = static_cast<float>(rng.uniform());
    return t;
}

}  // namespace

TEST_CASE("regress_slices emits 3*N_s images of the right shape") {
    const RegressorConfig cfg = tiny_config();
    SlicerRegressor net(cfg, 5);
    Rng rng(1);
    const auto out = net.regress_slices(constant(random_image(rng, cfg.image_size, 3)));
    CHECK(out.size() == 6);
    for (const Var& s : out) {
        CHECK(s->value.shape == std::vector<int64_t>{1, 1, cfg.image_size, cfg.image_size});
        for (float v : s->value.data) {
            CHECK(v >= 0.f);
            CHECK(v <= 1.f);
        }
    }
    CHECK_THROWS(net.regress_slices(constant(Tensor::zeros({1, 3, 8, 8}))));
}

TEST_CASE("swapping indicator rows swaps the corresponding outputs") {
    const RegressorConfig cfg = tiny_config();
    SlicerRegressor net(cfg, 7);
    Rng rng(2);
    Var image = constant(random_image(rng, cfg.image_size, 3));
    const auto feats = net.encode(image);

    Var a = net.decode(feats, 1);
    Var b = net.decode(feats, 4);
    Var a_swapped = net.decode_with_code(feats, net.code_row(4));
    Var b_swapped = net.decode_with_code(feats, net.code_row(1));
    for (int64_t i = 0; i < a->value.numel(); ++i) {
        CHECK(a->value.data[i] == b_swapped->value.data[i]);
        CHECK(b->value.data[i] == a_swapped->value.data[i]);
    }
}

TEST_CASE("one-hot mode keeps the API and freezes the codes") {
    RegressorConfig cfg = tiny_config();
    cfg.onehot_codes = true;
    SlicerRegressor net(cfg, 3);
    Rng rng(4);
    const auto out = net.regress_slices(constant(random_image(rng, cfg.image_size, 3)));
    CHECK(out.size() == 6);
    CHECK_FALSE(net.codes()->requires_grad);
    // rows are standard-basis vectors
    for (int i = 0; i < cfg.n_slices_total; ++i)
        for (int j = 0; j < cfg.code_dim; ++j)
            CHECK(net.codes()->value.data[i * cfg.code_dim + j] ==
                  (j == i % cfg.code_dim ? 1.f : 0.f));
}

TEST_CASE("perceptual distance identities") {
    Rng rng(6);
    Image a(16, 16, 1), b(16, 16, 1);
    for (auto& v : a.data) v = static_cast<float>(rng.uniform());
    b = a;
    CHECK(perceptual_distance(a, a) == doctest::Approx(0.0));
    Image c(16, 16, 1);
    for (auto& v : c.data) v = static_cast<float>(rng.uniform());
    CHECK(perceptual_distance(a, c) == doctest::Approx(perceptual_distance(c, a)).epsilon(1e-6));
    CHECK(perceptual_distance(a, c) > 0.0);
}

TEST_CASE("perceptual distance orders blank vs near-identical") {
    // GT-like structured image
    Image gt(16, 16, 1);
    for (int y = 4; y < 12; ++y)
        for (int x = 4; x < 12; ++x) gt.at(y, x) = 0.8f;
    Image blank(16, 16, 1);
    Image noisy = gt;
    Rng rng(8);
    for (auto& v : noisy.data) v = std::clamp(v + static_cast<float>(rng.normal(0, 0.01)), 0.f, 1.f);
    CHECK(perceptual_distance(blank, gt) > perceptual_distance(gt, noisy));
}

TEST_CASE("loss_reg identities and direct formula evaluation") {
    const FixedPyramid pyramid(1);
    const int S = 3, N = 8;
    Rng rng(9);
    std::vector<Var> pred;
    std::vector<Tensor> gt;
    for (int s = 0; s < S; ++s) {
        Tensor t({1, 1, N, N});
        for (float& v : t.data) v = static_cast<float>(rng.uniform());
        pred.push_back(constant(t));
        gt.push_back(t);
    }
    CHECK(loss_reg(pred, gt, pyramid)->value.data[0] == doctest::Approx(0.0));

    // all-zero prediction vs all-one GT: the L1 term is exactly 1 per slice
    std::vector<Var> zeros{constant(Tensor::zeros({1, 1, N, N}))};
    std::vector<Tensor> ones{Tensor::full({1, 1, N, N}, 1.f)};
    CHECK(l1_mean(zeros[0], constant(ones[0]))->value.data[0] == doctest::Approx(1.0));
    CHECK(loss_reg(zeros, ones, pyramid)->value.data[0] >= 1.0);

    // random pair: matches an independent evaluation of the formula
    std::vector<Var> pred2;
    std::vector<Tensor> gt2;
    for (int s = 0; s < S; ++s) {
        Tensor a({1, 1, N, N}), b({1, 1, N, N});
        for (float& v : a.data) v = static_cast<float>(rng.uniform());
        for (float& v : b.data) v = static_cast<float>(rng.uniform());
        pred2.push_back(constant(a));
        gt2.push_back(b);
    }
    double direct = 0;
    for (int s = 0; s < S; ++s) {
        double l1 = 0;
        for (int i = 0; i < N * N; ++i)
            l1 += std::abs(pred2[s]->value.data[i] - gt2[s].data[i]);
        l1 /= N * N;
        Image pa(N, N, 1), pb(N, N, 1);
        std::copy(pred2[s]->value.data.begin(), pred2[s]->value.data.end(), pa.data.begin());
        std::copy(gt2[s].data.begin(), gt2[s].data.end(), pb.data.begin());
        direct += l1 + perceptual_distance(pa, pb);
    }
    direct /= S;
    CHECK(loss_reg(pred2, gt2, pyramid)->value.data[0] == doctest::Approx(direct).epsilon(1e-4));

    std::vector<Tensor> short_gt(gt2.begin(), gt2.end() - 1);
    CHECK_THROWS(loss_reg(pred2, short_gt, pyramid));
}

TEST_CASE("tiny regressor overfits one record") {
    RegressorConfig cfg = tiny_config();
    SlicerRegressor net(cfg, 11);
    const FixedPyramid pyramid(1);
    Rng rng(12);
    Tensor input = random_image(rng, cfg.image_size, 3);
    std::vector<Tensor> gt;
    for (int s = 0; s < cfg.n_slices_total; ++s) {
        Tensor t({1, 1, cfg.image_size, cfg.image_size});
        // structured target: a moving bright square per slice
        for (int y = 0; y < cfg.image_size; ++y)
            for (int x = 0; x < cfg.image_size; ++x)
                t.data[y * cfg.image_size + x] =
                    (x >= s && x < s + 6 && y >= 4 && y < 12) ? 0.9f : 0.f;
        gt.push_back(t);
    }

    Adam opt(2e-3);
    auto params = net.parameters();
    double first = 0, last = 0;
    for (int step = 0; step < 220; ++step) {
        zero_grad(params);
        Var loss = loss_reg(net.regress_slices(constant(input)), gt, pyramid);
        if (step == 0) first = loss->value.data[0];
        last = loss->value.data[0];
        backward(loss);
        opt.step(params);
    }
    CHECK(last < first / 4);

    // mean per-pixel |error| < 0.02 against the GT stack
    const auto out = net.regress_slices(constant(input));
    double err = 0;
    for (int s = 0; s < cfg.n_slices_total; ++s)
        for (int64_t i = 0; i < out[s]->value.numel(); ++i)
            err += std::abs(out[s]->value.data[i] - gt[s].data[i]);
    err /= cfg.n_slices_total * cfg.image_size * cfg.image_size;
    CHECK(err < 0.02);

    // indicator identifiability: decode with code i is closest to GT i
    const auto feats = net.encode(constant(input));
    for (int i = 0; i < cfg.n_slices_total; ++i) {
        Var pred = net.decode(feats, i);
        double own = 0;
        for (int64_t p = 0; p < pred->value.numel(); ++p)
            own += std::abs(pred->value.data[p] - gt[i].data[p]);
        for (int j = 0; j < cfg.n_slices_total; ++j) {
            if (j == i) continue;
            double other = 0;
            for (int64_t p = 0; p < pred->value.numel(); ++p)
                other += std::abs(pred->value.data[p] - gt[j].data[p]);
            CHECK(own < other);
        }
    }
}
