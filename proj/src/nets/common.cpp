#include "slicerec/nets/common.hpp"

#include <cmath>
#include <stdexcept>

namespace srec {

using namespace nn;

Tensor image_to_tensor(const Image& image) { return images_to_tensor({image}); }

Tensor images_to_tensor(const std::vector<Image>& images) {
    if (images.empty()) throw std::invalid_argument("images_to_tensor: no images");
    const int W = images[0].width, H = images[0].height, C = images[0].channels;
    Tensor t({static_cast<int64_t>(images.size()), C, H, W});
    for (size_t n = 0; n < images.size(); ++n) {
        const Image& im = images[n];
        if (im.width != W || im.height != H || im.channels != C)
            throw std::invalid_argument("images_to_tensor: shape mismatch");
        for (int c = 0; c < C; ++c)
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x)
                    t.data[((n * C + c) * H + y) * W + x] = im.at(y, x, c);
    }
    return t;
}

Image tensor_to_image(const Tensor& t, int batch_index) {
    if (t.ndim() != 4) throw std::invalid_argument("tensor_to_image: need NCHW");
    const int C = static_cast<int>(t.shape[1]);
    const int H = static_cast<int>(t.shape[2]);
    const int W = static_cast<int>(t.shape[3]);
    Image im(W, H, C);
    for (int c = 0; c < C; ++c)
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                const float v = t.data[((static_cast<int64_t>(batch_index) * C + c) * H + y) * W + x];
                im.at(y, x, c) = std::clamp(v, 0.f, 1.f);
            }
    return im;
}

Tensor time_embedding(int t, int dim) {
    Tensor e({1, dim});
    const int half = dim / 2;
    for (int i = 0; i < half; ++i) {
        const double freq = std::exp(-std::log(10000.0) * i / std::max(1, half - 1));
        e.data[i] = static_cast<float>(std::sin(t * freq));
        e.data[half + i] = static_cast<float>(std::cos(t * freq));
    }
    return e;
}

FixedPyramid::FixedPyramid(int in_channels, uint64_t seed) {
    Rng rng(seed);
    auto make = [&](int64_t in, int64_t out) {
        const double sd = std::sqrt(2.0 / static_cast<double>(in * 9));
        return constant(Tensor::randn({out, in, 3, 3}, rng, sd));
    };
    w0_ = make(in_channels, 16);
    b0_ = constant(Tensor::zeros({16}));
    w1_ = make(16, 32);
    b1_ = constant(Tensor::zeros({32}));
    w2_ = make(32, 64);
    b2_ = constant(Tensor::zeros({64}));
}

std::vector<Var> FixedPyramid::operator()(const Var& image) const {
    Var f0 = relu(conv2d(image, w0_, b0_, 1, 1));
    Var f1 = relu(conv2d(f0, w1_, b1_, 2, 1));
    Var f2 = relu(conv2d(f1, w2_, b2_, 2, 1));
    return {f0, f1, f2};
}

namespace {

// Normalize each spatial location's channel vector to unit length.
Var unit_normalize(const Var& f) {
    // f [N,C,H,W]: n = f / sqrt(sum_c f^2 + eps). Built from primitives:
    // squared-sum via matmul with a ones vector over the channel axis.
    const auto& s = f->value.shape;
    const int64_t N = s[0], C = s[1], H = s[2], W = s[3];
    Var sq = square(f);
    Var flat = reshape(permute(sq, {0, 2, 3, 1}), {N * H * W, C});
    Var ones = constant(Tensor::full({C, 1}, 1.f));
    Var sums = matmul(flat, ones);  // [NHW, 1]
    Var inv = reshape(permute(reshape(rsqrt(sums), {N, H, W, 1}), {0, 3, 1, 2}), {N, 1, H, W});
    return mul(f, inv);
}

}  // namespace

Var perceptual_distance(const Var& a, const Var& b, const FixedPyramid& pyramid) {
    if (!a->value.same_shape(b->value))
        throw std::invalid_argument("perceptual_distance: shape mismatch");
    const auto fa = pyramid(a);
    const auto fb = pyramid(b);
    Var total;
    for (size_t l = 0; l < fa.size(); ++l) {
        Var d = mse_mean(unit_normalize(fa[l]), unit_normalize(fb[l]));
        total = total ? add(total, d) : d;
    }
    return scale(total, 1.0 / fa.size());
}

double perceptual_distance(const Image& a, const Image& b) {
    static const FixedPyramid pyramid1(1), pyramid3(3);
    const FixedPyramid& pyr = a.channels == 3 ? pyramid3 : pyramid1;
    Var va = constant(image_to_tensor(a));
    Var vb = constant(image_to_tensor(b));
    return perceptual_distance(va, vb, pyr)->value.data[0];
}

}  // namespace srec
