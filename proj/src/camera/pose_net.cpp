#include "slicerec/camera/pose_net.hpp"

#include <stdexcept>

namespace srec {

using namespace nn;

PoseNet::PoseNet(int image_size, uint64_t seed) : image_size_(image_size) {
    Rng rng(seed);
    const int widths[4] = {16, 32, 64, 64};
    int in = 3;
    for (int l = 0; l < 4; ++l) {
        convs_.emplace_back(reg_, "conv" + std::to_string(l), in, widths[l], 3, rng, 2);
        norms_.emplace_back(reg_, "norm" + std::to_string(l), widths[l], widths[l] % 8 == 0 ? 8 : 4);
        in = widths[l];
    }
    fc1_ = Linear(reg_, "fc1", 64, 64, rng);
    fc2_ = Linear(reg_, "fc2", 64, 12, rng);
    // bias the raw rotation toward identity so untrained outputs are sane
    fc2_.bias->value.data[0] = 1.f;
    fc2_.bias->value.data[4] = 1.f;
    fc2_.bias->value.data[8] = 1.f;
}

Var PoseNet::forward(const Var& images) const {
    const auto& s = images->value.shape;
    if (s.size() != 4 || s[1] != 3)
        throw std::invalid_argument("PoseNet: expected [N,3,H,W] input");
    Var x = images;
    for (size_t l = 0; l < convs_.size(); ++l) x = silu(norms_[l](convs_[l](x)));
    // global average pool via matmul with a ones vector
    const auto& xs = x->value.shape;
    const int64_t N = xs[0], C = xs[1], HW = xs[2] * xs[3];
    Var flat = reshape(x, {N * C, HW});
    Var pooled = reshape(matmul(flat, constant(Tensor::full({HW, 1}, 1.f / HW))), {N, C});
    return fc2_(silu(fc1_(pooled)));
}

PoseNet::Estimate PoseNet::estimate(const Image& image) const {
    return estimate_batch({image})[0];
}

std::vector<PoseNet::Estimate> PoseNet::estimate_batch(const std::vector<Image>& images) const {
    Var out = forward(constant(images_to_tensor(images)));
    std::vector<Estimate> result(images.size());
    for (size_t n = 0; n < images.size(); ++n) {
        const float* v = out->value.ptr() + n * 12;
        Estimate& e = result[n];
        for (int i = 0; i < 9; ++i) e.raw_rotation.m[i] = v[i];
        e.rotation = nearest_rotation(e.raw_rotation);
        e.translation = {v[9], v[10], v[11]};
    }
    return result;
}

Var PoseNet::alignment_loss(const Var& outputs, const std::vector<Vec3>& P,
                            const std::vector<Vec3>& P_cam) const {
    if (P.size() != P_cam.size() || P.empty())
        throw std::invalid_argument("alignment_loss: point sets must match");
    if (outputs->value.shape != std::vector<int64_t>{1, 12})
        throw std::invalid_argument("alignment_loss: single-view outputs expected");
    const int64_t M = static_cast<int64_t>(P.size());
    Tensor pc({M, 3}), pw({M, 3});
    for (int64_t i = 0; i < M; ++i)
        for (int c = 0; c < 3; ++c) {
            pc.data[i * 3 + c] = static_cast<float>(P_cam[i][c]);
            pw.data[i * 3 + c] = static_cast<float>(P[i][c]);
        }
    Var rot = reshape(narrow(outputs, 1, 0, 9), {3, 3});
    Var trans = narrow(outputs, 1, 9, 3);  // [1,3], broadcast over rows
    Var mapped = add(matmul(constant(pc), rot), trans);
    // (1/N) sum of squared row norms = 3 * elementwise MSE
    return scale(mse_mean(mapped, constant(pw)), 3.0);
}

}  // namespace srec
