#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "slicerec/nn/tensor.hpp"

namespace srec::nn {

// Reverse-mode autodiff over dense tensors. Dynamic graph: every op builds a
// node holding the forward value and a closure that scatters the node's
// gradient into its parents. backward(root) runs the closures in reverse
// topological order. Parameters are leaf nodes reused across steps; the rest
// of the graph is released when the caller drops its Vars.
struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
    Tensor value;
    Tensor grad;  // allocated on first accumulation
    bool requires_grad = false;
    std::vector<Var> parents;
    std::function<void(Node&)> backward_fn;

    Tensor& ensure_grad() {
        if (grad.data.empty()) grad = Tensor::zeros(value.shape);
        return grad;
    }
};

Var constant(Tensor value);
Var param(Tensor value);  // requires_grad = true

// Seeds root's grad with ones (usually a scalar loss) and backpropagates.
void backward(const Var& root);
void zero_grad(const std::vector<Var>& params);

// --- elementwise / broadcast ---
Var add(const Var& a, const Var& b);  // numpy-style broadcast
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);  // broadcast
Var neg(const Var& a);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var relu(const Var& a);
Var silu(const Var& a);
Var sigmoid(const Var& a);
Var tanh_op(const Var& a);
Var square(const Var& a);
Var rsqrt(const Var& a, double eps = 1e-8);  // 1/sqrt(x + eps)

// --- shape ---
Var reshape(const Var& a, std::vector<int64_t> shape);
Var permute(const Var& a, std::vector<int> perm);
Var concat(const std::vector<Var>& parts, int axis);
Var narrow(const Var& a, int axis, int64_t start, int64_t length);
Var take_rows(const Var& table, std::vector<int64_t> rows);  // table [R,C] -> [K,C]
// v [N,C] broadcast to [N,C,H,W]
Var broadcast_spatial(const Var& v, int64_t h, int64_t w);

// --- linear algebra ---
// a [m,k] x b [k,n]; batched when a is [B,m,k] (b either [B,k,n] or shared [k,n])
Var matmul(const Var& a, const Var& b);
Var softmax_lastdim(const Var& a);
Var layer_norm(const Var& a, const Var& gamma, const Var& beta, double eps = 1e-5);

// --- conv nets ---
Var conv2d(const Var& x, const Var& w, const Var& bias, int stride = 1, int pad = 1);
Var upsample_nearest2(const Var& x);
Var group_norm(const Var& x, int groups, const Var& gamma, const Var& beta, double eps = 1e-5);

// --- gathers ---
struct Vec2f {
    float x = 0, y = 0;
};
// feat [C,H,W], pixel-space coords (x, y) with pixel centers at integers;
// coordinates clamp to the border. Returns [M,C].
Var bilinear_gather(const Var& feat, const std::vector<Vec2f>& coords);

// --- reductions / losses ---
Var sum_all(const Var& a);
Var mean_all(const Var& a);
Var l1_mean(const Var& a, const Var& b);
Var mse_mean(const Var& a, const Var& b);

}  // namespace srec::nn
