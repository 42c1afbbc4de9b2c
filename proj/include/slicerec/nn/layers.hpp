#pragma once

#include <map>
#include <string>

#include "slicerec/nn/autodiff.hpp"

namespace srec::nn {

// Named parameter registry; networks register their leaves here so
// checkpoints can address tensors by name.
class ParamRegistry {
public:
    Var add(const std::string& name, Tensor init) {
        Var p = param(std::move(init));
        entries_.emplace_back(name, p);
        return p;
    }
    const std::vector<std::pair<std::string, Var>>& entries() const { return entries_; }
    std::vector<Var> vars() const {
        std::vector<Var> v;
        v.reserve(entries_.size());
        for (const auto& [n, p] : entries_) v.push_back(p);
        return v;
    }
    Var find(const std::string& name) const {
        for (const auto& [n, p] : entries_)
            if (n == name) return p;
        return nullptr;
    }

private:
    std::vector<std::pair<std::string, Var>> entries_;
};

struct Linear {
    Var weight, bias;  // weight [in, out]

    Linear() = default;
    Linear(ParamRegistry& reg, const std::string& prefix, int64_t in, int64_t out, Rng& rng) {
        weight = reg.add(prefix + ".weight",
                         Tensor::randn({in, out}, rng, std::sqrt(2.0 / static_cast<double>(in))));
        bias = reg.add(prefix + ".bias", Tensor::zeros({out}));
    }
    // x [..., in] -> [..., out]
    Var operator()(const Var& x) const {
        const auto& s = x->value.shape;
        const int64_t in = weight->value.shape[0];
        const int64_t rows = x->value.numel() / in;
        Var flat = reshape(x, {rows, in});
        Var y = add(matmul(flat, weight), bias);
        auto out_shape = s;
        out_shape.back() = weight->value.shape[1];
        return reshape(y, out_shape);
    }
};

struct Conv {
    Var weight, bias;  // weight [out, in, k, k]
    int stride = 1, pad = 1;

    Conv() = default;
    Conv(ParamRegistry& reg, const std::string& prefix, int64_t in, int64_t out, int k, Rng& rng,
         int stride_ = 1, int pad_ = -1)
        : stride(stride_), pad(pad_ < 0 ? k / 2 : pad_) {
        const double sd = std::sqrt(2.0 / static_cast<double>(in * k * k));
        weight = reg.add(prefix + ".weight", Tensor::randn({out, in, k, k}, rng, sd));
        bias = reg.add(prefix + ".bias", Tensor::zeros({out}));
    }
    Var operator()(const Var& x) const { return conv2d(x, weight, bias, stride, pad); }
};

struct GroupNorm {
    Var gamma, beta;
    int groups = 1;

    GroupNorm() = default;
    GroupNorm(ParamRegistry& reg, const std::string& prefix, int64_t channels, int groups_)
        : groups(groups_) {
        gamma = reg.add(prefix + ".gamma", Tensor::full({channels}, 1.f));
        beta = reg.add(prefix + ".beta", Tensor::zeros({channels}));
    }
    Var operator()(const Var& x) const { return group_norm(x, groups, gamma, beta); }
};

struct LayerNorm {
    Var gamma, beta;

    LayerNorm() = default;
    LayerNorm(ParamRegistry& reg, const std::string& prefix, int64_t dim) {
        gamma = reg.add(prefix + ".gamma", Tensor::full({dim}, 1.f));
        beta = reg.add(prefix + ".beta", Tensor::zeros({dim}));
    }
    Var operator()(const Var& x) const { return layer_norm(x, gamma, beta); }
};

}  // namespace srec::nn
