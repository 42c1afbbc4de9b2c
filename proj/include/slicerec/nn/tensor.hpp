#pragma once

#include <cassert>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "slicerec/core/rng.hpp"

namespace srec::nn {

// Dense float32 tensor, row-major. Small by design: shape plus flat data,
// with just enough helpers for the training code.
struct Tensor {
    std::vector<int64_t> shape;
    std::vector<float> data;

    Tensor() = default;
    explicit Tensor(std::vector<int64_t> s, float fill = 0.f) : shape(std::move(s)) {
        data.assign(static_cast<size_t>(numel_of(shape)), fill);
    }

    static int64_t numel_of(const std::vector<int64_t>& s) {
        int64_t n = 1;
        for (int64_t d : s) n *= d;
        return n;
    }
    int64_t numel() const { return static_cast<int64_t>(data.size()); }
    int64_t dim(int i) const {
        return shape[i < 0 ? shape.size() + i : static_cast<size_t>(i)];
    }
    int ndim() const { return static_cast<int>(shape.size()); }
    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    float* ptr() { return data.data(); }
    const float* ptr() const { return data.data(); }
    float& operator[](size_t i) { return data[i]; }
    float operator[](size_t i) const { return data[i]; }

    static Tensor zeros(std::vector<int64_t> s) { return Tensor(std::move(s), 0.f); }
    static Tensor full(std::vector<int64_t> s, float v) { return Tensor(std::move(s), v); }
    static Tensor randn(std::vector<int64_t> s, Rng& rng, double stddev = 1.0) {
        Tensor t(std::move(s));
        for (float& v : t.data) v = static_cast<float>(rng.normal(0.0, stddev));
        return t;
    }
    static Tensor from(std::vector<int64_t> s, std::vector<float> values) {
        Tensor t;
        t.shape = std::move(s);
        t.data = std::move(values);
        assert(static_cast<int64_t>(t.data.size()) == numel_of(t.shape));
        return t;
    }

    std::string shape_str() const {
        std::string s = "[";
        for (size_t i = 0; i < shape.size(); ++i)
            s += std::to_string(shape[i]) + (i + 1 < shape.size() ? "," : "");
        return s + "]";
    }
};

}  // namespace srec::nn
