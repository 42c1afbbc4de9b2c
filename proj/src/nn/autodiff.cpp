#include "slicerec/nn/autodiff.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace srec::nn {

namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using MapConst = Eigen::Map<const RowMat>;

Var make_node(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward_fn) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    node->parents = std::move(parents);
    for (const Var& p : node->parents)
        if (p->requires_grad) node->requires_grad = true;
    if (node->requires_grad) node->backward_fn = std::move(backward_fn);
    return node;
}

// Broadcast helpers (numpy semantics, shapes aligned at the trailing end).
std::vector<int64_t> broadcast_shape(const std::vector<int64_t>& a, const std::vector<int64_t>& b) {
    const size_t n = std::max(a.size(), b.size());
    std::vector<int64_t> out(n);
    for (size_t i = 0; i < n; ++i) {
        const int64_t da = i < n - a.size() ? 1 : a[i - (n - a.size())];
        const int64_t db = i < n - b.size() ? 1 : b[i - (n - b.size())];
        if (da != db && da != 1 && db != 1)
            throw std::invalid_argument("broadcast: incompatible shapes");
        out[i] = std::max(da, db);
    }
    return out;
}

std::vector<int64_t> strides_for(const std::vector<int64_t>& shape) {
    std::vector<int64_t> s(shape.size(), 1);
    for (int i = static_cast<int>(shape.size()) - 2; i >= 0; --i) s[i] = s[i + 1] * shape[i + 1];
    return s;
}

// Per-element source index under broadcasting: dims of size 1 contribute 0.
std::vector<int64_t> broadcast_strides(const std::vector<int64_t>& src,
                                       const std::vector<int64_t>& out) {
    std::vector<int64_t> st(out.size(), 0);
    const auto src_strides = strides_for(src);
    const size_t off = out.size() - src.size();
    for (size_t i = 0; i < src.size(); ++i)
        st[off + i] = src[i] == 1 ? 0 : src_strides[i];
    return st;
}

template <class Fwd, class BwdA, class BwdB>
Var broadcast_binary(const Var& a, const Var& b, Fwd fwd, BwdA bwd_a, BwdB bwd_b) {
    const auto out_shape = broadcast_shape(a->value.shape, b->value.shape);
    Tensor out(out_shape);
    const auto out_strides = strides_for(out_shape);
    const auto sa = broadcast_strides(a->value.shape, out_shape);
    const auto sb = broadcast_strides(b->value.shape, out_shape);
    const int nd = static_cast<int>(out_shape.size());
    const int64_t n = out.numel();

    const bool trivial = a->value.shape == out_shape && b->value.shape == out_shape;
    if (trivial) {
        for (int64_t i = 0; i < n; ++i) out.data[i] = fwd(a->value.data[i], b->value.data[i]);
    } else {
        for (int64_t i = 0; i < n; ++i) {
            int64_t rem = i, ia = 0, ib = 0;
            for (int d = 0; d < nd; ++d) {
                const int64_t idx = rem / out_strides[d];
                rem %= out_strides[d];
                ia += idx * sa[d];
                ib += idx * sb[d];
            }
            out.data[i] = fwd(a->value.data[ia], b->value.data[ib]);
        }
    }

    return make_node(std::move(out), {a, b}, [=](Node& node) {
        const int64_t n2 = node.value.numel();
        const auto& g = node.grad;
        if (a->requires_grad) {
            Tensor& ga = a->ensure_grad();
            if (trivial) {
                for (int64_t i = 0; i < n2; ++i)
                    ga.data[i] += bwd_a(g.data[i], a->value.data[i], b->value.data[i]);
            } else {
                for (int64_t i = 0; i < n2; ++i) {
                    int64_t rem = i, ia = 0, ib = 0;
                    for (int d = 0; d < nd; ++d) {
                        const int64_t idx = rem / out_strides[d];
                        rem %= out_strides[d];
                        ia += idx * sa[d];
                        ib += idx * sb[d];
                    }
                    ga.data[ia] += bwd_a(g.data[i], a->value.data[ia], b->value.data[ib]);
                }
            }
        }
        if (b->requires_grad) {
            Tensor& gb = b->ensure_grad();
            if (trivial) {
                for (int64_t i = 0; i < n2; ++i)
                    gb.data[i] += bwd_b(g.data[i], a->value.data[i], b->value.data[i]);
            } else {
                for (int64_t i = 0; i < n2; ++i) {
                    int64_t rem = i, ia = 0, ib = 0;
                    for (int d = 0; d < nd; ++d) {
                        const int64_t idx = rem / out_strides[d];
                        rem %= out_strides[d];
                        ia += idx * sa[d];
                        ib += idx * sb[d];
                    }
                    gb.data[ib] += bwd_b(g.data[i], a->value.data[ia], b->value.data[ib]);
                }
            }
        }
    });
}

template <class Fwd, class Deriv>
Var unary(const Var& a, Fwd fwd, Deriv dydx) {
    Tensor out(a->value.shape);
    for (int64_t i = 0; i < out.numel(); ++i) out.data[i] = fwd(a->value.data[i]);
    return make_node(std::move(out), {a}, [=](Node& node) {
        if (!a->requires_grad) return;
        Tensor& ga = a->ensure_grad();
        for (int64_t i = 0; i < node.value.numel(); ++i)
            ga.data[i] += node.grad.data[i] * dydx(a->value.data[i], node.value.data[i]);
    });
}

}  // namespace

Var constant(Tensor value) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    return node;
}

Var param(Tensor value) {
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    node->requires_grad = true;
    return node;
}

void backward(const Var& root) {
    if (root->value.numel() != 1)
        throw std::invalid_argument("backward: root must be a scalar");
    // Iterative post-order topological sort.
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, size_t>> stack{{root.get(), 0}};
    visited.insert(root.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* parent = node->parents[next++].get();
            if (parent->requires_grad && !visited.count(parent)) {
                visited.insert(parent);
                stack.emplace_back(parent, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    root->ensure_grad();
    root->grad.data[0] = 1.f;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* node = *it;
        if (node->backward_fn && !node->grad.data.empty()) node->backward_fn(*node);
    }
}

void zero_grad(const std::vector<Var>& params) {
    for (const Var& p : params) p->grad = Tensor();
}

Var add(const Var& a, const Var& b) {
    return broadcast_binary(
        a, b, [](float x, float y) { return x + y; },
        [](float g, float, float) { return g; }, [](float g, float, float) { return g; });
}

Var sub(const Var& a, const Var& b) {
    return broadcast_binary(
        a, b, [](float x, float y) { return x - y; },
        [](float g, float, float) { return g; }, [](float g, float, float) { return -g; });
}

Var mul(const Var& a, const Var& b) {
    return broadcast_binary(
        a, b, [](float x, float y) { return x * y; },
        [](float g, float, float y) { return g * y; },
        [](float g, float x, float) { return g * x; });
}

Var neg(const Var& a) { return scale(a, -1.0); }

Var scale(const Var& a, double s) {
    const float fs = static_cast<float>(s);
    return unary(a, [fs](float x) { return x * fs; }, [fs](float, float) { return fs; });
}

Var add_scalar(const Var& a, double s) {
    const float fs = static_cast<float>(s);
    return unary(a, [fs](float x) { return x + fs; }, [](float, float) { return 1.f; });
}

Var relu(const Var& a) {
    return unary(a, [](float x) { return x > 0 ? x : 0.f; },
                 [](float x, float) { return x > 0 ? 1.f : 0.f; });
}

Var silu(const Var& a) {
    return unary(a,
                 [](float x) { return x / (1.f + std::exp(-x)); },
                 [](float x, float) {
                     const float s = 1.f / (1.f + std::exp(-x));
                     return s * (1.f + x * (1.f - s));
                 });
}

Var sigmoid(const Var& a) {
    return unary(a, [](float x) { return 1.f / (1.f + std::exp(-x)); },
                 [](float, float y) { return y * (1.f - y); });
}

Var tanh_op(const Var& a) {
    return unary(a, [](float x) { return std::tanh(x); },
                 [](float, float y) { return 1.f - y * y; });
}

Var square(const Var& a) {
    return unary(a, [](float x) { return x * x; }, [](float x, float) { return 2.f * x; });
}

Var rsqrt(const Var& a, double eps) {
    const float fe = static_cast<float>(eps);
    return unary(a, [fe](float x) { return 1.f / std::sqrt(x + fe); },
                 [](float, float y) { return -0.5f * y * y * y; });
}

Var reshape(const Var& a, std::vector<int64_t> shape) {
    if (Tensor::numel_of(shape) != a->value.numel())
        throw std::invalid_argument("reshape: element count mismatch");
    Tensor out;
    out.shape = std::move(shape);
    out.data = a->value.data;
    return make_node(std::move(out), {a}, [a](Node& node) {
        if (!a->requires_grad) return;
        Tensor& ga = a->ensure_grad();
        for (size_t i = 0; i < ga.data.size(); ++i) ga.data[i] += node.grad.data[i];
    });
}

Var permute(const Var& a, std::vector<int> perm) {
    const auto& in_shape = a->value.shape;
    if (perm.size() != in_shape.size()) throw std::invalid_argument("permute: rank mismatch");
    std::vector<int64_t> out_shape(perm.size());
    for (size_t i = 0; i < perm.size(); ++i) out_shape[i] = in_shape[perm[i]];
    const auto in_strides = strides_for(in_shape);
    const auto out_strides = strides_for(out_shape);
    const int nd = static_cast<int>(perm.size());

    Tensor out(out_shape);
    const int64_t n = out.numel();
    std::vector<int64_t> src_stride_for_out(nd);
    for (int d = 0; d < nd; ++d) src_stride_for_out[d] = in_strides[perm[d]];
    for (int64_t i = 0; i < n; ++i) {
        int64_t rem = i, src = 0;
        for (int d = 0; d < nd; ++d) {
            const int64_t idx = rem / out_strides[d];
            rem %= out_strides[d];
            src += idx * src_stride_for_out[d];
        }
        out.data[i] = a->value.data[src];
    }
    return make_node(std::move(out), {a}, [=](Node& node) {
        if (!a->requires_grad) return;
        Tensor& ga = a->ensure_grad();
        for (int64_t i = 0; i < node.value.numel(); ++i) {
            int64_t rem = i, src = 0;
            for (int d = 0; d < nd; ++d) {
                const int64_t idx = rem / out_strides[d];
                rem %= out_strides[d];
                src += idx * src_stride_for_out[d];
            }
            ga.data[src] += node.grad.data[i];
        }
    });
}

Var concat(const std::vector<Var>& parts, int axis) {
    if (parts.empty()) throw std::invalid_argument("concat: no inputs");
    auto shape = parts[0]->value.shape;
    if (axis < 0) axis += static_cast<int>(shape.size());
    int64_t total = 0;
    for (const Var& p : parts) total += p->value.shape[axis];
    shape[axis] = total;

    const auto out_strides = strides_for(shape);
    Tensor out(shape);
    // outer = product of dims before axis, inner = product after
    int64_t outer = 1, inner = 1;
    for (int d = 0; d < axis; ++d) outer *= shape[d];
    for (size_t d = axis + 1; d < shape.size(); ++d) inner *= shape[d];

    int64_t offset = 0;
    for (const Var& p : parts) {
        const int64_t len = p->value.shape[axis];
        for (int64_t o = 0; o < outer; ++o)
            std::copy_n(p->value.data.begin() + o * len * inner, len * inner,
                        out.data.begin() + (o * total + offset) * inner);
        offset += len;
    }
    std::vector<Var> parents(parts.begin(), parts.end());
    return make_node(std::move(out), std::move(parents), [=](Node& node) {
        int64_t off = 0;
        for (const Var& p : parts) {
            const int64_t len = p->value.shape[axis];
            if (p->requires_grad) {
                Tensor& gp = p->ensure_grad();
                for (int64_t o = 0; o < outer; ++o)
                    for (int64_t i = 0; i < len * inner; ++i)
                        gp.data[o * len * inner + i] += node.grad.data[(o * total + off) * inner + i];
            }
            off += len;
        }
    });
}

Var narrow(const Var& a, int axis, int64_t start, int64_t length) {
    auto shape = a->value.shape;
    if (axis < 0) axis += static_cast<int>(shape.size());
    const int64_t full = shape[axis];
    if (start < 0 || start + length > full) throw std::invalid_argument("narrow: out of range");
    shape[axis] = length;

    int64_t outer = 1, inner = 1;
    for (int d = 0; d < axis; ++d) outer *= shape[d];
    for (size_t d = axis + 1; d < shape.size(); ++d) inner *= shape[d];

    Tensor out(shape);
    for (int64_t o = 0; o < outer; ++o)
        std::copy_n(a->value.data.begin() + (o * full + start) * inner, length * inner,
                    out.data.begin() + o * length * inner);
    return make_node(std::move(out), {a}, [=](Node& node) {
        if (!a->requires_grad) return;
        Tensor& ga = a->ensure_grad();
        for (int64_t o = 0; o < outer; ++o)
            for (int64_t i = 0; i < length * inner; ++i)
                ga.data[(o * full + start) * inner + i] += node.grad.data[o * length * inner + i];
    });
}

Var take_rows(const Var& table, std::vector<int64_t> rows) {
    if (table->value.ndim() != 2) throw std::invalid_argument("take_rows: table must be 2D");
    const int64_t C = table->value.shape[1];
    Tensor out({static_cast<int64_t>(rows.size()), C});
    for (size_t r = 0; r < rows.size(); ++r)
        std::copy_n(table->value.data.begin() + rows[r] * C, C, out.data.begin() + r * C);
    return make_node(std::move(out), {table}, [=](Node& node) {
        if (!table->requires_grad) return;
        Tensor& g = table->ensure_grad();
        for (size_t r = 0; r < rows.size(); ++r)
            for (int64_t c = 0; c < C; ++c)
                g.data[rows[r] * C + c] += node.grad.data[r * C + c];
    });
}

Var broadcast_spatial(const Var& v, int64_t h, int64_t w) {
    if (v->value.ndim() != 2) throw std::invalid_argument("broadcast_spatial: need [N,C]");
    const int64_t N = v->value.shape[0], C = v->value.shape[1];
    Tensor out({N, C, h, w});
    for (int64_t n = 0; n < N; ++n)
        for (int64_t c = 0; c < C; ++c) {
            const float val = v->value.data[n * C + c];
            float* dst = out.ptr() + ((n * C + c) * h) * w;
            std::fill_n(dst, h * w, val);
        }
    return make_node(std::move(out), {v}, [=](Node& node) {
        if (!v->requires_grad) return;
        Tensor& g = v->ensure_grad();
        for (int64_t n = 0; n < N; ++n)
            for (int64_t c = 0; c < C; ++c) {
                double acc = 0;
                const float* src = node.grad.ptr() + ((n * C + c) * h) * w;
                for (int64_t i = 0; i < h * w; ++i) acc += src[i];
                g.data[n * C + c] += static_cast<float>(acc);
            }
    });
}

Var matmul(const Var& a, const Var& b) {
    const auto& sa = a->value.shape;
    const auto& sb = b->value.shape;
    const bool batched_a = sa.size() == 3;
    const bool batched_b = sb.size() == 3;
    if (sa.size() < 2 || sa.size() > 3 || sb.size() < 2 || sb.size() > 3)
        throw std::invalid_argument("matmul: 2D or 3D tensors only");
    const int64_t B = batched_a ? sa[0] : 1;
    const int64_t m = sa[batched_a ? 1 : 0], k = sa[batched_a ? 2 : 1];
    const int64_t kb = sb[batched_b ? 1 : 0], n = sb[batched_b ? 2 : 1];
    if (k != kb || (batched_b && sb[0] != B) || (batched_b && !batched_a))
        throw std::invalid_argument("matmul: shape mismatch " + a->value.shape_str() + " x " +
                                    b->value.shape_str());

    Tensor out(batched_a ? std::vector<int64_t>{B, m, n} : std::vector<int64_t>{m, n});
    for (int64_t batch = 0; batch < B; ++batch) {
        MapConst ma(a->value.ptr() + batch * m * k, m, k);
        MapConst mb(b->value.ptr() + (batched_b ? batch * k * n : 0), k, n);
        MapMat mo(out.ptr() + batch * m * n, m, n);
        mo.noalias() = ma * mb;
    }
    return make_node(std::move(out), {a, b}, [=](Node& node) {
        for (int64_t batch = 0; batch < B; ++batch) {
            MapConst g(node.grad.ptr() + batch * m * n, m, n);
            if (a->requires_grad) {
                MapConst mb(b->value.ptr() + (batched_b ? batch * k * n : 0), k, n);
                MapMat ga(a->ensure_grad().ptr() + batch * m * k, m, k);
                ga.noalias() += g * mb.transpose();
            }
            if (b->requires_grad) {
                MapConst ma(a->value.ptr() + batch * m * k, m, k);
                MapMat gb(b->ensure_grad().ptr() + (batched_b ? batch * k * n : 0), k, n);
                gb.noalias() += ma.transpose() * g;
            }
        }
    });
}

Var softmax_lastdim(const Var& a) {
    const int64_t D = a->value.shape.back();
    const int64_t rows = a->value.numel() / D;
    Tensor out(a->value.shape);
    for (int64_t r = 0; r < rows; ++r) {
        const float* x = a->value.ptr() + r * D;
        float* y = out.ptr() + r * D;
        float mx = x[0];
        for (int64_t i = 1; i < D; ++i) mx = std::max(mx, x[i]);
        double sum = 0;
        for (int64_t i = 0; i < D; ++i) {
            y[i] = std::exp(x[i] - mx);
            sum += y[i];
        }
        const float inv = static_cast<float>(1.0 / sum);
        for (int64_t i = 0; i < D; ++i) y[i] *= inv;
    }
    return make_node(std::move(out), {a}, [=](Node& node) {
        if (!a->requires_grad) return;
        Tensor& ga = a->ensure_grad();
        for (int64_t r = 0; r < rows; ++r) {
            const float* y = node.value.ptr() + r * D;
            const float* g = node.grad.ptr() + r * D;
            double dot = 0;
            for (int64_t i = 0; i < D; ++i) dot += static_cast<double>(y[i]) * g[i];
            for (int64_t i = 0; i < D; ++i)
                ga.data[r * D + i] += y[i] * (g[i] - static_cast<float>(dot));
        }
    });
}

Var layer_norm(const Var& a, const Var& gamma, const Var& beta, double eps) {
    const int64_t D = a->value.shape.back();
    if (gamma->value.numel() != D || beta->value.numel() != D)
        throw std::invalid_argument("layer_norm: affine shape mismatch");
    const int64_t rows = a->value.numel() / D;
    Tensor out(a->value.shape);
    Tensor xhat(a->value.shape);
    std::vector<float> inv_std(rows);
    for (int64_t r = 0; r < rows; ++r) {
        const float* x = a->value.ptr() + r * D;
        double mean = 0;
        for (int64_t i = 0; i < D; ++i) mean += x[i];
        mean /= D;
        double var = 0;
        for (int64_t i = 0; i < D; ++i) var += (x[i] - mean) * (x[i] - mean);
        var /= D;
        const float is = static_cast<float>(1.0 / std::sqrt(var + eps));
        inv_std[r] = is;
        for (int64_t i = 0; i < D; ++i) {
            const float xh = (x[i] - static_cast<float>(mean)) * is;
            xhat.data[r * D + i] = xh;
            out.data[r * D + i] = xh * gamma->value.data[i] + beta->value.data[i];
        }
    }
    auto xhat_holder = std::make_shared<Tensor>(std::move(xhat));
    auto inv_holder = std::make_shared<std::vector<float>>(std::move(inv_std));
    return make_node(std::move(out), {a, gamma, beta}, [=](Node& node) {
        const Tensor& xh = *xhat_holder;
        for (int64_t r = 0; r < rows; ++r) {
            const float* g = node.grad.ptr() + r * D;
            if (gamma->requires_grad) {
                Tensor& gg = gamma->ensure_grad();
                for (int64_t i = 0; i < D; ++i) gg.data[i] += g[i] * xh.data[r * D + i];
            }
            if (beta->requires_grad) {
                Tensor& gb = beta->ensure_grad();
                for (int64_t i = 0; i < D; ++i) gb.data[i] += g[i];
            }
            if (a->requires_grad) {
                Tensor& ga = a->ensure_grad();
                // dL/dx = (inv_std / D) * (D*gy*gamma - sum(gy*gamma) - xhat*sum(gy*gamma*xhat))
                double sum_gg = 0, sum_ggx = 0;
                for (int64_t i = 0; i < D; ++i) {
                    const double t = static_cast<double>(g[i]) * gamma->value.data[i];
                    sum_gg += t;
                    sum_ggx += t * xh.data[r * D + i];
                }
                const float is = (*inv_holder)[r];
                for (int64_t i = 0; i < D; ++i) {
                    const double t = static_cast<double>(g[i]) * gamma->value.data[i];
                    ga.data[r * D + i] += static_cast<float>(
                        is / D * (D * t - sum_gg - xh.data[r * D + i] * sum_ggx));
                }
            }
        }
    });
}

Var conv2d(const Var& x, const Var& w, const Var& bias, int stride, int pad) {
    const auto& xs = x->value.shape;
    const auto& ws = w->value.shape;
    if (xs.size() != 4 || ws.size() != 4)
        throw std::invalid_argument("conv2d: x [N,C,H,W], w [O,C,kh,kw]");
    const int64_t N = xs[0], C = xs[1], H = xs[2], W = xs[3];
    const int64_t O = ws[0], kh = ws[2], kw = ws[3];
    if (ws[1] != C) throw std::invalid_argument("conv2d: channel mismatch");
    const int64_t Ho = (H + 2 * pad - kh) / stride + 1;
    const int64_t Wo = (W + 2 * pad - kw) / stride + 1;
    const int64_t K = C * kh * kw;

    auto im2col = [=](const float* img, float* col) {
        // col [K, Ho*Wo]
        for (int64_t c = 0; c < C; ++c)
            for (int64_t i = 0; i < kh; ++i)
                for (int64_t j = 0; j < kw; ++j) {
                    float* dst = col + ((c * kh + i) * kw + j) * Ho * Wo;
                    for (int64_t oy = 0; oy < Ho; ++oy) {
                        const int64_t iy = oy * stride + i - pad;
                        if (iy < 0 || iy >= H) {
                            std::fill_n(dst + oy * Wo, Wo, 0.f);
                            continue;
                        }
                        const float* src = img + (c * H + iy) * W;
                        for (int64_t ox = 0; ox < Wo; ++ox) {
                            const int64_t ix = ox * stride + j - pad;
                            dst[oy * Wo + ox] = (ix < 0 || ix >= W) ? 0.f : src[ix];
                        }
                    }
                }
    };

    Tensor out({N, O, Ho, Wo});
    Tensor col_buf({K, Ho * Wo});
    for (int64_t n = 0; n < N; ++n) {
        im2col(x->value.ptr() + n * C * H * W, col_buf.ptr());
        MapConst mw(w->value.ptr(), O, K);
        MapConst mc(col_buf.ptr(), K, Ho * Wo);
        MapMat mo(out.ptr() + n * O * Ho * Wo, O, Ho * Wo);
        mo.noalias() = mw * mc;
        if (bias) {
            for (int64_t o = 0; o < O; ++o) {
                float* dst = out.ptr() + (n * O + o) * Ho * Wo;
                const float b = bias->value.data[o];
                for (int64_t i = 0; i < Ho * Wo; ++i) dst[i] += b;
            }
        }
    }

    std::vector<Var> parents = bias ? std::vector<Var>{x, w, bias} : std::vector<Var>{x, w};
    return make_node(std::move(out), std::move(parents), [=](Node& node) {
        Tensor col({K, Ho * Wo});
        for (int64_t n = 0; n < N; ++n) {
            MapConst g(node.grad.ptr() + n * O * Ho * Wo, O, Ho * Wo);
            if (w->requires_grad || x->requires_grad)
                im2col(x->value.ptr() + n * C * H * W, col.ptr());
            if (w->requires_grad) {
                MapConst mc(col.ptr(), K, Ho * Wo);
                MapMat gw(w->ensure_grad().ptr(), O, K);
                gw.noalias() += g * mc.transpose();
            }
            if (bias && bias->requires_grad) {
                Tensor& gb = bias->ensure_grad();
                for (int64_t o = 0; o < O; ++o) {
                    double acc = 0;
                    const float* src = node.grad.ptr() + (n * O + o) * Ho * Wo;
                    for (int64_t i = 0; i < Ho * Wo; ++i) acc += src[i];
                    gb.data[o] += static_cast<float>(acc);
                }
            }
            if (x->requires_grad) {
                // dcol = W^T * g, then col2im-accumulate
                MapConst mw(w->value.ptr(), O, K);
                Tensor dcol({K, Ho * Wo});
                MapMat mdc(dcol.ptr(), K, Ho * Wo);
                mdc.noalias() = mw.transpose() * g;
                Tensor& gx = x->ensure_grad();
                float* gimg = gx.ptr() + n * C * H * W;
                for (int64_t c = 0; c < C; ++c)
                    for (int64_t i = 0; i < kh; ++i)
                        for (int64_t j = 0; j < kw; ++j) {
                            const float* src = dcol.ptr() + ((c * kh + i) * kw + j) * Ho * Wo;
                            for (int64_t oy = 0; oy < Ho; ++oy) {
                                const int64_t iy = oy * stride + i - pad;
                                if (iy < 0 || iy >= H) continue;
                                for (int64_t ox = 0; ox < Wo; ++ox) {
                                    const int64_t ix = ox * stride + j - pad;
                                    if (ix < 0 || ix >= W) continue;
                                    gimg[(c * H + iy) * W + ix] += src[oy * Wo + ox];
                                }
                            }
                        }
            }
        }
    });
}

Var upsample_nearest2(const Var& x) {
    const auto& s = x->value.shape;
    if (s.size() != 4) throw std::invalid_argument("upsample_nearest2: need NCHW");
    const int64_t N = s[0], C = s[1], H = s[2], W = s[3];
    Tensor out({N, C, H * 2, W * 2});
    for (int64_t nc = 0; nc < N * C; ++nc) {
        const float* src = x->value.ptr() + nc * H * W;
        float* dst = out.ptr() + nc * 4 * H * W;
        for (int64_t y = 0; y < 2 * H; ++y)
            for (int64_t xx = 0; xx < 2 * W; ++xx)
                dst[y * 2 * W + xx] = src[(y / 2) * W + xx / 2];
    }
    return make_node(std::move(out), {x}, [=](Node& node) {
        if (!x->requires_grad) return;
        Tensor& gx = x->ensure_grad();
        for (int64_t nc = 0; nc < N * C; ++nc) {
            float* gsrc = gx.ptr() + nc * H * W;
            const float* gdst = node.grad.ptr() + nc * 4 * H * W;
            for (int64_t y = 0; y < 2 * H; ++y)
                for (int64_t xx = 0; xx < 2 * W; ++xx)
                    gsrc[(y / 2) * W + xx / 2] += gdst[y * 2 * W + xx];
        }
    });
}

Var group_norm(const Var& x, int groups, const Var& gamma, const Var& beta, double eps) {
    const auto& s = x->value.shape;
    if (s.size() != 4) throw std::invalid_argument("group_norm: need NCHW");
    const int64_t N = s[0], C = s[1], H = s[2], W = s[3];
    if (C % groups != 0) throw std::invalid_argument("group_norm: C % groups != 0");
    const int64_t cg = C / groups;
    const int64_t M = cg * H * W;  // elements per (n, group)

    Tensor out(s);
    Tensor xhat(s);
    std::vector<float> inv_std(N * groups);
    for (int64_t n = 0; n < N; ++n)
        for (int64_t g = 0; g < groups; ++g) {
            const float* src = x->value.ptr() + (n * C + g * cg) * H * W;
            double mean = 0;
            for (int64_t i = 0; i < M; ++i) mean += src[i];
            mean /= M;
            double var = 0;
            for (int64_t i = 0; i < M; ++i) var += (src[i] - mean) * (src[i] - mean);
            var /= M;
            const float is = static_cast<float>(1.0 / std::sqrt(var + eps));
            inv_std[n * groups + g] = is;
            float* xh = xhat.ptr() + (n * C + g * cg) * H * W;
            float* dst = out.ptr() + (n * C + g * cg) * H * W;
            for (int64_t c = 0; c < cg; ++c) {
                const float ga = gamma->value.data[g * cg + c];
                const float be = beta->value.data[g * cg + c];
                for (int64_t i = 0; i < H * W; ++i) {
                    const float v = (src[c * H * W + i] - static_cast<float>(mean)) * is;
                    xh[c * H * W + i] = v;
                    dst[c * H * W + i] = v * ga + be;
                }
            }
        }
    auto xhat_holder = std::make_shared<Tensor>(std::move(xhat));
    auto inv_holder = std::make_shared<std::vector<float>>(std::move(inv_std));
    return make_node(std::move(out), {x, gamma, beta}, [=](Node& node) {
        const Tensor& xh = *xhat_holder;
        for (int64_t n = 0; n < N; ++n)
            for (int64_t g = 0; g < groups; ++g) {
                const int64_t base = (n * C + g * cg) * H * W;
                const float* gy = node.grad.ptr() + base;
                const float* xhp = xh.ptr() + base;
                if (gamma->requires_grad || beta->requires_grad) {
                    Tensor& gg = gamma->ensure_grad();
                    Tensor& gb = beta->ensure_grad();
                    for (int64_t c = 0; c < cg; ++c) {
                        double sg = 0, sb = 0;
                        for (int64_t i = 0; i < H * W; ++i) {
                            sg += static_cast<double>(gy[c * H * W + i]) * xhp[c * H * W + i];
                            sb += gy[c * H * W + i];
                        }
                        gg.data[g * cg + c] += static_cast<float>(sg);
                        gb.data[g * cg + c] += static_cast<float>(sb);
                    }
                }
                if (x->requires_grad) {
                    double sum_t = 0, sum_tx = 0;
                    for (int64_t c = 0; c < cg; ++c) {
                        const double ga = gamma->value.data[g * cg + c];
                        for (int64_t i = 0; i < H * W; ++i) {
                            const double t = gy[c * H * W + i] * ga;
                            sum_t += t;
                            sum_tx += t * xhp[c * H * W + i];
                        }
                    }
                    Tensor& gx = x->ensure_grad();
                    const float is = (*inv_holder)[n * groups + g];
                    for (int64_t c = 0; c < cg; ++c) {
                        const double ga = gamma->value.data[g * cg + c];
                        for (int64_t i = 0; i < H * W; ++i) {
                            const double t = gy[c * H * W + i] * ga;
                            gx.data[base + c * H * W + i] += static_cast<float>(
                                is / M * (M * t - sum_t - xhp[c * H * W + i] * sum_tx));
                        }
                    }
                }
            }
    });
}

Var bilinear_gather(const Var& feat, const std::vector<Vec2f>& coords) {
    const auto& s = feat->value.shape;
    if (s.size() != 3) throw std::invalid_argument("bilinear_gather: need [C,H,W]");
    const int64_t C = s[0], H = s[1], W = s[2];
    const int64_t M = static_cast<int64_t>(coords.size());

    struct Corner {
        int64_t idx[4];
        float wgt[4];
    };
    auto corners = std::make_shared<std::vector<Corner>>(M);
    Tensor out({M, C});
    for (int64_t m = 0; m < M; ++m) {
        float fx = std::clamp(coords[m].x, 0.f, static_cast<float>(W - 1));
        float fy = std::clamp(coords[m].y, 0.f, static_cast<float>(H - 1));
        const int64_t x0 = std::min<int64_t>(static_cast<int64_t>(fx), W - 2 >= 0 ? W - 2 : 0);
        const int64_t y0 = std::min<int64_t>(static_cast<int64_t>(fy), H - 2 >= 0 ? H - 2 : 0);
        const float ax = fx - x0, ay = fy - y0;
        Corner& co = (*corners)[m];
        co.idx[0] = y0 * W + x0;
        co.idx[1] = y0 * W + std::min(x0 + 1, W - 1);
        co.idx[2] = std::min(y0 + 1, H - 1) * W + x0;
        co.idx[3] = std::min(y0 + 1, H - 1) * W + std::min(x0 + 1, W - 1);
        co.wgt[0] = (1 - ax) * (1 - ay);
        co.wgt[1] = ax * (1 - ay);
        co.wgt[2] = (1 - ax) * ay;
        co.wgt[3] = ax * ay;
        for (int64_t c = 0; c < C; ++c) {
            const float* plane = feat->value.ptr() + c * H * W;
            out.data[m * C + c] = co.wgt[0] * plane[co.idx[0]] + co.wgt[1] * plane[co.idx[1]] +
                                  co.wgt[2] * plane[co.idx[2]] + co.wgt[3] * plane[co.idx[3]];
        }
    }
    return make_node(std::move(out), {feat}, [=](Node& node) {
        if (!feat->requires_grad) return;
        Tensor& gf = feat->ensure_grad();
        for (int64_t m = 0; m < M; ++m) {
            const Corner& co = (*corners)[m];
            for (int64_t c = 0; c < C; ++c) {
                const float g = node.grad.data[m * C + c];
                float* plane = gf.ptr() + c * H * W;
                plane[co.idx[0]] += g * co.wgt[0];
                plane[co.idx[1]] += g * co.wgt[1];
                plane[co.idx[2]] += g * co.wgt[2];
                plane[co.idx[3]] += g * co.wgt[3];
            }
        }
    });
}

Var sum_all(const Var& a) {
    double acc = 0;
    for (float v : a->value.data) acc += v;
    Tensor out({1});
    out.data[0] = static_cast<float>(acc);
    return make_node(std::move(out), {a}, [=](Node& node) {
        if (!a->requires_grad) return;
        Tensor& ga = a->ensure_grad();
        const float g = node.grad.data[0];
        for (float& v : ga.data) v += g;
    });
}

Var mean_all(const Var& a) { return scale(sum_all(a), 1.0 / a->value.numel()); }

Var l1_mean(const Var& a, const Var& b) {
    if (!a->value.same_shape(b->value)) throw std::invalid_argument("l1_mean: shape mismatch");
    const int64_t n = a->value.numel();
    double acc = 0;
    for (int64_t i = 0; i < n; ++i) acc += std::abs(a->value.data[i] - b->value.data[i]);
    Tensor out({1});
    out.data[0] = static_cast<float>(acc / n);
    return make_node(std::move(out), {a, b}, [=](Node& node) {
        const float g = node.grad.data[0] / n;
        for (int64_t i = 0; i < n; ++i) {
            const float d = a->value.data[i] - b->value.data[i];
            const float sgn = d > 0 ? 1.f : (d < 0 ? -1.f : 0.f);
            if (a->requires_grad) a->ensure_grad().data[i] += g * sgn;
            if (b->requires_grad) b->ensure_grad().data[i] -= g * sgn;
        }
    });
}

Var mse_mean(const Var& a, const Var& b) {
    if (!a->value.same_shape(b->value)) throw std::invalid_argument("mse_mean: shape mismatch");
    const int64_t n = a->value.numel();
    double acc = 0;
    for (int64_t i = 0; i < n; ++i) {
        const double d = a->value.data[i] - b->value.data[i];
        acc += d * d;
    }
    Tensor out({1});
    out.data[0] = static_cast<float>(acc / n);
    return make_node(std::move(out), {a, b}, [=](Node& node) {
        const float g = 2.f * node.grad.data[0] / n;
        for (int64_t i = 0; i < n; ++i) {
            const float d = a->value.data[i] - b->value.data[i];
            if (a->requires_grad) a->ensure_grad().data[i] += g * d;
            if (b->requires_grad) b->ensure_grad().data[i] -= g * d;
        }
    });
}

}  // namespace srec::nn
