#pragma once

#include "slicerec/nn/autodiff.hpp"

namespace srec::nn {

// Adam with bias correction, no weight decay. Parameters with no gradient
// this step (empty grad) are left untouched, including their moments.
class Adam {
public:
    explicit Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(const std::vector<Var>& params) {
        ++t_;
        if (m_.size() != params.size()) {
            m_.assign(params.size(), Tensor());
            v_.assign(params.size(), Tensor());
        }
        const double bc1 = 1.0 - std::pow(beta1_, t_);
        const double bc2 = 1.0 - std::pow(beta2_, t_);
        for (size_t i = 0; i < params.size(); ++i) {
            Var p = params[i];
            if (p->grad.data.empty()) continue;
            if (m_[i].data.empty()) {
                m_[i] = Tensor::zeros(p->value.shape);
                v_[i] = Tensor::zeros(p->value.shape);
            }
            for (size_t j = 0; j < p->value.data.size(); ++j) {
                const double g = p->grad.data[j];
                m_[i].data[j] = static_cast<float>(beta1_ * m_[i].data[j] + (1 - beta1_) * g);
                v_[i].data[j] = static_cast<float>(beta2_ * v_[i].data[j] + (1 - beta2_) * g * g);
                const double mhat = m_[i].data[j] / bc1;
                const double vhat = v_[i].data[j] / bc2;
                p->value.data[j] -= static_cast<float>(lr_ * mhat / (std::sqrt(vhat) + eps_));
            }
        }
    }

    double learning_rate() const { return lr_; }
    void set_learning_rate(double lr) { lr_ = lr; }
    int64_t step_count() const { return t_; }

    // Exposed for checkpointing.
    std::vector<Tensor>& moment1() { return m_; }
    std::vector<Tensor>& moment2() { return v_; }
    void restore(int64_t t, std::vector<Tensor> m, std::vector<Tensor> v) {
        t_ = t;
        m_ = std::move(m);
        v_ = std::move(v);
    }

private:
    double lr_, beta1_, beta2_, eps_;
    int64_t t_ = 0;
    std::vector<Tensor> m_, v_;
};

}  // namespace srec::nn
