#pragma once

#include <cmath>
#include <vector>

#include "gda/nn/layers.hpp"

namespace gda::nn {

template <typename T>
class Adam {
public:
    Adam(std::vector<Param<T>*> params, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : params_(std::move(params)), lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {
        for (auto* p : params_) {
            m_.emplace_back(p->size(), 0.0);
            v_.emplace_back(p->size(), 0.0);
        }
    }

    void step() {
        ++t_;
        const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
        for (std::size_t k = 0; k < params_.size(); ++k) {
            auto& p = *params_[k];
            auto& m = m_[k];
            auto& v = v_[k];
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double g = static_cast<double>(p.grad[i]);
                m[i] = b1_ * m[i] + (1.0 - b1_) * g;
                v[i] = b2_ * v[i] + (1.0 - b2_) * g * g;
                const double update = lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
                p.value[i] = static_cast<T>(static_cast<double>(p.value[i]) - update);
            }
        }
    }

    void zero_grad() { nn::zero_grad(params_); }

private:
    std::vector<Param<T>*> params_;
    double lr_, b1_, b2_, eps_;
    long t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

/// SGD with classical momentum and L2 weight decay folded into the gradient.
template <typename T>
class Sgd {
public:
    Sgd(std::vector<Param<T>*> params, double lr, double momentum = 0.9, double weight_decay = 0.0)
        : params_(std::move(params)), lr_(lr), momentum_(momentum), wd_(weight_decay) {
        for (auto* p : params_) buf_.emplace_back(p->size(), T(0));
    }

    void set_lr(double lr) { lr_ = lr; }

    void step() {
        for (std::size_t k = 0; k < params_.size(); ++k) {
            auto& p = *params_[k];
            auto& b = buf_[k];
            for (std::size_t i = 0; i < p.size(); ++i) {
                const T g = p.grad[i] + static_cast<T>(wd_) * p.value[i];
                b[i] = static_cast<T>(momentum_) * b[i] + g;
                p.value[i] -= static_cast<T>(lr_) * b[i];
            }
        }
    }

    void zero_grad() { nn::zero_grad(params_); }

private:
    std::vector<Param<T>*> params_;
    double lr_, momentum_, wd_;
    std::vector<std::vector<T>> buf_;
};

}  // namespace gda::nn
