#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "gda/nn/tensor.hpp"
#include "gda/rng.hpp"

namespace gda::nn {

enum class Mode { Train, Eval };

template <typename T>
struct Param {
    std::vector<T> value;
    std::vector<T> grad;

    explicit Param(std::size_t n = 0) : value(n, T(0)), grad(n, T(0)) {}
    std::size_t size() const { return value.size(); }
};

/// A differentiable stage. backward() consumes the gradient with respect to the
/// output of the most recent forward() and accumulates parameter gradients.
template <typename T>
class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor<T> forward(const Tensor<T>& x, Mode mode) = 0;
    virtual Tensor<T> backward(const Tensor<T>& grad_out) = 0;
    virtual void collect_params(std::vector<Param<T>*>& /*out*/) {}
    /// Non-trainable state that must survive a checkpoint (running statistics).
    virtual void collect_buffers(std::vector<std::vector<T>*>& /*out*/) {}
    virtual std::string name() const = 0;
};

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<Matrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const Matrix<T>>;

template <typename T>
void uniform_init(std::vector<T>& v, double bound, Rng& rng) {
    for (auto& x : v) x = static_cast<T>(rng.uniform(-bound, bound));
}

// ---------------------------------------------------------------------------

template <typename T>
class Conv2d final : public Layer<T> {
public:
    Conv2d(int in_channels, int out_channels, int kernel, int stride, int padding, Rng& rng)
        : cin_(in_channels), cout_(out_channels), k_(kernel), stride_(stride), pad_(padding),
          weight_(static_cast<std::size_t>(out_channels) * static_cast<std::size_t>(in_channels * kernel * kernel)),
          bias_(static_cast<std::size_t>(out_channels)) {
        const double fan_in = static_cast<double>(in_channels * kernel * kernel);
        uniform_init(weight_.value, std::sqrt(6.0 / fan_in), rng);
    }

    Tensor<T> forward(const Tensor<T>& x, Mode) override {
        if (x.c != cin_) throw Error("Conv2d: expected " + std::to_string(cin_) + " input channels, got " + std::to_string(x.c));
        input_ = x;
        const int ho = out_size(x.h), wo = out_size(x.w);
        Tensor<T> y(x.n, cout_, ho, wo);
        const int ckk = cin_ * k_ * k_;
        col_.resize(static_cast<std::size_t>(ckk) * static_cast<std::size_t>(ho * wo));
        ConstMatrixMap<T> wmat(weight_.value.data(), cout_, ckk);
        Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bvec(bias_.value.data(), cout_);
        for (int i = 0; i < x.n; ++i) {
            im2col(x.sample(i), x.h, x.w, ho, wo);
            MatrixMap<T> ymat(y.sample(i), cout_, ho * wo);
            ConstMatrixMap<T> cmat(col_.data(), ckk, ho * wo);
            ymat.noalias() = wmat * cmat;
            ymat.colwise() += bvec;
        }
        return y;
    }

    Tensor<T> backward(const Tensor<T>& g) override {
        const Tensor<T>& x = input_;
        const int ho = g.h, wo = g.w;
        const int ckk = cin_ * k_ * k_;
        Tensor<T> dx = x.zeros_like();
        ConstMatrixMap<T> wmat(weight_.value.data(), cout_, ckk);
        MatrixMap<T> dw(weight_.grad.data(), cout_, ckk);
        col_.resize(static_cast<std::size_t>(ckk) * static_cast<std::size_t>(ho * wo));
        dcol_.resize(col_.size());
        for (int i = 0; i < x.n; ++i) {
            im2col(x.sample(i), x.h, x.w, ho, wo);
            ConstMatrixMap<T> gmat(g.sample(i), cout_, ho * wo);
            ConstMatrixMap<T> cmat(col_.data(), ckk, ho * wo);
            dw.noalias() += gmat * cmat.transpose();
            // Plain loop: Eigen's vectorized reductions sum in an order that
            // depends on address alignment, so results would vary run to run.
            const T* gs = g.sample(i);
            for (int o = 0; o < cout_; ++o) {
                T acc = T(0);
                for (int p = 0; p < ho * wo; ++p) acc += gs[static_cast<std::size_t>(o) * static_cast<std::size_t>(ho * wo) + static_cast<std::size_t>(p)];
                bias_.grad[static_cast<std::size_t>(o)] += acc;
            }
            MatrixMap<T> dcmat(dcol_.data(), ckk, ho * wo);
            dcmat.noalias() = wmat.transpose() * gmat;
            col2im(dx.sample(i), x.h, x.w, ho, wo);
        }
        return dx;
    }

    void collect_params(std::vector<Param<T>*>& out) override {
        out.push_back(&weight_);
        out.push_back(&bias_);
    }
    std::string name() const override { return "conv" + std::to_string(k_) + "x" + std::to_string(k_) + "_" + std::to_string(cout_); }

    int out_size(int in) const { return (in + 2 * pad_ - k_) / stride_ + 1; }
    Param<T>& weight() { return weight_; }
    Param<T>& bias() { return bias_; }

private:
    void im2col(const T* src, int h, int w, int ho, int wo) {
        std::size_t r = 0;
        const std::size_t cols = static_cast<std::size_t>(ho * wo);
        for (int ci = 0; ci < cin_; ++ci)
            for (int ky = 0; ky < k_; ++ky)
                for (int kx = 0; kx < k_; ++kx, ++r) {
                    T* dst = col_.data() + r * cols;
                    for (int oy = 0; oy < ho; ++oy) {
                        const int iy = oy * stride_ - pad_ + ky;
                        T* d = dst + static_cast<std::size_t>(oy * wo);
                        if (iy < 0 || iy >= h) {
                            std::fill(d, d + wo, T(0));
                            continue;
                        }
                        const T* s = src + (static_cast<std::size_t>(ci) * static_cast<std::size_t>(h) + static_cast<std::size_t>(iy)) *
                                               static_cast<std::size_t>(w);
                        for (int ox = 0; ox < wo; ++ox) {
                            const int ix = ox * stride_ - pad_ + kx;
                            d[ox] = (ix < 0 || ix >= w) ? T(0) : s[ix];
                        }
                    }
                }
    }

    void col2im(T* dst, int h, int w, int ho, int wo) const {
        std::size_t r = 0;
        const std::size_t cols = static_cast<std::size_t>(ho * wo);
        for (int ci = 0; ci < cin_; ++ci)
            for (int ky = 0; ky < k_; ++ky)
                for (int kx = 0; kx < k_; ++kx, ++r) {
                    const T* src = dcol_.data() + r * cols;
                    for (int oy = 0; oy < ho; ++oy) {
                        const int iy = oy * stride_ - pad_ + ky;
                        if (iy < 0 || iy >= h) continue;
                        T* d = dst + (static_cast<std::size_t>(ci) * static_cast<std::size_t>(h) + static_cast<std::size_t>(iy)) *
                                         static_cast<std::size_t>(w);
                        const T* s = src + static_cast<std::size_t>(oy * wo);
                        for (int ox = 0; ox < wo; ++ox) {
                            const int ix = ox * stride_ - pad_ + kx;
                            if (ix >= 0 && ix < w) d[ix] += s[ox];
                        }
                    }
                }
    }

    int cin_, cout_, k_, stride_, pad_;
    Param<T> weight_;
    Param<T> bias_;
    Tensor<T> input_;
    std::vector<T> col_;
    std::vector<T> dcol_;
};

// ---------------------------------------------------------------------------

template <typename T>
class Linear final : public Layer<T> {
public:
    Linear(int in_features, int out_features, Rng& rng)
        : in_(in_features), out_(out_features),
          weight_(static_cast<std::size_t>(in_features) * static_cast<std::size_t>(out_features)),
          bias_(static_cast<std::size_t>(out_features)) {
        uniform_init(weight_.value, std::sqrt(6.0 / in_features), rng);
    }

    Tensor<T> forward(const Tensor<T>& x, Mode) override {
        if (static_cast<int>(x.per_sample()) != in_)
            throw Error("Linear: expected " + std::to_string(in_) + " features, got " + std::to_string(x.per_sample()));
        input_ = x;
        Tensor<T> y(x.n, out_);
        ConstMatrixMap<T> xm(x.data.data(), x.n, in_);
        ConstMatrixMap<T> wm(weight_.value.data(), out_, in_);
        MatrixMap<T> ym(y.data.data(), x.n, out_);
        ym.noalias() = xm * wm.transpose();
        Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> b(bias_.value.data(), out_);
        ym.rowwise() += b;
        return y;
    }

    Tensor<T> backward(const Tensor<T>& g) override {
        const Tensor<T>& x = input_;
        Tensor<T> dx = x.zeros_like();
        ConstMatrixMap<T> gm(g.data.data(), g.n, out_);
        ConstMatrixMap<T> xm(x.data.data(), x.n, in_);
        ConstMatrixMap<T> wm(weight_.value.data(), out_, in_);
        MatrixMap<T> dw(weight_.grad.data(), out_, in_);
        dw.noalias() += gm.transpose() * xm;
        // Plain loop for the same reason as in Conv2d::backward.
        for (int i = 0; i < g.n; ++i) {
            const T* gs = g.sample(i);
            for (int o = 0; o < out_; ++o) bias_.grad[static_cast<std::size_t>(o)] += gs[o];
        }
        MatrixMap<T> dxm(dx.data.data(), x.n, in_);
        dxm.noalias() = gm * wm;
        return dx;
    }

    void collect_params(std::vector<Param<T>*>& out) override {
        out.push_back(&weight_);
        out.push_back(&bias_);
    }
    std::string name() const override { return "fc" + std::to_string(out_); }
    Param<T>& weight() { return weight_; }
    Param<T>& bias() { return bias_; }

private:
    int in_, out_;
    Param<T> weight_;
    Param<T> bias_;
    Tensor<T> input_;
};

// ---------------------------------------------------------------------------

template <typename T>
class ReLU final : public Layer<T> {
public:
    explicit ReLU(T negative_slope = T(0)) : slope_(negative_slope) {}

    Tensor<T> forward(const Tensor<T>& x, Mode) override {
        input_ = x;
        Tensor<T> y = x;
        for (auto& v : y.data)
            if (v < T(0)) v *= slope_;
        return y;
    }
    Tensor<T> backward(const Tensor<T>& g) override {
        Tensor<T> dx = g;
        for (std::size_t i = 0; i < dx.size(); ++i)
            if (input_.data[i] < T(0)) dx.data[i] *= slope_;
        return dx;
    }
    std::string name() const override { return slope_ == T(0) ? "relu" : "leaky_relu"; }

private:
    T slope_;
    Tensor<T> input_;
};

template <typename T>
std::unique_ptr<Layer<T>> leaky_relu(T slope = T(0.2)) {
    return std::make_unique<ReLU<T>>(slope);
}

// ---------------------------------------------------------------------------

/// Per-channel batch normalization with affine parameters. Normalizes over
/// (n, h, w); fully-connected activations are the h = w = 1 case.
template <typename T>
class BatchNorm final : public Layer<T> {
public:
    explicit BatchNorm(int channels, T momentum = T(0.1), T eps = T(1e-5))
        : ch_(channels), momentum_(momentum), eps_(eps), gamma_(static_cast<std::size_t>(channels)),
          beta_(static_cast<std::size_t>(channels)), running_mean_(static_cast<std::size_t>(channels), T(0)),
          running_var_(static_cast<std::size_t>(channels), T(1)) {
        std::fill(gamma_.value.begin(), gamma_.value.end(), T(1));
    }

    Tensor<T> forward(const Tensor<T>& x, Mode mode) override {
        if (x.c != ch_) throw Error("BatchNorm: channel mismatch");
        const std::size_t plane = x.plane();
        const auto count = static_cast<double>(static_cast<std::size_t>(x.n) * plane);
        Tensor<T> y = x.zeros_like();
        xhat_ = x.zeros_like();
        inv_std_.assign(static_cast<std::size_t>(ch_), T(0));
        for (int c = 0; c < ch_; ++c) {
            const auto cs = static_cast<std::size_t>(c);
            T mean, var;
            if (mode == Mode::Train) {
                if (count < 2) throw Error("BatchNorm: training needs more than one value per channel");
                double s = 0.0, ss = 0.0;
                for (int i = 0; i < x.n; ++i) {
                    const T* p = x.sample(i) + cs * plane;
                    for (std::size_t j = 0; j < plane; ++j) s += static_cast<double>(p[j]);
                }
                const double m = s / count;
                for (int i = 0; i < x.n; ++i) {
                    const T* p = x.sample(i) + cs * plane;
                    for (std::size_t j = 0; j < plane; ++j) {
                        const double d = static_cast<double>(p[j]) - m;
                        ss += d * d;
                    }
                }
                mean = static_cast<T>(m);
                var = static_cast<T>(ss / count);
                running_mean_[cs] = (T(1) - momentum_) * running_mean_[cs] + momentum_ * mean;
                running_var_[cs] = (T(1) - momentum_) * running_var_[cs] + momentum_ * static_cast<T>(ss / (count - 1));
            } else {
                mean = running_mean_[cs];
                var = running_var_[cs];
            }
            const T inv = T(1) / std::sqrt(var + eps_);
            inv_std_[cs] = inv;
            for (int i = 0; i < x.n; ++i) {
                const T* p = x.sample(i) + cs * plane;
                T* xh = xhat_.sample(i) + cs * plane;
                T* q = y.sample(i) + cs * plane;
                for (std::size_t j = 0; j < plane; ++j) {
                    xh[j] = (p[j] - mean) * inv;
                    q[j] = gamma_.value[cs] * xh[j] + beta_.value[cs];
                }
            }
        }
        last_mode_ = mode;
        return y;
    }

    Tensor<T> backward(const Tensor<T>& g) override {
        const std::size_t plane = g.plane();
        const auto count = static_cast<T>(static_cast<std::size_t>(g.n) * plane);
        Tensor<T> dx = g.zeros_like();
        for (int c = 0; c < ch_; ++c) {
            const auto cs = static_cast<std::size_t>(c);
            T sum_g = 0, sum_gx = 0;
            for (int i = 0; i < g.n; ++i) {
                const T* gp = g.sample(i) + cs * plane;
                const T* xh = xhat_.sample(i) + cs * plane;
                for (std::size_t j = 0; j < plane; ++j) {
                    sum_g += gp[j];
                    sum_gx += gp[j] * xh[j];
                }
            }
            gamma_.grad[cs] += sum_gx;
            beta_.grad[cs] += sum_g;
            const T scale = gamma_.value[cs] * inv_std_[cs];
            for (int i = 0; i < g.n; ++i) {
                const T* gp = g.sample(i) + cs * plane;
                const T* xh = xhat_.sample(i) + cs * plane;
                T* d = dx.sample(i) + cs * plane;
                for (std::size_t j = 0; j < plane; ++j) {
                    if (last_mode_ == Mode::Train)
                        d[j] = scale * (gp[j] - sum_g / count - xh[j] * sum_gx / count);
                    else
                        d[j] = scale * gp[j];
                }
            }
        }
        return dx;
    }

    void collect_params(std::vector<Param<T>*>& out) override {
        out.push_back(&gamma_);
        out.push_back(&beta_);
    }
    void collect_buffers(std::vector<std::vector<T>*>& out) override {
        out.push_back(&running_mean_);
        out.push_back(&running_var_);
    }
    std::string name() const override { return "batchnorm"; }

private:
    int ch_;
    T momentum_, eps_;
    Param<T> gamma_, beta_;
    std::vector<T> running_mean_, running_var_;
    Tensor<T> xhat_;
    std::vector<T> inv_std_;
    Mode last_mode_ = Mode::Train;
};

// ---------------------------------------------------------------------------

/// Per-sample, per-channel normalization over (h, w); no affine parameters.
template <typename T>
class InstanceNorm final : public Layer<T> {
public:
    explicit InstanceNorm(T eps = T(1e-5)) : eps_(eps) {}

    Tensor<T> forward(const Tensor<T>& x, Mode) override {
        const std::size_t plane = x.plane();
        Tensor<T> y = x.zeros_like();
        inv_std_.assign(static_cast<std::size_t>(x.n * x.c), T(0));
        for (int i = 0; i < x.n; ++i)
            for (int c = 0; c < x.c; ++c) {
                const T* p = x.sample(i) + static_cast<std::size_t>(c) * plane;
                T* q = y.sample(i) + static_cast<std::size_t>(c) * plane;
                double s = 0.0;
                for (std::size_t j = 0; j < plane; ++j) s += static_cast<double>(p[j]);
                const double m = s / static_cast<double>(plane);
                double ss = 0.0;
                for (std::size_t j = 0; j < plane; ++j) ss += (static_cast<double>(p[j]) - m) * (static_cast<double>(p[j]) - m);
                const T inv = static_cast<T>(1.0 / std::sqrt(ss / static_cast<double>(plane) + static_cast<double>(eps_)));
                inv_std_[static_cast<std::size_t>(i * x.c + c)] = inv;
                for (std::size_t j = 0; j < plane; ++j) q[j] = (p[j] - static_cast<T>(m)) * inv;
            }
        output_ = y;
        return y;
    }

    Tensor<T> backward(const Tensor<T>& g) override {
        const std::size_t plane = g.plane();
        const auto count = static_cast<T>(plane);
        Tensor<T> dx = g.zeros_like();
        for (int i = 0; i < g.n; ++i)
            for (int c = 0; c < g.c; ++c) {
                const std::size_t off = static_cast<std::size_t>(c) * plane;
                const T* gp = g.sample(i) + off;
                const T* xh = output_.sample(i) + off;
                T* d = dx.sample(i) + off;
                T sg = 0, sgx = 0;
                for (std::size_t j = 0; j < plane; ++j) {
                    sg += gp[j];
                    sgx += gp[j] * xh[j];
                }
                const T inv = inv_std_[static_cast<std::size_t>(i * g.c + c)];
                for (std::size_t j = 0; j < plane; ++j) d[j] = inv * (gp[j] - sg / count - xh[j] * sgx / count);
            }
        return dx;
    }
    std::string name() const override { return "instancenorm"; }

private:
    T eps_;
    Tensor<T> output_;
    std::vector<T> inv_std_;
};

// ---------------------------------------------------------------------------

template <typename T>
class MaxPool2 final : public Layer<T> {
public:
    Tensor<T> forward(const Tensor<T>& x, Mode) override {
        if (x.h < 2 || x.w < 2) throw Error("MaxPool2: input smaller than 2x2");
        in_shape_ = x.zeros_like();
        const int ho = x.h / 2, wo = x.w / 2;
        Tensor<T> y(x.n, x.c, ho, wo);
        argmax_.assign(y.size(), 0);
        std::size_t o = 0;
        for (int i = 0; i < x.n; ++i)
            for (int c = 0; c < x.c; ++c)
                for (int oy = 0; oy < ho; ++oy)
                    for (int ox = 0; ox < wo; ++ox, ++o) {
                        std::size_t best = 0;
                        T best_v = T(0);
                        bool first = true;
                        for (int dy = 0; dy < 2; ++dy)
                            for (int dx = 0; dx < 2; ++dx) {
                                const std::size_t idx =
                                    ((static_cast<std::size_t>(i) * static_cast<std::size_t>(x.c) + static_cast<std::size_t>(c)) *
                                         static_cast<std::size_t>(x.h) +
                                     static_cast<std::size_t>(2 * oy + dy)) *
                                        static_cast<std::size_t>(x.w) +
                                    static_cast<std::size_t>(2 * ox + dx);
                                if (first || x.data[idx] > best_v) {
                                    best_v = x.data[idx];
                                    best = idx;
                                    first = false;
                                }
                            }
                        y.data[o] = best_v;
                        argmax_[o] = best;
                    }
        return y;
    }
    Tensor<T> backward(const Tensor<T>& g) override {
        Tensor<T> dx = in_shape_;
        std::fill(dx.data.begin(), dx.data.end(), T(0));
        for (std::size_t o = 0; o < g.size(); ++o) dx.data[argmax_[o]] += g.data[o];
        return dx;
    }
    std::string name() const override { return "maxpool2x2"; }

private:
    Tensor<T> in_shape_;
    std::vector<std::size_t> argmax_;
};

/// Averages each channel over (h, w); output is (n, c, 1, 1).
template <typename T>
class GlobalAvgPool final : public Layer<T> {
public:
    Tensor<T> forward(const Tensor<T>& x, Mode) override {
        h_ = x.h;
        w_ = x.w;
        Tensor<T> y(x.n, x.c);
        const std::size_t plane = x.plane();
        for (int i = 0; i < x.n; ++i)
            for (int c = 0; c < x.c; ++c) {
                const T* p = x.sample(i) + static_cast<std::size_t>(c) * plane;
                T s = 0;
                for (std::size_t j = 0; j < plane; ++j) s += p[j];
                y.at(i, c) = s / static_cast<T>(plane);
            }
        return y;
    }
    Tensor<T> backward(const Tensor<T>& g) override {
        Tensor<T> dx(g.n, g.c, h_, w_);
        const std::size_t plane = dx.plane();
        for (int i = 0; i < g.n; ++i)
            for (int c = 0; c < g.c; ++c) {
                const T v = g.at(i, c) / static_cast<T>(plane);
                T* p = dx.sample(i) + static_cast<std::size_t>(c) * plane;
                std::fill(p, p + plane, v);
            }
        return dx;
    }
    std::string name() const override { return "global_avg_pool"; }

private:
    int h_ = 1, w_ = 1;
};

template <typename T>
class Flatten final : public Layer<T> {
public:
    Tensor<T> forward(const Tensor<T>& x, Mode) override {
        c_ = x.c;
        h_ = x.h;
        w_ = x.w;
        Tensor<T> y = x;
        y.c = static_cast<int>(x.per_sample());
        y.h = y.w = 1;
        return y;
    }
    Tensor<T> backward(const Tensor<T>& g) override {
        Tensor<T> dx = g;
        dx.c = c_;
        dx.h = h_;
        dx.w = w_;
        return dx;
    }
    std::string name() const override { return "flatten"; }

private:
    int c_ = 0, h_ = 1, w_ = 1;
};

/// Inverted dropout; identity in eval mode.
template <typename T>
class Dropout final : public Layer<T> {
public:
    Dropout(double p, std::uint64_t seed) : p_(p), rng_(seed) {
        if (p < 0.0 || p >= 1.0) throw Error("Dropout: rate must be in [0, 1)");
    }

    Tensor<T> forward(const Tensor<T>& x, Mode mode) override {
        active_ = mode == Mode::Train && p_ > 0.0;
        if (!active_) return x;
        mask_.resize(x.size());
        const T keep_scale = static_cast<T>(1.0 / (1.0 - p_));
        Tensor<T> y = x;
        for (std::size_t i = 0; i < x.size(); ++i) {
            mask_[i] = rng_.bernoulli(p_) ? T(0) : keep_scale;
            y.data[i] *= mask_[i];
        }
        return y;
    }
    Tensor<T> backward(const Tensor<T>& g) override {
        if (!active_) return g;
        Tensor<T> dx = g;
        for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] *= mask_[i];
        return dx;
    }
    std::string name() const override { return "dropout"; }

private:
    double p_;
    Rng rng_;
    bool active_ = false;
    std::vector<T> mask_;
};

/// Gradient reversal: identity forward, gradient multiplied by -lambda backward.
template <typename T>
class GradientReversal final : public Layer<T> {
public:
    explicit GradientReversal(T lambda = T(0)) { set_lambda(lambda); }

    void set_lambda(T lambda) {
        if (lambda < T(0)) throw Error("GradientReversal: lambda must be non-negative");
        lambda_ = lambda;
    }
    T lambda() const { return lambda_; }

    Tensor<T> forward(const Tensor<T>& x, Mode) override { return x; }
    Tensor<T> backward(const Tensor<T>& g) override {
        Tensor<T> dx = g;
        for (auto& v : dx.data) v = -lambda_ * v;
        return dx;
    }
    std::string name() const override { return "grad_reverse"; }

private:
    T lambda_ = T(0);
};

// ---------------------------------------------------------------------------

template <typename T>
class Sequential final : public Layer<T> {
public:
    Sequential() = default;

    Sequential& add(std::unique_ptr<Layer<T>> layer) {
        layers_.push_back(std::move(layer));
        return *this;
    }
    template <typename L, typename... Args>
    L& emplace(Args&&... args) {
        auto p = std::make_unique<L>(std::forward<Args>(args)...);
        L& ref = *p;
        layers_.push_back(std::move(p));
        return ref;
    }

    Tensor<T> forward(const Tensor<T>& x, Mode mode) override {
        Tensor<T> h = x;
        for (auto& l : layers_) h = l->forward(h, mode);
        return h;
    }
    Tensor<T> backward(const Tensor<T>& g) override {
        Tensor<T> d = g;
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) d = (*it)->backward(d);
        return d;
    }
    void collect_params(std::vector<Param<T>*>& out) override {
        for (auto& l : layers_) l->collect_params(out);
    }
    void collect_buffers(std::vector<std::vector<T>*>& out) override {
        for (auto& l : layers_) l->collect_buffers(out);
    }
    std::string name() const override { return "sequential"; }

    std::size_t size() const { return layers_.size(); }
    Layer<T>& operator[](std::size_t i) { return *layers_[i]; }

    std::vector<Param<T>*> params() {
        std::vector<Param<T>*> out;
        collect_params(out);
        return out;
    }

private:
    std::vector<std::unique_ptr<Layer<T>>> layers_;
};

template <typename T>
void zero_grad(const std::vector<Param<T>*>& params) {
    for (auto* p : params) std::fill(p->grad.begin(), p->grad.end(), T(0));
}

}  // namespace gda::nn
