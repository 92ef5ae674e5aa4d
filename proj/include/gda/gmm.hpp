#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Core>

#include "gda/image.hpp"
#include "gda/rng.hpp"

namespace gda {

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kVarianceFloor = 1e-6;

/// Diagonal-covariance Gaussian mixture.
struct MixtureModel {
    int k = 0;
    Eigen::VectorXd weights;
    FeatureMatrix means;      // k x dim
    FeatureMatrix variances;  // k x dim
    double final_log_likelihood = -std::numeric_limits<double>::infinity();  // mean per sample
    std::vector<double> log_likelihood_trace;                                  // one entry per E-step
    int iterations = 0;
    int reseeds = 0;
};

struct GmmOptions {
    int max_iterations = 200;
    double tolerance = 1e-6;  // on the mean per-sample log-likelihood
    double variance_floor = kVarianceFloor;
    double degenerate_weight = 1e-8;
};

namespace detail {

inline double sq_dist(const FeatureMatrix& a, Eigen::Index i, const FeatureMatrix& b, Eigen::Index j) {
    return (a.row(i) - b.row(j)).squaredNorm();
}

/// k-means++ seeding: first center uniform, the rest proportional to squared
/// distance from the nearest chosen center.
inline FeatureMatrix kmeanspp(const FeatureMatrix& x, int k, Rng& rng) {
    const Eigen::Index m = x.rows();
    FeatureMatrix centers(k, x.cols());
    centers.row(0) = x.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(m))));
    std::vector<double> d2(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) d2[static_cast<std::size_t>(i)] = sq_dist(x, i, centers, 0);
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (double v : d2) total += v;
        Eigen::Index pick = 0;
        if (total <= 0.0) {
            pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(m)));
        } else {
            double r = rng.uniform() * total;
            for (Eigen::Index i = 0; i < m; ++i) {
                r -= d2[static_cast<std::size_t>(i)];
                pick = i;
                if (r < 0.0) break;
            }
        }
        centers.row(c) = x.row(pick);
        for (Eigen::Index i = 0; i < m; ++i)
            d2[static_cast<std::size_t>(i)] = std::min(d2[static_cast<std::size_t>(i)], sq_dist(x, i, centers, c));
    }
    return centers;
}

/// Per-sample, per-component log(w_j N(x | mu_j, diag var_j)).
inline FeatureMatrix component_log_density(const MixtureModel& model, const FeatureMatrix& x) {
    const Eigen::Index m = x.rows(), dim = x.cols();
    FeatureMatrix out(m, model.k);
    for (int j = 0; j < model.k; ++j) {
        double log_norm = std::log(model.weights(j));
        for (Eigen::Index d = 0; d < dim; ++d) log_norm -= 0.5 * std::log(2.0 * std::numbers::pi * model.variances(j, d));
        for (Eigen::Index i = 0; i < m; ++i) {
            double q = 0.0;
            for (Eigen::Index d = 0; d < dim; ++d) {
                const double diff = x(i, d) - model.means(j, d);
                q += diff * diff / model.variances(j, d);
            }
            out(i, j) = log_norm - 0.5 * q;
        }
    }
    return out;
}

/// E-step: fills responsibilities and returns the mean per-sample log-likelihood.
inline double e_step(const MixtureModel& model, const FeatureMatrix& x, FeatureMatrix& resp) {
    resp = component_log_density(model, x);
    double total = 0.0;
    for (Eigen::Index i = 0; i < resp.rows(); ++i) {
        const double mx = resp.row(i).maxCoeff();
        double s = 0.0;
        for (int j = 0; j < model.k; ++j) s += std::exp(resp(i, j) - mx);
        const double lse = mx + std::log(s);
        total += lse;
        for (int j = 0; j < model.k; ++j) resp(i, j) = std::exp(resp(i, j) - lse);
    }
    return total / static_cast<double>(x.rows());
}

inline Eigen::RowVectorXd global_variance(const FeatureMatrix& x, double floor) {
    const Eigen::RowVectorXd mean = x.colwise().mean();
    Eigen::RowVectorXd var = (x.rowwise() - mean).array().square().colwise().mean();
    return var.cwiseMax(floor);
}

/// M-step with the variance floor; re-seeds components whose weight collapses.
inline void m_step(MixtureModel& model, const FeatureMatrix& x, const FeatureMatrix& resp, const GmmOptions& opt) {
    const Eigen::Index m = x.rows();
    const Eigen::VectorXd nk = resp.colwise().sum().transpose();
    for (int j = 0; j < model.k; ++j) {
        if (nk(j) / static_cast<double>(m) < opt.degenerate_weight) {
            // Farthest point from its best-fitting component.
            const FeatureMatrix logd = component_log_density(model, x);
            Eigen::Index far = 0;
            double worst = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < m; ++i) {
                const double best = logd.row(i).maxCoeff();
                if (best < worst) {
                    worst = best;
                    far = i;
                }
            }
            model.means.row(j) = x.row(far);
            model.variances.row(j) = global_variance(x, opt.variance_floor);
            model.weights(j) = 1.0 / static_cast<double>(m);
            ++model.reseeds;
            continue;
        }
        model.weights(j) = nk(j) / static_cast<double>(m);
        Eigen::RowVectorXd mean = (resp.col(j).transpose() * x) / nk(j);
        Eigen::RowVectorXd var = Eigen::RowVectorXd::Zero(x.cols());
        for (Eigen::Index i = 0; i < m; ++i) var += resp(i, j) * (x.row(i) - mean).array().square().matrix();
        var /= nk(j);
        model.means.row(j) = mean;
        model.variances.row(j) = var.cwiseMax(opt.variance_floor);
    }
    model.weights /= model.weights.sum();
}

inline MixtureModel fit_once(const FeatureMatrix& x, int k, Rng& rng, const GmmOptions& opt) {
    const Eigen::Index m = x.rows(), dim = x.cols();
    MixtureModel model;
    model.k = k;
    const FeatureMatrix centers = kmeanspp(x, k, rng);

    // Hard assignment to the nearest seed gives the initial parameters.
    FeatureMatrix resp = FeatureMatrix::Zero(m, k);
    for (Eigen::Index i = 0; i < m; ++i) {
        int best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (int j = 0; j < k; ++j) {
            const double d = sq_dist(x, i, centers, j);
            if (d < bd) {
                bd = d;
                best = j;
            }
        }
        resp(i, best) = 1.0;
    }
    model.weights = Eigen::VectorXd::Constant(k, 1.0 / k);
    model.means = centers;
    model.variances = FeatureMatrix(k, dim);
    for (int j = 0; j < k; ++j) model.variances.row(j) = global_variance(x, opt.variance_floor);
    m_step(model, x, resp, opt);

    model.reseeds = 0;
    double prev = -std::numeric_limits<double>::infinity();
    bool reseeded = false;
    for (int it = 0; it < opt.max_iterations; ++it) {
        const double ll = e_step(model, x, resp);
        model.log_likelihood_trace.push_back(ll);
        model.iterations = it + 1;
        model.final_log_likelihood = ll;
        if (it > 0 && !reseeded && ll - prev < opt.tolerance) break;
        prev = ll;
        if (it + 1 == opt.max_iterations) break;
        const int before = model.reseeds;
        m_step(model, x, resp, opt);
        reseeded = model.reseeds != before;
    }
    return model;
}

}  // namespace detail

/// EM fit of a k-component diagonal Gaussian mixture; the restart with the
/// highest final log-likelihood wins.
inline MixtureModel fit_gmm(const FeatureMatrix& features, int k, int restarts, std::uint64_t seed,
                            const GmmOptions& opt = {}) {
    if (k < 1) throw Error("fit_gmm: k must be >= 1");
    if (features.rows() < k)
        throw Error("fit_gmm: need at least k = " + std::to_string(k) + " samples, got " + std::to_string(features.rows()));
    if (restarts < 1) restarts = 1;
    MixtureModel best;
    for (int r = 0; r < restarts; ++r) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(r));
        MixtureModel m = detail::fit_once(features, k, rng, opt);
        if (r == 0 || m.final_log_likelihood > best.final_log_likelihood) best = std::move(m);
    }
    return best;
}

/// Posterior component probabilities, one row per sample.
inline FeatureMatrix gmm_responsibilities(const MixtureModel& model, const FeatureMatrix& features) {
    FeatureMatrix resp;
    detail::e_step(model, features, resp);
    return resp;
}

}  // namespace gda
