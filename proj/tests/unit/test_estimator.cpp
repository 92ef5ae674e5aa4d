#include <gtest/gtest.h>

#include <cmath>

#include "gda/domain_estimator.hpp"
#include "gda/gmm.hpp"
#include "gda/nt_xent.hpp"
#include "gda/synthgen.hpp"
#include "test_util.hpp"

using namespace gda;
using gda::test::rel_err;

namespace {

nn::Tensor<double> rows(const std::vector<std::vector<double>>& r) {
    nn::Tensor<double> t(static_cast<int>(r.size()), static_cast<int>(r.front().size()));
    for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t k = 0; k < r[i].size(); ++k) t.at(static_cast<int>(i), static_cast<int>(k)) = r[i][k];
    return t;
}

nn::Tensor<double> random_embeddings(int pairs, int dim, Rng& rng) {
    nn::Tensor<double> t(2 * pairs, dim);
    for (auto& v : t.data) v = rng.normal();
    return t;
}

FeatureMatrix two_clouds(int per, int dim, double offset, double sigma, std::uint64_t seed, std::vector<int>* labels) {
    Rng rng(seed);
    FeatureMatrix x(2 * per, dim);
    for (int i = 0; i < 2 * per; ++i) {
        const double c = i < per ? offset : -offset;
        for (int d = 0; d < dim; ++d) x(i, d) = c + sigma * rng.normal();
        if (labels) labels->push_back(i < per ? 0 : 1);
    }
    return x;
}

}  // namespace

TEST(NtXent, AllEqualEmbeddingsGiveLnThree) {
    for (const double tau : {0.1, 0.5, 2.0}) {
        const auto z = rows({{1, 2}, {1, 2}, {1, 2}, {1, 2}});
        EXPECT_NEAR(nt_xent(z, tau).loss, std::log(3.0), 1e-12);
    }
}

TEST(NtXent, AntipodalPairsClosedForm) {
    const auto z = rows({{1, 0}, {1, 0}, {-1, 0}, {-1, 0}});
    const double closed = -std::log(std::exp(2.0) / (std::exp(2.0) + 2.0 * std::exp(-2.0)));
    EXPECT_NEAR(nt_xent(z, 0.5).loss, closed, 1e-12);
    EXPECT_NEAR(closed, 0.035976, 1e-6);
}

TEST(NtXent, GradientMatchesFiniteDifferences) {
    Rng rng(1);
    for (int batch = 0; batch < 20; ++batch) {
        auto z = random_embeddings(2 + static_cast<int>(rng.below(4)), 3 + static_cast<int>(rng.below(6)), rng);
        const double tau = rng.uniform(0.2, 1.0);
        const auto lg = nt_xent(z, tau);
        const double h = 1e-6;
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double orig = z.data[i];
            z.data[i] = orig + h;
            const double lp = nt_xent(z, tau).loss;
            z.data[i] = orig - h;
            const double lm = nt_xent(z, tau).loss;
            z.data[i] = orig;
            EXPECT_LT(rel_err((lp - lm) / (2 * h), lg.grad.data[i], 1e-5), 1e-4);
        }
    }
}

TEST(NtXentProperty, PairPermutationAndScaleInvariance) {
    Rng rng(2);
    for (int t = 0; t < 30; ++t) {
        const int pairs = 2 + static_cast<int>(rng.below(5));
        const auto z = random_embeddings(pairs, 4, rng);
        const double base = nt_xent(z, 0.5).loss;
        const auto perm = rng.permutation(pairs);
        auto permuted = z;
        for (int p = 0; p < pairs; ++p)
            for (int v = 0; v < 2; ++v)
                for (int d = 0; d < 4; ++d) permuted.at(2 * p + v, d) = z.at(2 * perm[static_cast<std::size_t>(p)] + v, d);
        EXPECT_NEAR(nt_xent(permuted, 0.5).loss, base, 1e-12);
        auto scaled = z;
        const int row = static_cast<int>(rng.below(static_cast<std::uint64_t>(2 * pairs)));
        const double s = rng.uniform(0.1, 10.0);
        for (int d = 0; d < 4; ++d) scaled.at(row, d) *= s;
        EXPECT_NEAR(nt_xent(scaled, 0.5).loss, base, 1e-12);
    }
}

TEST(NtXent, Errors) {
    EXPECT_THROW(nt_xent(rows({{1, 0}, {1, 0}}), 0.5), Error);
    EXPECT_THROW(nt_xent(rows({{1, 0}, {1, 0}, {0, 0}, {1, 1}}), 0.5), Error);
    EXPECT_THROW(nt_xent(rows({{1, 0}, {1, 0}, {0, 1}}), 0.5), Error);
    EXPECT_THROW(nt_xent(rows({{1, 0}, {1, 0}, {0, 1}, {0, 1}}), 0.0), Error);
}

// ---------------------------------------------------------------------------

TEST(Gmm, RecoversTwoSeparatedClouds) {
    std::vector<int> truth;
    const auto x = two_clouds(100, 64, 5.0, 0.5, 1, &truth);
    const auto est = estimate_from_features(x, 2, 5, 7);
    EXPECT_DOUBLE_EQ(matched_agreement(est.assignments, truth), 1.0);
}

TEST(GmmProperty, LogLikelihoodNonDecreasing) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        const int k = 2 + static_cast<int>(rng.below(4));
        const auto x = two_clouds(40, 8, rng.uniform(0.0, 2.0), 1.0, seed, nullptr);
        const auto m = fit_gmm(x, k, 1, seed);
        if (m.reseeds > 0) continue;
        for (std::size_t i = 1; i < m.log_likelihood_trace.size(); ++i)
            EXPECT_GE(m.log_likelihood_trace[i], m.log_likelihood_trace[i - 1] - 1e-10) << "seed " << seed << " iter " << i;
    }
}

TEST(Gmm, SingleComponentIsSampleMoments) {
    Rng rng(3);
    FeatureMatrix x(50, 4);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index d = 0; d < x.cols(); ++d) x(i, d) = rng.normal(static_cast<double>(d), 1.0 + static_cast<double>(d));
    const auto m = fit_gmm(x, 1, 3, 0);
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::RowVectorXd var = (x.rowwise() - mean).array().square().colwise().mean();
    for (Eigen::Index d = 0; d < 4; ++d) {
        EXPECT_NEAR(m.means(0, d), mean(d), 1e-10);
        EXPECT_NEAR(m.variances(0, d), var(d), 1e-10);
    }
    EXPECT_NEAR(m.weights(0), 1.0, 1e-12);
}

TEST(Gmm, DuplicatedDatasetGivesSameParameters) {
    const auto x = two_clouds(30, 4, 3.0, 1.0, 4, nullptr);
    FeatureMatrix xx(2 * x.rows(), x.cols());
    xx << x, x;
    const auto a = fit_gmm(x, 2, 3, 5);
    const auto b = fit_gmm(xx, 2, 3, 5);
    // Component order may differ; match by the first coordinate of the mean.
    const bool swap = (a.means(0, 0) < a.means(1, 0)) != (b.means(0, 0) < b.means(1, 0));
    for (int j = 0; j < 2; ++j) {
        const int jb = swap ? 1 - j : j;
        for (Eigen::Index d = 0; d < x.cols(); ++d) {
            EXPECT_NEAR(a.means(j, d), b.means(jb, d), 1e-6);
            EXPECT_NEAR(a.variances(j, d), b.variances(jb, d), 1e-6);
        }
    }
}

TEST(Gmm, TooFewSamplesThrows) {
    FeatureMatrix x(2, 3);
    x.setZero();
    EXPECT_THROW(fit_gmm(x, 3, 1, 0), Error);
    EXPECT_THROW(fit_gmm(x, 0, 1, 0), Error);
}

TEST(Gmm, IdenticalPointsStayFinite) {
    FeatureMatrix x = FeatureMatrix::Constant(10, 3, 0.5);
    const auto m = fit_gmm(x, 2, 2, 0);
    EXPECT_TRUE(std::isfinite(m.final_log_likelihood));
}

// ---------------------------------------------------------------------------

namespace {

GdaDataset small_shapes(int per_cell) {
    SynthConfig sc;
    sc.samples_per_cell = per_cell;
    sc.seed = 3;
    return generate(sc);
}

}  // namespace

TEST(Ssl, ShortRunLossDecreasesAndIsDeterministic) {
    const auto ds = small_shapes(8);  // 64 samples
    const BlindedView view(ds);
    SslConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 32;
    cfg.seed = 5;
    const auto a = train_ssl(view, EncoderSpec{}, cfg);
    ASSERT_EQ(a.epoch_losses.size(), 2u);
    for (double l : a.epoch_losses) EXPECT_TRUE(std::isfinite(l));
    EXPECT_LE(a.epoch_losses[1], a.epoch_losses[0]);
    const auto b = train_ssl(view, EncoderSpec{}, cfg);
    EXPECT_EQ(a.encoder.state(), b.encoder.state());
    EXPECT_EQ(view.label_reads(), 0u);
}

TEST(Ssl, ZeroEpochsKeepsInitialization) {
    const auto ds = small_shapes(2);
    SslConfig cfg;
    cfg.epochs = 0;
    cfg.seed = 9;
    const auto res = train_ssl(BlindedView(ds), EncoderSpec{}, cfg);
    const Encoder fresh(EncoderSpec{}, mix64(cfg.seed ^ 0x55aaULL));
    EXPECT_EQ(res.encoder.state(), fresh.state());
    EXPECT_TRUE(res.epoch_losses.empty());
}

TEST(DomainEstimate, SingleClusterAndOrderEquivariance) {
    const auto ds = small_shapes(6);
    Encoder enc(EncoderSpec{}, 1);
    const BlindedView view(ds);
    const auto one = estimate_domains(view, enc, 1);
    for (int a : one.assignments) EXPECT_EQ(a, 0);

    const auto features = extract_features(enc, view);
    EXPECT_EQ(features.cols(), 64);
    const auto base = estimate_from_features(features, 2, 3, 1);
    Rng rng(2);
    const auto perm = rng.permutation(static_cast<int>(features.rows()));
    FeatureMatrix shuffled(features.rows(), features.cols());
    for (Eigen::Index i = 0; i < features.rows(); ++i) shuffled.row(i) = features.row(perm[static_cast<std::size_t>(i)]);
    const auto moved = estimate_from_features(shuffled, 2, 3, 1);
    std::vector<int> back(base.assignments.size());
    for (std::size_t i = 0; i < perm.size(); ++i) back[static_cast<std::size_t>(perm[i])] = moved.assignments[i];
    EXPECT_DOUBLE_EQ(nmi(back, base.assignments), 1.0);
}

TEST(DomainEstimate, EncoderCheckpointRoundTrip) {
    const auto ds = small_shapes(2);
    Encoder enc(EncoderSpec{}, 4);
    const auto path = (std::filesystem::temp_directory_path() / "gda_encoder_test.ckpt").string();
    enc.save(path);
    auto back = Encoder::load(path);
    const BlindedView view(ds);
    EXPECT_EQ(extract_features(enc, view), extract_features(back, view));
    std::filesystem::remove(path);
}

TEST(NmiCurve, SingleGridGivesSingleRow) {
    const auto ds = small_shapes(4);
    SslConfig cfg;
    cfg.epochs = 1;
    cfg.batch_size = 16;
    const auto rows = nmi_curve(ds, {GridSpec{2}}, EncoderSpec{}, cfg, 1);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].g, 2);
    EXPECT_GE(rows[0].nmi_domain, 0.0);
    EXPECT_LE(rows[0].nmi_class, 1.0);
}
