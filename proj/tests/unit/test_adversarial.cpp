#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "gda/adversarial.hpp"
#include "gda/synthgen.hpp"
#include "test_util.hpp"

using namespace gda;
using gda::test::rel_err;

TEST(LambdaSchedule, Examples) {
    EXPECT_EQ(lambda_schedule(0.0, 10.0), 0.0);
    EXPECT_EQ(lambda_schedule(0.0, 0.1), 0.0);
    EXPECT_NEAR(lambda_schedule(1.0, 10.0), 0.999909, 1e-6);
    EXPECT_NEAR(lambda_schedule(0.5, 1000.0), 1.0, 1e-12);
    EXPECT_THROW(lambda_schedule(1.5, 10.0), Error);
    EXPECT_THROW(lambda_schedule(0.5, 0.0), Error);
}

TEST(LambdaScheduleProperty, MonotoneInProgress) {
    Rng rng(1);
    for (int t = 0; t < 1000; ++t) {
        const double g = rng.uniform(0.01, 50.0);
        double a = rng.uniform(), b = rng.uniform();
        if (a > b) std::swap(a, b);
        EXPECT_LE(lambda_schedule(a, g), lambda_schedule(b, g));
    }
}

TEST(Entropy, Examples) {
    EXPECT_NEAR(entropy({0.25, 0.25, 0.25, 0.25}), std::log(4.0), 1e-12);
    EXPECT_EQ(entropy({0, 1, 0}), 0.0);
    EXPECT_NEAR(entropy({0.5, 0.5, 0, 0}), std::log(2.0), 1e-12);
    EXPECT_THROW(entropy({0.5, 0.6}), Error);
    EXPECT_THROW(entropy({1.2, -0.2}), Error);
}

TEST(PseudoLabels, EntropyMedianRule) {
    const auto labels = entropy_pseudo_labels({{0.97, 0.01, 0.01, 0.01}, {0.4, 0.3, 0.2, 0.1}, {0.25, 0.25, 0.25, 0.25}});
    EXPECT_EQ(labels, (std::vector<int>{0, 0, 4}));
    EXPECT_EQ(entropy_pseudo_labels({{0.2, 0.8}, {0.2, 0.8}, {0.2, 0.8}}), (std::vector<int>{1, 1, 1}));
    EXPECT_EQ(entropy_pseudo_labels({{0.5, 0.5}, {0.5, 0.5}, {0.0, 1.0}}), (std::vector<int>{0, 0, 1}));
    EXPECT_THROW(entropy_pseudo_labels({{1.0, 0.0}}), Error);
}

TEST(PseudoLabelsProperty, StrictlyFewerThanBatchBecomeUnknown) {
    Rng rng(2);
    for (int t = 0; t < 200; ++t) {
        const int b = 2 + static_cast<int>(rng.below(30)), k = 2 + static_cast<int>(rng.below(5));
        std::vector<std::vector<double>> rows;
        for (int i = 0; i < b; ++i) {
            std::vector<double> p(static_cast<std::size_t>(k));
            double s = 0.0;
            for (auto& v : p) s += (v = rng.uniform() + 1e-3);
            for (auto& v : p) v /= s;
            rows.push_back(p);
        }
        int unk = 0;
        for (int l : entropy_pseudo_labels(rows)) unk += l == k ? 1 : 0;
        EXPECT_LT(unk, b);
        EXPECT_LE(unk, b / 2);
    }
}

TEST(PriorRegularizer, Examples) {
    EXPECT_EQ(prior_regularizer({0.2, 0.3, 0.5}, {0.2, 0.3, 0.5}), 0.0);
    EXPECT_NEAR(prior_regularizer({0.9, 0.1}, {0.5, 0.5}), 0.5108, 1e-4);
    EXPECT_DOUBLE_EQ(prior_regularizer({0.9, 0.1}, {0.5, 0.5}), prior_regularizer({0.1, 0.9}, {0.5, 0.5}));
    EXPECT_TRUE(std::isfinite(prior_regularizer({1.0, 0.0}, {0.5, 0.5})));
    EXPECT_THROW(prior_regularizer({0.5, 0.5}, {1.0}), Error);
}

// ---------------------------------------------------------------------------

namespace {

ClassifierSpec tiny_spec(int known, int domains, double dropout = 0.0) {
    ClassifierSpec s;
    s.in_channels = 1;
    s.input_size = 8;
    s.conv_channels = {2, 2, 3, 3};
    s.fc_width = 4;
    s.dropout = dropout;
    s.num_known = known;
    s.num_domains = domains;
    return s;
}

struct Composite {
    double class_part;   // L_y + w * L_p
    double domain_part;  // L_d
};

Composite composite(DannModel<double>& m, const nn::Tensor<double>& x, const std::vector<int>& ct, int cols,
                    const std::vector<int>& dt, const std::vector<double>& prior, double w) {
    const auto out = m.forward(x, nn::Mode::Train, true);
    double ly = nn::softmax_cross_entropy(out.class_logits, ct, cols).loss;
    const auto p = nn::softmax(out.class_logits);
    std::vector<double> mean(prior.size(), 0.0);
    for (int i = 0; i < x.n; ++i)
        for (std::size_t j = 0; j < prior.size(); ++j) mean[j] += p.at(i, static_cast<int>(j)) / x.n;
    ly += w * prior_regularizer(mean, prior);
    return {ly, nn::softmax_cross_entropy(out.domain_logits, dt).loss};
}

}  // namespace

TEST(DannStep, CompositeGradientMatchesFiniteDifferences) {
    Rng rng(3);
    const double lambda = 0.6, w = 0.7;
    DannModel<double> model(tiny_spec(2, 2), 11);
    model.set_lambda(lambda);
    nn::Tensor<double> x(6, 1, 8, 8);
    for (auto& v : x.data) v = rng.uniform();
    const std::vector<int> ct{0, 1, 2, -1, 1, 2}, dt{0, 1, 0, 1, 1, 0};
    const std::vector<double> prior{0.3, 0.3, 0.4};

    nn::zero_grad(model.params());
    dann_step(model, x, ct, 3, dt, prior, w);

    auto check = [&](nn::Sequential<double>& part, bool domain_head) {
        const double h = 1e-6;
        for (auto* p : part.params()) {
            for (int t = 0; t < 4; ++t) {
                const auto i = static_cast<std::size_t>(rng.below(p->size()));
                const double orig = p->value[i];
                p->value[i] = orig + h;
                const auto up = composite(model, x, ct, 3, dt, prior, w);
                p->value[i] = orig - h;
                const auto dn = composite(model, x, ct, 3, dt, prior, w);
                p->value[i] = orig;
                const double fd = domain_head ? (up.domain_part - dn.domain_part) / (2 * h)
                                              : ((up.class_part - lambda * up.domain_part) - (dn.class_part - lambda * dn.domain_part)) / (2 * h);
                EXPECT_LT(rel_err(fd, p->grad[i], 1e-4), 1e-3);
            }
        }
    };
    check(model.features(), false);
    check(model.class_head(), false);
    check(model.domain_head(), true);
}

TEST(DannStep, ZeroLambdaLeavesFeaturesUnaffectedByDomainLoss) {
    Rng rng(4);
    DannModel<double> a(tiny_spec(2, 2), 5), b(tiny_spec(2, 2), 5);
    a.set_lambda(0.0);
    nn::Tensor<double> x(4, 1, 8, 8);
    for (auto& v : x.data) v = rng.uniform();
    const std::vector<int> ct{0, 1, 0, 1};
    nn::zero_grad(a.params());
    nn::zero_grad(b.params());
    dann_step(a, x, ct, 2, {0, 1, 1, 0});
    dann_step(b, x, ct, 2, {});
    auto fa = a.features().params(), fb = b.features().params();
    for (std::size_t k = 0; k < fa.size(); ++k) EXPECT_EQ(fa[k]->grad, fb[k]->grad);
}

TEST(Predict, TieBreaksLowAndUnkIsLastColumn) {
    EXPECT_EQ(argmax_lowest({0.1, 0.1, 0.8}), 2);
    EXPECT_EQ(argmax_lowest({0.5, 0.5, 0.0}), 0);
}

TEST(Predict, ProbabilitiesSumToOne) {
    Rng rng(5);
    DannClassifier clf(tiny_spec(3, 1), KnownClasses(std::set<int>{0, 1, 2}), 1);
    std::vector<Image> imgs;
    for (int i = 0; i < 5; ++i) imgs.push_back(gda::test::random_image(10, 10, 1, rng));
    std::vector<const Image*> ptrs;
    for (const auto& im : imgs) ptrs.push_back(&im);
    for (const auto& p : clf.predict(ptrs)) {
        ASSERT_EQ(p.probs.size(), 4u);
        double s = 0.0;
        for (double v : p.probs) s += v;
        EXPECT_NEAR(s, 1.0, 1e-5);
        EXPECT_EQ(p.label, argmax_lowest(p.probs));
    }
    Image rgb(8, 8, 3);
    EXPECT_THROW(clf.predict(rgb), Error);
}

TEST(TrainConfig, Validation) {
    TrainConfig c;
    c.epochs = 10;
    c.pseudo_init_epoch = 5;
    c.pseudo_update_epoch = 5;
    EXPECT_THROW(c.validate(), Error);
    c.pseudo_update_epoch = 11;
    EXPECT_THROW(c.validate(), Error);
    c.pseudo_update_epoch = 10;
    EXPECT_NO_THROW(c.validate());
}

TEST(ChunkRanges, TrailingSingletonMerges) {
    EXPECT_EQ(chunk_ranges(10, 4), (std::vector<std::pair<std::size_t, std::size_t>>{{0, 4}, {4, 8}, {8, 10}}));
    EXPECT_EQ(chunk_ranges(9, 4), (std::vector<std::pair<std::size_t, std::size_t>>{{0, 4}, {4, 9}}));
    EXPECT_EQ(chunk_ranges(1, 4), (std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}}));
}

// ---------------------------------------------------------------------------

namespace {

GdaDataset shapes(int per_cell, int domains, std::uint64_t seed) {
    SynthConfig sc;
    sc.samples_per_cell = per_cell;
    sc.num_domains = domains;
    sc.image_size = 16;
    sc.jitter = 1;
    sc.channels = 1;
    sc.seed = seed;
    return generate(sc);
}

ClassifierSpec small_spec(int known, int domains) {
    ClassifierSpec s;
    s.in_channels = 1;
    s.input_size = 16;
    s.conv_channels = {8, 8, 16, 16};
    s.fc_width = 32;
    s.num_known = known;
    s.num_domains = domains;
    return s;
}

}  // namespace

TEST(TrainDann, SupervisedSeparableSetReachesFullAccuracy) {
    const auto ds = shapes(50, 1, 1);  // 200 samples
    const BlindedView view(ds);
    TrainConfig cfg;
    cfg.epochs = 15;
    cfg.batch_size = 32;
    cfg.pseudo_init_epoch = 10;
    cfg.pseudo_update_epoch = 12;
    cfg.adversarial = false;
    cfg.seed = 3;
    const KnownClasses known(std::set<int>{0, 1, 2, 3});
    auto res = train_dann(view, std::vector<int>(ds.size(), 0), small_spec(4, 1), known, cfg);
    // The logged accuracy runs with dropout active; judge the eval-mode model.
    EXPECT_GT(res.log.back().train_acc, 0.95);
    std::vector<const Image*> ptrs;
    for (const auto& s : ds) ptrs.push_back(&s.image);
    const auto pred = res.classifier.predict(ptrs);
    for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_EQ(known.index_of(ds[i].class_label), pred[i].label);
    for (const auto& e : res.log) EXPECT_EQ(e.lambda, 0.0);
}

TEST(TrainDann, DeterministicAndPhaseTwoWithoutUnlabeledIsPhaseOneExtended) {
    const auto ds = shapes(6, 2, 2);
    const BlindedView view(ds);
    std::vector<int> dom;
    for (const auto& s : ds) dom.push_back(s.domain_label);
    const KnownClasses known(std::set<int>{0, 1, 2, 3});
    TrainConfig a;
    a.epochs = 5;
    a.batch_size = 16;
    a.pseudo_init_epoch = 2;
    a.pseudo_update_epoch = 3;
    a.lp_weight = 0.0;
    a.seed = 7;
    TrainConfig b = a;
    b.pseudo_labels = false;
    const auto ra = train_dann(view, dom, small_spec(4, 2), known, a);
    const auto rb = train_dann(view, dom, small_spec(4, 2), known, a);
    const auto rc = train_dann(view, dom, small_spec(4, 2), known, b);
    ASSERT_EQ(ra.log.size(), 5u);
    for (std::size_t e = 0; e < ra.log.size(); ++e) {
        EXPECT_EQ(ra.log[e].loss_y, rb.log[e].loss_y);
        EXPECT_EQ(ra.log[e].loss_d, rb.log[e].loss_d);
        EXPECT_EQ(ra.log[e].loss_y, rc.log[e].loss_y);
        EXPECT_EQ(ra.log[e].loss_d, rc.log[e].loss_d);
    }
}

TEST(TrainDann, PseudoLabelsOnlyForHiddenSamplesWithProvenance) {
    auto ds = shapes(6, 2, 3);
    for (auto& s : ds) s.class_visible = s.class_label < 2;
    const BlindedView view(ds);
    std::vector<int> dom;
    for (const auto& s : ds) dom.push_back(s.domain_label);
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.batch_size = 16;
    cfg.pseudo_init_epoch = 1;
    cfg.pseudo_update_epoch = 3;
    cfg.refresh_every_epoch = false;
    cfg.seed = 1;
    const KnownClasses known(std::set<int>{0, 1});
    const auto res = train_dann(view, dom, small_spec(2, 2), known, cfg);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        EXPECT_EQ(res.pseudo.label[i].has_value(), !ds[i].class_visible);
        if (res.pseudo.label[i]) {
            EXPECT_GE(*res.pseudo.label[i], 0);
            EXPECT_LE(*res.pseudo.label[i], 2);
            EXPECT_EQ(res.pseudo.provenance[i], PseudoProvenance::ArgmaxUpdate);
        }
    }
}

TEST(TrainDann, Errors) {
    auto ds = shapes(2, 1, 4);
    const KnownClasses known(std::set<int>{0, 1, 2, 3});
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.pseudo_labels = false;
    EXPECT_THROW(train_dann(BlindedView(ds), std::vector<int>(ds.size() - 1, 0), small_spec(4, 1), known, cfg), Error);
    for (auto& s : ds) s.class_visible = false;
    EXPECT_THROW(train_dann(BlindedView(ds), std::vector<int>(ds.size(), 0), small_spec(4, 1), known, cfg), Error);
}

TEST(DannClassifier, CheckpointRoundTrip) {
    const auto ds = shapes(2, 1, 5);
    DannClassifier clf(small_spec(4, 1), KnownClasses(std::set<int>{0, 1, 2, 3}), 9);
    const auto path = (std::filesystem::temp_directory_path() / "gda_classifier_test.ckpt").string();
    clf.save(path);
    auto back = DannClassifier::load(path);
    EXPECT_EQ(back.known().labels(), clf.known().labels());
    std::vector<const Image*> ptrs;
    for (const auto& s : ds) ptrs.push_back(&s.image);
    EXPECT_EQ(back.probabilities(ptrs), clf.probabilities(ptrs));
    std::filesystem::remove(path);
}

TEST(Baseline, LabeledOnlyThresholdIsMedianUnlabeledEntropy) {
    auto ds = shapes(4, 2, 6);
    for (auto& s : ds) s.class_visible = s.domain_label == 0 && s.class_label < 2;
    const BlindedView view(ds);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 16;
    cfg.pseudo_labels = false;
    auto base = train_labeled_only(view, small_spec(2, 2), KnownClasses(std::set<int>{0, 1}), cfg);
    std::vector<const Image*> unl;
    for (const auto& s : ds)
        if (!s.class_visible) unl.push_back(&s.image);
    const auto pred = base.predict(unl);
    int unk = 0;
    for (int p : pred) unk += p == 2 ? 1 : 0;
    EXPECT_LE(unk, static_cast<int>(unl.size()) / 2);
    EXPECT_GT(base.threshold, 0.0);
}
