#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gda/core.hpp"
#include "gda/domain_estimator.hpp"
#include "gda/nn/checkpoint.hpp"
#include "gda/nn/layers.hpp"
#include "gda/nn/loss.hpp"
#include "gda/nn/optim.hpp"

namespace gda {

/// lambda = 2 / (1 + exp(-gamma p)) - 1.
inline double lambda_schedule(double progress, double gamma) {
    if (progress < 0.0 || progress > 1.0) throw Error("lambda_schedule: progress must be in [0, 1]");
    if (gamma <= 0.0) throw Error("lambda_schedule: gamma must be positive");
    return 2.0 / (1.0 + std::exp(-gamma * progress)) - 1.0;
}

/// Shannon entropy (natural log) of a probability vector.
inline double entropy(const std::vector<double>& probs) {
    double sum = 0.0;
    for (double p : probs) {
        if (p < 0.0 || !std::isfinite(p)) throw Error("entropy: probabilities must be finite and non-negative");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw Error("entropy: probabilities must sum to 1");
    double h = 0.0;
    for (double p : probs)
        if (p > 0.0) h -= p * std::log(p);
    return std::max(h, 0.0);
}

inline double median(std::vector<double> v) {
    if (v.empty()) throw Error("median of empty sequence");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

inline int argmax_lowest(const std::vector<double>& v) {
    return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

/// Entropy-threshold initialization for one mini-batch of known-class
/// probability rows: UNK (= row width) when H > median H of the batch,
/// otherwise the argmax.
inline std::vector<int> entropy_pseudo_labels(const std::vector<std::vector<double>>& known_probs) {
    if (known_probs.size() < 2) throw Error("pseudo-label initialization needs a batch of at least 2");
    std::vector<double> h;
    h.reserve(known_probs.size());
    for (const auto& p : known_probs) h.push_back(entropy(p));
    const double sigma = median(h);
    std::vector<int> labels;
    for (std::size_t i = 0; i < known_probs.size(); ++i)
        labels.push_back(h[i] > sigma ? static_cast<int>(known_probs[i].size()) : argmax_lowest(known_probs[i]));
    return labels;
}

/// KL(prior || mean prediction); zero mean entries are clamped at 1e-12.
inline double prior_regularizer(const std::vector<double>& mean_predicted, const std::vector<double>& prior) {
    if (mean_predicted.size() != prior.size()) throw Error("prior_regularizer: size mismatch");
    double l = 0.0;
    for (std::size_t j = 0; j < prior.size(); ++j) {
        if (prior[j] <= 0.0) throw Error("prior_regularizer: prior entries must be positive");
        l += prior[j] * std::log(prior[j] / std::max(mean_predicted[j], 1e-12));
    }
    return l;
}

// ---------------------------------------------------------------------------

/// Class classifier F = F_y o G_f with adversarial domain head F_d.
struct ClassifierSpec {
    int in_channels = 3;
    int input_size = 32;
    std::array<int, 4> conv_channels{64, 64, 128, 128};
    int fc_width = 100;
    double dropout = 0.5;
    double leaky_slope = 0.2;
    int num_known = 1;    // K; the class head has K + 1 outputs
    int num_domains = 1;

    int feature_dim() const {
        const int s = ((input_size - 1) / 2 + 1 - 1) / 2 + 1;
        return conv_channels[3] * s * s;
    }

    nlohmann::json to_json() const {
        return {{"in_channels", in_channels}, {"input_size", input_size}, {"conv_channels", conv_channels},
                {"fc_width", fc_width},       {"dropout", dropout},       {"leaky_slope", leaky_slope},
                {"num_known", num_known},     {"num_domains", num_domains}};
    }
    static ClassifierSpec from_json(const nlohmann::json& j) {
        ClassifierSpec s;
        s.in_channels = j.at("in_channels").get<int>();
        s.input_size = j.at("input_size").get<int>();
        s.conv_channels = j.at("conv_channels").get<std::array<int, 4>>();
        s.fc_width = j.at("fc_width").get<int>();
        s.dropout = j.at("dropout").get<double>();
        s.leaky_slope = j.at("leaky_slope").get<double>();
        s.num_known = j.at("num_known").get<int>();
        s.num_domains = j.at("num_domains").get<int>();
        return s;
    }
};

template <typename T>
class DannModel {
public:
    DannModel(const ClassifierSpec& spec, std::uint64_t seed) : spec_(spec), grl_(T(0)) {
        if (spec.num_known < 0) throw Error("classifier: num_known must be >= 0");
        if (spec.num_domains < 1) throw Error("classifier: num_domains must be >= 1");
        Rng rng(seed);
        const T slope = static_cast<T>(spec.leaky_slope);
        const auto& c = spec.conv_channels;
        features_.template emplace<nn::InstanceNorm<T>>();
        features_.template emplace<nn::Conv2d<T>>(spec.in_channels, c[0], 5, 1, 2, rng);
        features_.add(nn::leaky_relu<T>(slope));
        features_.template emplace<nn::BatchNorm<T>>(c[0]);
        features_.template emplace<nn::Conv2d<T>>(c[0], c[1], 5, 1, 2, rng);
        features_.add(nn::leaky_relu<T>(slope));
        features_.template emplace<nn::BatchNorm<T>>(c[1]);
        features_.template emplace<nn::Conv2d<T>>(c[1], c[2], 3, 2, 1, rng);
        features_.add(nn::leaky_relu<T>(slope));
        features_.template emplace<nn::BatchNorm<T>>(c[2]);
        features_.template emplace<nn::Conv2d<T>>(c[2], c[3], 3, 2, 1, rng);
        features_.add(nn::leaky_relu<T>(slope));
        features_.template emplace<nn::BatchNorm<T>>(c[3]);
        features_.template emplace<nn::Dropout<T>>(spec.dropout, rng.next());
        features_.template emplace<nn::Flatten<T>>();

        const int f = spec.feature_dim();
        const int w = spec.fc_width;
        class_head_.template emplace<nn::Linear<T>>(f, w, rng);
        class_head_.template emplace<nn::ReLU<T>>();
        class_head_.template emplace<nn::BatchNorm<T>>(w);
        class_head_.template emplace<nn::Linear<T>>(w, w, rng);
        class_head_.template emplace<nn::ReLU<T>>();
        class_head_.template emplace<nn::BatchNorm<T>>(w);
        class_head_.template emplace<nn::Linear<T>>(w, spec.num_known + 1, rng);

        domain_head_.template emplace<nn::Linear<T>>(f, w, rng);
        domain_head_.template emplace<nn::ReLU<T>>();
        domain_head_.template emplace<nn::BatchNorm<T>>(w);
        domain_head_.template emplace<nn::Dropout<T>>(spec.dropout, rng.next());
        domain_head_.template emplace<nn::Linear<T>>(w, w, rng);
        domain_head_.template emplace<nn::ReLU<T>>();
        domain_head_.template emplace<nn::BatchNorm<T>>(w);
        domain_head_.template emplace<nn::Dropout<T>>(spec.dropout, rng.next());
        domain_head_.template emplace<nn::Linear<T>>(w, spec.num_domains, rng);
    }

    struct Outputs {
        nn::Tensor<T> class_logits;
        nn::Tensor<T> domain_logits;  // empty when the domain head was skipped
    };

    Outputs forward(const nn::Tensor<T>& x, nn::Mode mode, bool with_domain = true) {
        const auto f = features_.forward(x, mode);
        Outputs out{class_head_.forward(f, mode), {}};
        if (with_domain) out.domain_logits = domain_head_.forward(grl_.forward(f, mode), mode);
        return out;
    }

    /// Backpropagates both heads; the domain branch passes through the GRL.
    void backward(const nn::Tensor<T>& class_grad, const nn::Tensor<T>* domain_grad) {
        auto gf = class_head_.backward(class_grad);
        if (domain_grad != nullptr) {
            const auto gd = grl_.backward(domain_head_.backward(*domain_grad));
            for (std::size_t i = 0; i < gf.size(); ++i) gf.data[i] += gd.data[i];
        }
        features_.backward(gf);
    }

    void set_lambda(T lambda) { grl_.set_lambda(lambda); }
    T lambda() const { return grl_.lambda(); }

    std::vector<nn::Param<T>*> params() {
        std::vector<nn::Param<T>*> out;
        features_.collect_params(out);
        class_head_.collect_params(out);
        domain_head_.collect_params(out);
        return out;
    }
    void collect_buffers(std::vector<std::vector<T>*>& out) {
        features_.collect_buffers(out);
        class_head_.collect_buffers(out);
        domain_head_.collect_buffers(out);
    }

    nn::Sequential<T>& features() { return features_; }
    nn::Sequential<T>& class_head() { return class_head_; }
    nn::Sequential<T>& domain_head() { return domain_head_; }
    const ClassifierSpec& spec() const { return spec_; }

private:
    ClassifierSpec spec_;
    nn::Sequential<T> features_;
    nn::Sequential<T> class_head_;
    nn::GradientReversal<T> grl_;
    nn::Sequential<T> domain_head_;
};

struct StepLosses {
    double loss_y = 0.0;
    double loss_d = 0.0;
    double loss_p = 0.0;
    int correct = 0;    // labeled samples whose argmax over the active columns hits the target
    int labeled = 0;
};

/// One forward/backward pass of the composite objective; accumulates gradients.
///
/// class_targets: index in [0, class_columns) or -1 for no class loss.
/// domain_targets: empty to skip the adversarial branch. The GRL must already
/// carry the desired lambda. prior: non-empty enables lp_weight * L_p over the
/// K + 1 outputs.
template <typename T>
StepLosses dann_step(DannModel<T>& model, const nn::Tensor<T>& x, const std::vector<int>& class_targets, int class_columns,
                     const std::vector<int>& domain_targets, const std::vector<double>& prior = {},
                     double lp_weight = 0.0, const std::vector<int>* labeled_mask = nullptr) {
    const bool adversarial = !domain_targets.empty();
    auto out = model.forward(x, nn::Mode::Train, adversarial);
    StepLosses losses;
    auto ly = nn::softmax_cross_entropy(out.class_logits, class_targets, class_columns);
    losses.loss_y = static_cast<double>(ly.loss);
    const auto probs = nn::softmax(out.class_logits, class_columns);
    for (int i = 0; i < x.n; ++i) {
        const int t = class_targets[static_cast<std::size_t>(i)];
        if (t < 0 || (labeled_mask != nullptr && (*labeled_mask)[static_cast<std::size_t>(i)] == 0)) continue;
        ++losses.labeled;
        const T* p = probs.sample(i);
        const int pred = static_cast<int>(std::max_element(p, p + class_columns) - p);
        losses.correct += pred == t ? 1 : 0;
    }

    if (!prior.empty() && lp_weight > 0.0) {
        const int m = static_cast<int>(out.class_logits.per_sample());
        if (static_cast<int>(prior.size()) != m) throw Error("dann_step: prior size must equal K + 1");
        const auto full = nn::softmax(out.class_logits);
        std::vector<double> mean(static_cast<std::size_t>(m), 0.0);
        for (int i = 0; i < x.n; ++i)
            for (int j = 0; j < m; ++j) mean[static_cast<std::size_t>(j)] += static_cast<double>(full.at(i, j)) / x.n;
        losses.loss_p = prior_regularizer(mean, prior);
        // dL/dmean_j = -prior_j / mean_j; chain through each row's softmax.
        std::vector<double> gmean(static_cast<std::size_t>(m));
        for (int j = 0; j < m; ++j)
            gmean[static_cast<std::size_t>(j)] = -prior[static_cast<std::size_t>(j)] / std::max(mean[static_cast<std::size_t>(j)], 1e-12);
        for (int i = 0; i < x.n; ++i) {
            double dot = 0.0;
            for (int j = 0; j < m; ++j) dot += gmean[static_cast<std::size_t>(j)] * static_cast<double>(full.at(i, j));
            for (int j = 0; j < m; ++j)
                ly.grad.at(i, j) += static_cast<T>(lp_weight * static_cast<double>(full.at(i, j)) *
                                                   (gmean[static_cast<std::size_t>(j)] - dot) / x.n);
        }
    }

    if (adversarial) {
        const auto ld = nn::softmax_cross_entropy(out.domain_logits, domain_targets);
        losses.loss_d = static_cast<double>(ld.loss);
        model.backward(ly.grad, &ld.grad);
    } else {
        model.backward(ly.grad, nullptr);
    }
    return losses;
}

// ---------------------------------------------------------------------------

struct TrainConfig {
    int epochs = 60;
    int batch_size = 64;
    double learning_rate = 0.01;
    double momentum = 0.9;
    double weight_decay = 5e-4;
    double gamma = 10.0;
    int pseudo_init_epoch = 20;
    int pseudo_update_epoch = 40;
    std::vector<double> prior;  // K + 1 entries; empty -> uniform
    double lp_weight = 1.0;
    bool refresh_every_epoch = true;
    bool adversarial = true;
    bool pseudo_labels = true;
    std::uint64_t seed = 0;

    void validate() const {
        if (epochs < 0) throw Error("train: epochs must be >= 0");
        if (batch_size < 2) throw Error("train: batch_size must be >= 2");
        if (learning_rate <= 0.0) throw Error("train: learning_rate must be positive");
        if (gamma <= 0.0) throw Error("train: gamma must be positive");
        if (lp_weight < 0.0) throw Error("train: lp_weight must be non-negative");
        if (pseudo_labels && !(pseudo_init_epoch < pseudo_update_epoch && pseudo_update_epoch <= epochs))
            throw Error("train: need pseudo_init_epoch < pseudo_update_epoch <= epochs");
    }
};

enum class PseudoProvenance { EntropyInit, ArgmaxUpdate };

/// Current pseudo-label per sample; nullopt for labeled samples.
struct PseudoLabelState {
    std::vector<std::optional<int>> label;
    std::vector<PseudoProvenance> provenance;
};

struct EpochLog {
    int epoch = 0;
    double loss_y = 0.0;
    double loss_d = 0.0;
    double loss_p = 0.0;
    double lambda = 0.0;
    double train_acc = 0.0;
};

struct Prediction {
    std::vector<double> probs;  // K + 1
    int label = 0;              // argmax, ties to the lowest index; K = UNK
};

/// Trained classifier plus the known-class index space it predicts into.
class DannClassifier {
public:
    DannClassifier(const ClassifierSpec& spec, KnownClasses known, std::uint64_t seed)
        : model_(std::make_unique<DannModel<float>>(spec, seed)), known_(std::move(known)) {
        if (known_.size() != spec.num_known) throw Error("classifier: known class count does not match spec");
    }

    DannModel<float>& model() { return *model_; }
    const ClassifierSpec& spec() const { return model_->spec(); }
    const KnownClasses& known() const { return known_; }

    /// Class probabilities over K + 1 outputs for a set of images (eval mode).
    std::vector<std::vector<double>> probabilities(const std::vector<const Image*>& images, int batch = 256) {
        std::vector<std::vector<double>> out;
        for (std::size_t start = 0; start < images.size(); start += static_cast<std::size_t>(batch)) {
            const std::size_t end = std::min(images.size(), start + static_cast<std::size_t>(batch));
            std::vector<Image> fitted;
            for (std::size_t i = start; i < end; ++i) fitted.push_back(fit(*images[i]));
            std::vector<const Image*> ptrs;
            for (const auto& im : fitted) ptrs.push_back(&im);
            const auto logits = model_->forward(nn::batch_from_images<float>(ptrs), nn::Mode::Eval, false).class_logits;
            const auto p = nn::softmax(logits);
            for (int i = 0; i < p.n; ++i) out.emplace_back(p.sample(i), p.sample(i) + p.per_sample());
        }
        return out;
    }

    std::vector<Prediction> predict(const std::vector<const Image*>& images) {
        std::vector<Prediction> out;
        for (auto& p : probabilities(images)) {
            const int label = argmax_lowest(p);
            out.push_back({std::move(p), label});
        }
        return out;
    }
    Prediction predict(const Image& image) { return predict(std::vector<const Image*>{&image}).front(); }

    Image fit(const Image& img) const {
        if (img.channels != spec().in_channels)
            throw Error("classifier expects " + std::to_string(spec().in_channels) + " channels, image has " +
                        std::to_string(img.channels));
        return resample_nearest(img, spec().input_size, spec().input_size);
    }

    void save(const std::string& path) const {
        nlohmann::json meta{{"kind", "classifier"}, {"spec", spec().to_json()}, {"known", known_.labels()}};
        nn::write_checkpoint(path, {meta.dump(), nn::export_state(*model_)});
    }
    static DannClassifier load(const std::string& path) {
        const auto ckpt = nn::read_checkpoint(path);
        const auto meta = nlohmann::json::parse(ckpt.metadata);
        if (meta.at("kind") != "classifier") throw Error(path + " is not a classifier checkpoint");
        DannClassifier c(ClassifierSpec::from_json(meta.at("spec")), KnownClasses(meta.at("known").get<std::vector<int>>()), 0);
        nn::import_state(*c.model_, ckpt.arrays);
        return c;
    }

private:
    std::unique_ptr<DannModel<float>> model_;
    KnownClasses known_;
};

/// Label rule used on unlabeled samples at initialization: softmax over the K
/// known outputs, then entropy_pseudo_labels per mini-batch.
inline std::vector<int> init_pseudo_labels(DannClassifier& clf, const std::vector<const Image*>& batch) {
    const int k = clf.spec().num_known;
    std::vector<std::vector<double>> known_probs;
    for (const auto& full : clf.probabilities(batch)) {
        std::vector<double> p(full.begin(), full.begin() + k);
        double s = 0.0;
        for (double v : p) s += v;
        for (double& v : p) v /= s;
        known_probs.push_back(std::move(p));
    }
    return entropy_pseudo_labels(known_probs);
}

struct TrainResult {
    DannClassifier classifier;
    std::vector<EpochLog> log;
    PseudoLabelState pseudo;
};

/// Splits [0, n) in order into chunks of `size`; a trailing chunk of one is
/// merged into its predecessor so that every chunk has at least two members.
inline std::vector<std::pair<std::size_t, std::size_t>> chunk_ranges(std::size_t n, std::size_t size) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t s = 0; s < n; s += size) out.emplace_back(s, std::min(n, s + size));
    if (out.size() > 1 && out.back().second - out.back().first < 2) {
        out[out.size() - 2].second = out.back().second;
        out.pop_back();
    }
    return out;
}

/// Domain-adversarial training with pseudo-labeled unknown/unlabeled samples.
///
/// domains: one estimated domain index per sample of `data`, in [0, #domains).
inline TrainResult train_dann(const BlindedView& data, const std::vector<int>& domains, const ClassifierSpec& spec,
                              const KnownClasses& known, const TrainConfig& cfg,
                              const std::function<void(const EpochLog&)>& on_epoch = {}) {
    cfg.validate();
    const std::size_t n = data.size();
    if (domains.size() != n) throw Error("train_dann: domain estimate covers " + std::to_string(domains.size()) +
                                         " samples, dataset has " + std::to_string(n));
    for (int d : domains)
        if (d < 0 || d >= spec.num_domains) throw Error("train_dann: domain index outside [0, num_domains)");
    if (spec.num_known != known.size()) throw Error("train_dann: spec.num_known must equal the known class count");

    const int k = known.size();
    std::vector<int> labeled_target(n, -1);
    std::vector<std::size_t> unlabeled;
    for (std::size_t i = 0; i < n; ++i) {
        if (data.class_visible(i)) labeled_target[i] = known.index_of(data.class_label(i));
        else unlabeled.push_back(i);
    }
    if (n - unlabeled.size() == 0) throw Error("train_dann: no labeled samples");
    if (k == 0) throw Error("train_dann: no known classes");

    std::vector<double> prior = cfg.prior;
    if (prior.empty()) prior.assign(static_cast<std::size_t>(k + 1), 1.0 / (k + 1));
    if (static_cast<int>(prior.size()) != k + 1) throw Error("train_dann: prior must have K + 1 entries");

    TrainResult result{DannClassifier(spec, known, mix64(cfg.seed ^ 0xc1a55ULL)), {}, {}};
    result.pseudo.label.assign(n, std::nullopt);
    result.pseudo.provenance.assign(n, PseudoProvenance::EntropyInit);
    auto& model = result.classifier.model();

    std::vector<Image> images;
    images.reserve(n);
    for (std::size_t i = 0; i < n; ++i) images.push_back(result.classifier.fit(data.image(i)));

    nn::Sgd<float> opt(model.params(), cfg.learning_rate, cfg.momentum, cfg.weight_decay);
    const auto batch = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), n);
    const auto ranges_per_epoch = chunk_ranges(n, batch);
    const double total_steps = static_cast<double>(cfg.epochs) * static_cast<double>(ranges_per_epoch.size());
    double step = 0.0;

    auto refresh_unlabeled = [&](bool initial) {
        for (const auto& [s, e] : chunk_ranges(unlabeled.size(), batch)) {
            std::vector<const Image*> ptrs;
            for (std::size_t j = s; j < e; ++j) ptrs.push_back(&images[unlabeled[j]]);
            std::vector<int> labels;
            if (initial) {
                if (ptrs.size() < 2) labels.push_back(k);  // lone unlabeled sample: no median, start as UNK
                else labels = init_pseudo_labels(result.classifier, ptrs);
            } else {
                for (const auto& p : result.classifier.predict(ptrs)) labels.push_back(p.label);
            }
            for (std::size_t j = s; j < e; ++j) {
                result.pseudo.label[unlabeled[j]] = labels[j - s];
                result.pseudo.provenance[unlabeled[j]] = initial ? PseudoProvenance::EntropyInit : PseudoProvenance::ArgmaxUpdate;
            }
        }
    };

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Without unlabeled samples phase 2 has nothing to add, so the UNK
        // column stays out of the class loss.
        const bool phase2 = cfg.pseudo_labels && epoch >= cfg.pseudo_init_epoch && !unlabeled.empty();
        if (phase2) {
            if (epoch == cfg.pseudo_init_epoch) refresh_unlabeled(true);
            else if (epoch == cfg.pseudo_update_epoch || (cfg.refresh_every_epoch && epoch > cfg.pseudo_update_epoch))
                refresh_unlabeled(false);
        }

        Rng order_rng = Rng::stream(cfg.seed, 0x0de7ULL, static_cast<std::uint64_t>(epoch));
        const auto order = order_rng.permutation(static_cast<int>(n));
        EpochLog log{epoch, 0.0, 0.0, 0.0, 0.0, 0.0};
        int correct = 0, labeled = 0;
        for (const auto& [s, e] : ranges_per_epoch) {
            std::vector<const Image*> ptrs;
            std::vector<int> class_t, dom_t, mask;
            for (std::size_t b = s; b < e; ++b) {
                const auto idx = static_cast<std::size_t>(order[b]);
                ptrs.push_back(&images[idx]);
                int t = labeled_target[idx];
                mask.push_back(t >= 0 ? 1 : 0);
                if (t < 0 && phase2 && result.pseudo.label[idx]) t = *result.pseudo.label[idx];
                class_t.push_back(t);
                dom_t.push_back(domains[idx]);
            }
            const double lambda = cfg.adversarial ? lambda_schedule(std::min(1.0, step / std::max(1.0, total_steps)), cfg.gamma) : 0.0;
            model.set_lambda(static_cast<float>(lambda));
            opt.zero_grad();
            const auto x = nn::batch_from_images<float>(ptrs);
            const auto losses = dann_step(model, x, class_t, phase2 ? k + 1 : k,
                                          cfg.adversarial ? dom_t : std::vector<int>{}, phase2 ? prior : std::vector<double>{},
                                          cfg.lp_weight, &mask);
            opt.step();
            step += 1.0;
            log.loss_y += losses.loss_y;
            log.loss_d += losses.loss_d;
            log.loss_p += losses.loss_p;
            log.lambda = lambda;
            correct += losses.correct;
            labeled += losses.labeled;
        }
        const auto steps = static_cast<double>(ranges_per_epoch.size());
        log.loss_y /= steps;
        log.loss_d /= steps;
        log.loss_p /= steps;
        log.train_acc = labeled > 0 ? static_cast<double>(correct) / labeled : 0.0;
        result.log.push_back(log);
        if (on_epoch) on_epoch(log);
    }
    return result;
}

// ---------------------------------------------------------------------------

/// Labeled-only classifier with entropy-threshold rejection of unknowns.
struct LabeledOnlyBaseline {
    DannClassifier classifier;
    double threshold = 0.0;  // entropy above this -> UNK

    /// Known-class probabilities renormalized, entropy rule, K for UNK.
    std::vector<int> predict(const std::vector<const Image*>& images) {
        const int k = classifier.spec().num_known;
        std::vector<int> out;
        for (const auto& full : classifier.probabilities(images)) {
            std::vector<double> p(full.begin(), full.begin() + k);
            double s = 0.0;
            for (double v : p) s += v;
            for (double& v : p) v /= s;
            out.push_back(entropy(p) > threshold ? k : argmax_lowest(p));
        }
        return out;
    }
};

/// Trains on the labeled samples only (no domain head, no pseudo-labels). The
/// rejection threshold is the median known-class entropy over the unlabeled
/// training samples.
inline LabeledOnlyBaseline train_labeled_only(const BlindedView& data, const ClassifierSpec& spec, const KnownClasses& known,
                                              TrainConfig cfg) {
    GdaDataset labeled;
    std::vector<const Image*> unlabeled;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.class_visible(i)) {
            Sample s;
            s.image = data.image(i);
            s.class_label = data.class_label(i);
            s.class_visible = true;
            s.domain_visible = false;
            labeled.push_back(std::move(s));
        } else {
            unlabeled.push_back(&data.image(i));
        }
    }
    cfg.adversarial = false;
    cfg.pseudo_labels = false;
    cfg.lp_weight = 0.0;
    ClassifierSpec s = spec;
    s.num_domains = 1;
    const BlindedView view(labeled);
    auto res = train_dann(view, std::vector<int>(labeled.size(), 0), s, known, cfg);
    LabeledOnlyBaseline base{std::move(res.classifier), 0.0};
    if (!unlabeled.empty()) {
        const int k = known.size();
        std::vector<double> h;
        for (const auto& full : base.classifier.probabilities(unlabeled)) {
            std::vector<double> p(full.begin(), full.begin() + k);
            double sum = 0.0;
            for (double v : p) sum += v;
            for (double& v : p) v /= sum;
            h.push_back(entropy(p));
        }
        base.threshold = median(h);
    }
    return base;
}

}  // namespace gda
