#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "gda/clustering_metrics.hpp"
#include "gda/core.hpp"
#include "gda/destructor.hpp"
#include "gda/gmm.hpp"
#include "gda/nn/checkpoint.hpp"
#include "gda/nn/layers.hpp"
#include "gda/nn/optim.hpp"
#include "gda/nt_xent.hpp"

namespace gda {

/// Contrastive feature extractor:
///   conv3x3(c0)+ReLU+BN, conv3x3(c1)+ReLU+BN, maxpool2,
///   conv3x3(c2)+ReLU+BN, conv3x3(c3)+ReLU+BN, maxpool2,
///   global average pool, fc(hidden)+ReLU+BN, fc(embedding).
struct EncoderSpec {
    int in_channels = 3;
    int input_size = 32;
    std::array<int, 4> conv_channels{16, 32, 64, 64};
    int hidden = 64;
    int embedding = 64;

    template <typename T>
    std::unique_ptr<nn::Sequential<T>> build(std::uint64_t seed) const {
        Rng rng(seed);
        auto net = std::make_unique<nn::Sequential<T>>();
        int in = in_channels;
        for (int i = 0; i < 4; ++i) {
            const int out = conv_channels[static_cast<std::size_t>(i)];
            net->template emplace<nn::Conv2d<T>>(in, out, 3, 1, 1, rng);
            net->template emplace<nn::ReLU<T>>();
            net->template emplace<nn::BatchNorm<T>>(out);
            if (i % 2 == 1) net->template emplace<nn::MaxPool2<T>>();
            in = out;
        }
        net->template emplace<nn::GlobalAvgPool<T>>();
        net->template emplace<nn::Linear<T>>(in, hidden, rng);
        net->template emplace<nn::ReLU<T>>();
        net->template emplace<nn::BatchNorm<T>>(hidden);
        net->template emplace<nn::Linear<T>>(hidden, embedding, rng);
        return net;
    }

    nlohmann::json to_json() const {
        return {{"in_channels", in_channels}, {"input_size", input_size}, {"conv_channels", conv_channels},
                {"hidden", hidden}, {"embedding", embedding}};
    }
    static EncoderSpec from_json(const nlohmann::json& j) {
        EncoderSpec s;
        s.in_channels = j.at("in_channels").get<int>();
        s.input_size = j.at("input_size").get<int>();
        s.conv_channels = j.at("conv_channels").get<std::array<int, 4>>();
        s.hidden = j.at("hidden").get<int>();
        s.embedding = j.at("embedding").get<int>();
        return s;
    }
};

struct SslConfig {
    double temperature = 0.5;
    int batch_size = 128;
    int epochs = 12;
    double learning_rate = 1e-3;
    GridSpec grid{3};
    AugmentConfig augment{};
    std::uint64_t seed = 0;

    void validate() const {
        if (temperature <= 0.0) throw Error("ssl: temperature must be positive");
        if (batch_size < 2) throw Error("ssl: batch_size must be >= 2");
        if (epochs < 0) throw Error("ssl: epochs must be >= 0");
        if (learning_rate <= 0.0) throw Error("ssl: learning_rate must be positive");
        augment.validate();
    }
};

/// A trained (or freshly initialized) encoder together with its spec.
struct Encoder {
    EncoderSpec spec;
    std::unique_ptr<nn::Sequential<float>> net;

    Encoder(EncoderSpec s, std::uint64_t seed) : spec(s), net(s.build<float>(seed)) {}

    std::vector<std::vector<float>> state() const { return nn::export_state(*net); }

    void save(const std::string& path) const {
        nlohmann::json meta{{"kind", "encoder"}, {"spec", spec.to_json()}};
        nn::write_checkpoint(path, {meta.dump(), state()});
    }
    static Encoder load(const std::string& path) {
        const auto ckpt = nn::read_checkpoint(path);
        const auto meta = nlohmann::json::parse(ckpt.metadata);
        if (meta.at("kind") != "encoder") throw Error(path + " is not an encoder checkpoint");
        Encoder enc(EncoderSpec::from_json(meta.at("spec")), 0);
        nn::import_state(*enc.net, ckpt.arrays);
        return enc;
    }
};

struct SslResult {
    Encoder encoder;
    std::vector<double> epoch_losses;
};

namespace detail {

inline Image fit_to_input(const Image& img, const EncoderSpec& spec) {
    if (img.channels != spec.in_channels)
        throw Error("encoder expects " + std::to_string(spec.in_channels) + " channels, image has " + std::to_string(img.channels));
    return resample_nearest(img, spec.input_size, spec.input_size);
}

}  // namespace detail

using EpochCallback = std::function<void(int epoch, double mean_loss)>;

/// Self-supervised training on class-destroyed views. Reads images only.
inline SslResult train_ssl(const BlindedView& data, const EncoderSpec& spec, const SslConfig& cfg,
                           const EpochCallback& on_epoch = {}) {
    cfg.validate();
    SslResult result{Encoder(spec, mix64(cfg.seed ^ 0x55aaULL)), {}};
    if (cfg.epochs == 0 || data.size() < 2) return result;

    std::vector<Image> images;
    images.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) images.push_back(detail::fit_to_input(data.image(i), spec));

    auto& net = *result.encoder.net;
    nn::Adam<float> opt(net.params(), cfg.learning_rate);
    const auto n = static_cast<int>(images.size());
    const int batch = std::min(cfg.batch_size, n);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng order_rng = Rng::stream(cfg.seed, 0x0de7ULL, static_cast<std::uint64_t>(epoch));
        const auto order = order_rng.permutation(n);
        double loss_sum = 0.0;
        int steps = 0;
        for (int start = 0; start + 2 <= n; start += batch) {
            const int end = std::min(n, start + batch);
            if (end - start < 2) break;
            std::vector<Image> views;
            views.reserve(static_cast<std::size_t>(2 * (end - start)));
            for (int b = start; b < end; ++b) {
                const int idx = order[static_cast<std::size_t>(b)];
                Rng vr = Rng::stream(cfg.seed, static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(idx));
                auto [va, vb] = make_views(images[static_cast<std::size_t>(idx)], cfg.grid, cfg.augment, vr);
                views.push_back(std::move(va));
                views.push_back(std::move(vb));
            }
            std::vector<const Image*> ptrs;
            for (const auto& v : views) ptrs.push_back(&v);
            const auto x = nn::batch_from_images<float>(ptrs);
            opt.zero_grad();
            const auto z = net.forward(x, nn::Mode::Train);
            const auto lg = nt_xent(z, cfg.temperature);
            net.backward(lg.grad);
            opt.step();
            loss_sum += static_cast<double>(lg.loss);
            ++steps;
        }
        const double mean = steps > 0 ? loss_sum / steps : 0.0;
        result.epoch_losses.push_back(mean);
        if (on_epoch) on_epoch(epoch, mean);
    }
    return result;
}

/// Clean (unshuffled, unaugmented) eval-mode embeddings, L2-normalized.
inline FeatureMatrix extract_features(Encoder& encoder, const BlindedView& data, int batch = 256) {
    const auto n = static_cast<Eigen::Index>(data.size());
    FeatureMatrix f(n, encoder.spec.embedding);
    for (Eigen::Index start = 0; start < n; start += batch) {
        const Eigen::Index end = std::min<Eigen::Index>(n, start + batch);
        std::vector<Image> imgs;
        for (Eigen::Index i = start; i < end; ++i) imgs.push_back(detail::fit_to_input(data.image(static_cast<std::size_t>(i)), encoder.spec));
        std::vector<const Image*> ptrs;
        for (const auto& im : imgs) ptrs.push_back(&im);
        const auto z = encoder.net->forward(nn::batch_from_images<float>(ptrs), nn::Mode::Eval);
        for (Eigen::Index i = start; i < end; ++i) {
            const float* row = z.sample(static_cast<int>(i - start));
            double norm = 0.0;
            for (int d = 0; d < encoder.spec.embedding; ++d) norm += static_cast<double>(row[d]) * row[d];
            norm = std::sqrt(std::max(norm, 1e-24));
            for (int d = 0; d < encoder.spec.embedding; ++d) f(i, d) = row[d] / norm;
        }
    }
    return f;
}

struct DomainEstimate {
    std::vector<int> assignments;
    FeatureMatrix responsibilities;
    MixtureModel model;
};

inline DomainEstimate estimate_from_features(const FeatureMatrix& features, int k, int restarts, std::uint64_t seed) {
    DomainEstimate est;
    est.model = fit_gmm(features, k, restarts, seed);
    est.responsibilities = gmm_responsibilities(est.model, features);
    est.assignments.resize(static_cast<std::size_t>(features.rows()));
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        Eigen::Index arg = 0;
        est.responsibilities.row(i).maxCoeff(&arg);
        est.assignments[static_cast<std::size_t>(i)] = static_cast<int>(arg);
    }
    return est;
}

/// Clusters clean-pass features into k anonymous domains.
inline DomainEstimate estimate_domains(const BlindedView& data, Encoder& encoder, int k, int restarts = 5,
                                       std::uint64_t seed = 0) {
    return estimate_from_features(extract_features(encoder, data), k, restarts, seed);
}

struct NmiRow {
    int g = 1;
    double nmi_domain = 0.0;
    double nmi_class = 0.0;
};

/// For each grid setting: trains an encoder, clusters its features into
/// #domains clusters (scored against domain labels) and into #classes
/// clusters (scored against class labels).
inline std::vector<NmiRow> nmi_curve(const GdaDataset& dataset, const std::vector<GridSpec>& grids, const EncoderSpec& spec,
                                     SslConfig cfg, int restarts = 5, const EpochCallback& on_epoch = {}) {
    const LabelSets sets = compute_label_sets(dataset);
    const int k_domain = static_cast<int>(sets.per_domain.size());
    const int k_class = static_cast<int>(sets.all_classes.size());
    std::vector<int> domains, classes;
    for (const auto& s : dataset) {
        domains.push_back(s.domain_label);
        classes.push_back(s.class_label);
    }
    std::vector<NmiRow> rows;
    const BlindedView view(dataset);
    for (const GridSpec g : grids) {
        cfg.grid = g;
        auto res = train_ssl(view, spec, cfg, on_epoch);
        const auto features = extract_features(res.encoder, view);
        const auto dom = estimate_from_features(features, k_domain, restarts, cfg.seed);
        const auto cls = estimate_from_features(features, k_class, restarts, cfg.seed);
        rows.push_back({g.g, nmi(dom.assignments, domains), nmi(cls.assignments, classes)});
    }
    return rows;
}

}  // namespace gda
