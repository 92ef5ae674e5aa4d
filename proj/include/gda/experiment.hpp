#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gda/adversarial.hpp"
#include "gda/clustering_metrics.hpp"
#include "gda/core.hpp"
#include "gda/domain_estimator.hpp"
#include "gda/io.hpp"
#include "gda/metrics.hpp"
#include "gda/plots.hpp"
#include "gda/scenario.hpp"
#include "gda/synthgen.hpp"
#include "gda/toml.hpp"

namespace gda {

/// Error raised by a pipeline stage; the message is prefixed with the stage.
class StageError : public Error {
public:
    StageError(const std::string& stage, const std::string& what) : Error("[" + stage + "] " + what), stage_(stage) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

template <typename F>
auto run_stage(const std::string& stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::string manifest;  // empty -> generate from `synth`
    SynthConfig synth;
    bool synth_seed_set = false;

    std::string scenario_text = "d0(0-1), d1(2-3)";
    ScenarioSpec scenario;
    std::vector<std::string> domain_names;
    double test_fraction = 0.2;

    int clusters = 0;  // 0 -> number of domains present in the data
    int restarts = 5;
    EncoderSpec encoder;
    SslConfig ssl;

    ClassifierSpec classifier;
    TrainConfig trainer;
    bool uniform_prior = false;

    bool baseline = true;
    bool plots = true;
    bool write_data = true;

    /// Stage seed derived from the global seed.
    std::uint64_t stage_seed(std::uint64_t tag) const { return Rng::stream(seed, tag).next(); }
};

namespace detail {

/// Reads keys from one config table and rejects keys nobody asked for.
class Table {
public:
    Table(const nlohmann::json& root, const std::string& name) : name_(name) {
        if (root.contains(name)) {
            if (!root.at(name).is_object()) throw Error("config: [" + name + "] must be a table");
            j_ = root.at(name);
        } else {
            j_ = nlohmann::json::object();
        }
    }

    template <typename T>
    void read(const std::string& key, T& out) {
        used_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const std::exception& e) {
            throw Error("config: [" + name_ + "] " + key + ": " + e.what());
        }
    }
    bool has(const std::string& key) const { return j_.contains(key); }
    const nlohmann::json& raw(const std::string& key) {
        used_.insert(key);
        return j_.at(key);
    }
    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!used_.count(k) && !v.is_object()) throw Error("config: unknown key '" + k + "' in [" + name_ + "]");
    }
    Table sub(const std::string& key) {
        used_.insert(key);
        return Table(j_, key, name_ + "." + key);
    }

private:
    Table(const nlohmann::json& parent, const std::string& key, const std::string& full) : name_(full) {
        j_ = parent.contains(key) ? parent.at(key) : nlohmann::json::object();
    }
    nlohmann::json j_;
    std::string name_;
    std::set<std::string> used_;
};

}  // namespace detail

/// Maps a parsed config document onto ExperimentConfig; every default lives
/// in the structs above and in the bundled configs.
inline ExperimentConfig experiment_from_json(const nlohmann::json& root) {
    static const std::set<std::string> tables{"data", "synth", "scenario", "split", "estimator", "classifier", "trainer", "outputs"};
    ExperimentConfig cfg;
    for (const auto& [k, v] : root.items()) {
        if (k == "seed") continue;
        if (!tables.count(k)) throw Error("config: unknown top-level entry '" + k + "'");
    }
    if (root.contains("seed")) cfg.seed = root.at("seed").get<std::uint64_t>();

    detail::Table data(root, "data");
    data.read("manifest", cfg.manifest);
    data.finish();

    detail::Table synth(root, "synth");
    synth.read("num_classes", cfg.synth.num_classes);
    synth.read("num_domains", cfg.synth.num_domains);
    synth.read("samples_per_cell", cfg.synth.samples_per_cell);
    synth.read("image_size", cfg.synth.image_size);
    synth.read("channels", cfg.synth.channels);
    synth.read("jitter", cfg.synth.jitter);
    synth.read("glyph_area_fraction", cfg.synth.glyph_area_fraction);
    if (synth.has("seed")) {
        synth.read("seed", cfg.synth.seed);
        cfg.synth_seed_set = true;
    }
    if (synth.has("domain_styles")) {
        for (const auto& st : synth.raw("domain_styles")) {
            DomainStyle s;
            s.background_level = st.at("background_level").get<double>();
            s.foreground_level = st.at("foreground_level").get<double>();
            s.channel_gains = st.at("channel_gains").get<std::array<double, 3>>();
            if (st.contains("noise_sigma")) s.noise_sigma = st.at("noise_sigma").get<double>();
            cfg.synth.domain_styles.push_back(s);
        }
    }
    synth.finish();

    detail::Table sc(root, "scenario");
    sc.read("split", cfg.scenario_text);
    sc.read("domain_names", cfg.domain_names);
    sc.read("labeled_fraction", cfg.scenario.labeled_fraction);
    sc.read("hide_domain_labels", cfg.scenario.hide_domain_labels);
    sc.finish();
    {
        const double frac = cfg.scenario.labeled_fraction;
        const bool hide = cfg.scenario.hide_domain_labels;
        cfg.scenario = parse_scenario(cfg.scenario_text);
        cfg.scenario.labeled_fraction = frac;
        cfg.scenario.hide_domain_labels = hide;
        cfg.scenario.validate();
    }

    detail::Table split(root, "split");
    split.read("test_fraction", cfg.test_fraction);
    split.finish();

    detail::Table est(root, "estimator");
    est.read("clusters", cfg.clusters);
    est.read("restarts", cfg.restarts);
    {
        auto enc = est.sub("encoder");
        enc.read("input_size", cfg.encoder.input_size);
        enc.read("conv_channels", cfg.encoder.conv_channels);
        enc.read("hidden", cfg.encoder.hidden);
        enc.read("embedding", cfg.encoder.embedding);
        enc.finish();
        auto ssl = est.sub("ssl");
        ssl.read("temperature", cfg.ssl.temperature);
        ssl.read("batch_size", cfg.ssl.batch_size);
        ssl.read("epochs", cfg.ssl.epochs);
        ssl.read("learning_rate", cfg.ssl.learning_rate);
        ssl.read("grid", cfg.ssl.grid.g);
        ssl.finish();
        auto aug = est.sub("augment");
        std::array<double, 2> crop{cfg.ssl.augment.crop_scale_range.first, cfg.ssl.augment.crop_scale_range.second};
        std::array<double, 2> sigma{cfg.ssl.augment.blur_sigma_range.first, cfg.ssl.augment.blur_sigma_range.second};
        aug.read("crop_scale_range", crop);
        aug.read("grayscale_probability", cfg.ssl.augment.grayscale_probability);
        aug.read("blur_probability", cfg.ssl.augment.blur_probability);
        aug.read("blur_sigma_range", sigma);
        cfg.ssl.augment.crop_scale_range = {crop[0], crop[1]};
        cfg.ssl.augment.blur_sigma_range = {sigma[0], sigma[1]};
        if (aug.has("ops")) {
            cfg.ssl.augment.enabled_ops.clear();
            for (const auto& op : aug.raw("ops")) cfg.ssl.augment.enabled_ops.push_back(parse_augment_op(op.get<std::string>()));
        }
        aug.finish();
    }
    est.finish();
    if (cfg.clusters < 0) throw Error("config: [estimator] clusters must be >= 0");
    if (cfg.restarts < 1) throw Error("config: [estimator] restarts must be >= 1");

    detail::Table cls(root, "classifier");
    cls.read("input_size", cfg.classifier.input_size);
    cls.read("conv_channels", cfg.classifier.conv_channels);
    cls.read("fc_width", cfg.classifier.fc_width);
    cls.read("dropout", cfg.classifier.dropout);
    cls.read("leaky_slope", cfg.classifier.leaky_slope);
    cls.finish();

    detail::Table tr(root, "trainer");
    tr.read("epochs", cfg.trainer.epochs);
    tr.read("batch_size", cfg.trainer.batch_size);
    tr.read("learning_rate", cfg.trainer.learning_rate);
    tr.read("momentum", cfg.trainer.momentum);
    tr.read("weight_decay", cfg.trainer.weight_decay);
    tr.read("gamma", cfg.trainer.gamma);
    tr.read("pseudo_init_epoch", cfg.trainer.pseudo_init_epoch);
    tr.read("pseudo_update_epoch", cfg.trainer.pseudo_update_epoch);
    tr.read("lp_weight", cfg.trainer.lp_weight);
    tr.read("refresh_every_epoch", cfg.trainer.refresh_every_epoch);
    tr.read("adversarial", cfg.trainer.adversarial);
    if (tr.has("prior")) {
        const auto& p = tr.raw("prior");
        if (p.is_string()) {
            const auto s = p.get<std::string>();
            if (s == "uniform") cfg.uniform_prior = true;
            else if (s == "true") cfg.uniform_prior = false;
            else throw Error("config: [trainer] prior must be \"true\", \"uniform\" or a list of K+1 weights");
        } else {
            cfg.trainer.prior = p.get<std::vector<double>>();
        }
    }
    tr.finish();
    cfg.trainer.validate();

    detail::Table out(root, "outputs");
    out.read("baseline", cfg.baseline);
    out.read("plots", cfg.plots);
    out.read("write_data", cfg.write_data);
    out.finish();
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    return run_stage("config", [&] { return experiment_from_json(toml::parse_file(path)); });
}

/// Re-applies the global seed (e.g. after a --seed override).
inline void set_seed(ExperimentConfig& cfg, std::uint64_t seed) { cfg.seed = seed; }

// ---------------------------------------------------------------------------

struct RunResult {
    MetricsReport report;
    std::optional<MetricsReport> baseline;
    std::optional<double> domain_agreement;  // estimated vs true domains on the training split
    bool estimator_used = false;
    int known_classes = 0;
    int estimated_domains = 0;
    std::map<std::string, double> seconds;
};

/// Fraction of correct predictions under the best one-to-one relabeling.
inline double domain_agreement(const std::vector<int>& clusters, const std::vector<int>& truth) {
    return matched_agreement(clusters, truth);
}

inline void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write " + path.string());
    os << text;
}

inline std::string metrics_json_text(const MetricsReport& r) { return to_json(r).dump(2) + "\n"; }

/// Evaluates predicted indices against the oracle target of each sample.
inline MetricsReport evaluate_predictions(const GdaDataset& test, const KnownClasses& known, const std::vector<int>& predicted,
                                          std::optional<double> nmi_domain = std::nullopt) {
    if (predicted.size() != test.size()) throw Error("evaluate: prediction count mismatch");
    ConfusionMatrix cm(known.size());
    for (std::size_t i = 0; i < test.size(); ++i) {
        const int truth = known.contains(test[i].class_label) ? known.index_of(test[i].class_label) : known.unk_index();
        cm.add(truth, predicted[i]);
    }
    return make_report(cm, nmi_domain);
}

inline void write_train_log(const fs::path& path, const std::vector<EpochLog>& log) {
    std::ostringstream os;
    os << "epoch,loss_y,loss_d,loss_p,lambda,train_acc\n" << std::setprecision(8);
    for (const auto& e : log) os << e.epoch << ',' << e.loss_y << ',' << e.loss_d << ',' << e.loss_p << ',' << e.lambda << ',' << e.train_acc << '\n';
    write_text(path, os.str());
}

inline void write_ssl_log(const fs::path& path, const std::vector<double>& losses) {
    std::ostringstream os;
    os << "epoch,loss\n" << std::setprecision(8);
    for (std::size_t e = 0; e < losses.size(); ++e) os << e << ',' << losses[e] << '\n';
    write_text(path, os.str());
}

/// pca.csv: sample_index,pc1,pc2,domain,class
inline void write_pca_csv(const fs::path& path, const std::vector<std::array<double, 2>>& pts, const GdaDataset& data) {
    std::ostringstream os;
    os << "sample_index,pc1,pc2,domain,class\n" << std::setprecision(8);
    for (std::size_t i = 0; i < pts.size(); ++i)
        os << i << ',' << pts[i][0] << ',' << pts[i][1] << ',' << data[i].domain_label << ',' << data[i].class_label << '\n';
    write_text(path, os.str());
}

inline GdaDataset load_or_generate(const ExperimentConfig& cfg) {
    if (!cfg.manifest.empty()) return read_manifest(cfg.manifest).dataset;
    SynthConfig sc = cfg.synth;
    if (!cfg.synth_seed_set) sc.seed = cfg.seed;
    return generate(sc);
}

/// Domain labels compacted to 0..n-1 in ascending label order.
inline std::vector<int> compact_domains(const std::vector<int>& labels, int* count = nullptr) {
    std::map<int, int> ids;
    for (int d : labels) ids.emplace(d, 0);
    int next = 0;
    for (auto& [d, id] : ids) id = next++;
    if (count) *count = next;
    std::vector<int> out;
    for (int d : labels) out.push_back(ids.at(d));
    return out;
}

/// generate/load -> split -> apply_scenario -> estimate domains -> train ->
/// evaluate on the held-out split; writes artifacts under out_dir.
inline RunResult run_experiment(const ExperimentConfig& cfg, const fs::path& out_dir, std::ostream& log = std::clog) {
    using clock = std::chrono::steady_clock;
    RunResult result;
    auto timed = [&](const std::string& stage, auto&& f) {
        const auto t0 = clock::now();
        log << "[" << stage << "] start" << std::endl;
        auto r = run_stage(stage, f);
        result.seconds[stage] = std::chrono::duration<double>(clock::now() - t0).count();
        std::ostringstream secs;
        secs << std::fixed << std::setprecision(1) << result.seconds[stage];
        log << "[" << stage << "] done in " << secs.str() << " s" << std::endl;
        return r;
    };

    run_stage("output", [&] {
        fs::create_directories(out_dir);
        if (cfg.plots) fs::create_directories(out_dir / "plots");
        return 0;
    });

    const GdaDataset full = timed("data", [&] { return load_or_generate(cfg); });
    const Split split = run_stage("split", [&] { return stratified_split(full, cfg.test_fraction, cfg.stage_seed(1)); });
    const GdaDataset train =
        run_stage("scenario", [&] { return apply_scenario(subset(full, split.train), cfg.scenario, cfg.stage_seed(2), cfg.domain_names); });
    const GdaDataset test = subset(full, split.test);
    if (cfg.write_data) {
        timed("write-data", [&] {
            write_dataset(train, out_dir / "data" / "train");
            write_dataset(test, out_dir / "data" / "test");
            return 0;
        });
    }

    const LabelSets sets = run_stage("scenario", [&] { return compute_label_sets(train); });
    if (sets.known_classes.empty()) throw StageError("scenario", "no class is labeled in the training split");
    const KnownClasses known(sets.known_classes);
    result.known_classes = known.size();
    {
        std::ostringstream names;
        for (auto n : classify_scenario(train)) names << to_string(n) << ' ';
        log << "[scenario] " << to_string(cfg.scenario) << " labeled_fraction=" << cfg.scenario.labeled_fraction
            << " -> " << (names.str().empty() ? "(no table row)" : names.str()) << std::endl;
    }

    BlindedView view(train);
    const bool all_domains_visible = std::all_of(train.begin(), train.end(), [](const Sample& s) { return s.domain_visible; });
    std::vector<int> domains;
    std::vector<int> true_domains;
    for (const auto& s : train) true_domains.push_back(s.domain_label);
    int num_domains = 0;

    std::optional<double> nmi_domain;
    if (all_domains_visible) {
        std::vector<int> visible;
        for (std::size_t i = 0; i < view.size(); ++i) visible.push_back(view.domain_label(i));
        domains = compact_domains(visible, &num_domains);
        log << "[estimator] skipped: domain labels are visible (" << num_domains << " domains)" << std::endl;
    } else {
        result.estimator_used = true;
        int k = cfg.clusters;
        if (k == 0) compact_domains(true_domains, &k);
        SslConfig ssl = cfg.ssl;
        ssl.seed = cfg.stage_seed(3);
        EncoderSpec enc = cfg.encoder;
        enc.in_channels = train.front().image.channels;
        auto ssl_res = timed("ssl", [&] {
            return train_ssl(view, enc, ssl, [&](int e, double l) { log << "  ssl epoch " << e << " loss " << l << std::endl; });
        });
        run_stage("ssl", [&] {
            write_ssl_log(out_dir / "ssl_log.csv", ssl_res.epoch_losses);
            ssl_res.encoder.save((out_dir / "encoder.ckpt").string());
            return 0;
        });
        const auto features = run_stage("estimate", [&] { return extract_features(ssl_res.encoder, view); });
        const auto est = timed("estimate", [&] { return estimate_from_features(features, k, cfg.restarts, cfg.stage_seed(4)); });
        domains = est.assignments;
        num_domains = k;
        run_stage("estimate", [&] {
            write_assignments_csv(out_dir / "domain_estimate.csv", domains);
            if (cfg.plots) {
                const auto pts = plot::pca_2d(features);
                write_pca_csv(out_dir / "pca.csv", pts, train);
                std::vector<int> d, c;
                for (const auto& s : train) {
                    d.push_back(s.domain_label);
                    c.push_back(s.class_label);
                }
                plot::scatter_plot(pts, d, "FEATURES BY DOMAIN").save(out_dir / "plots" / "features_by_domain.png");
                plot::scatter_plot(pts, c, "FEATURES BY CLASS").save(out_dir / "plots" / "features_by_class.png");
            }
            return 0;
        });
        nmi_domain = nmi(domains, true_domains);
        result.domain_agreement = domain_agreement(domains, true_domains);
        log << "[estimate] k=" << k << " agreement=" << *result.domain_agreement << " nmi=" << *nmi_domain << std::endl;
    }
    result.estimated_domains = num_domains;

    ClassifierSpec spec = cfg.classifier;
    spec.in_channels = train.front().image.channels;
    spec.num_known = known.size();
    spec.num_domains = num_domains;
    TrainConfig tc = cfg.trainer;
    tc.seed = cfg.stage_seed(5);
    if (tc.prior.empty() && !cfg.uniform_prior) {
        // The harness knows the ground truth, so the prior is the true
        // distribution of the training split over the K + 1 outputs.
        tc.prior.assign(static_cast<std::size_t>(known.size() + 1), 0.0);
        for (const auto& s : train)
            tc.prior[static_cast<std::size_t>(known.contains(s.class_label) ? known.index_of(s.class_label) : known.unk_index())] += 1.0;
        for (auto& p : tc.prior) p = std::max(p / static_cast<double>(train.size()), 1e-6);
        double sum = 0.0;
        for (double p : tc.prior) sum += p;
        for (auto& p : tc.prior) p /= sum;
    }

    auto trained = timed("train", [&] {
        return train_dann(view, domains, spec, known, tc, [&](const EpochLog& e) {
            log << "  epoch " << e.epoch << " loss_y " << e.loss_y << " loss_d " << e.loss_d << " loss_p " << e.loss_p << " lambda "
                << e.lambda << " acc " << e.train_acc << std::endl;
        });
    });
    run_stage("train", [&] {
        write_train_log(out_dir / "train_log.csv", trained.log);
        trained.classifier.save((out_dir / "classifier.ckpt").string());
        return 0;
    });

    std::vector<const Image*> test_images;
    for (const auto& s : test) test_images.push_back(&s.image);
    result.report = timed("evaluate", [&] {
        std::vector<int> pred;
        for (const auto& p : trained.classifier.predict(test_images)) pred.push_back(p.label);
        return evaluate_predictions(test, known, pred, nmi_domain);
    });
    run_stage("evaluate", [&] {
        write_text(out_dir / "metrics.json", metrics_json_text(result.report));
        if (cfg.plots) plot::confusion_heatmap(result.report.confusion.rows(), "CONFUSION").save(out_dir / "plots" / "confusion.png");
        return 0;
    });

    if (cfg.baseline) {
        result.baseline = timed("baseline", [&] {
            TrainConfig bc = cfg.trainer;
            bc.seed = cfg.stage_seed(6);
            auto base = train_labeled_only(view, spec, known, bc);
            return evaluate_predictions(test, known, base.predict(test_images));
        });
        run_stage("baseline", [&] {
            write_text(out_dir / "baseline_metrics.json", metrics_json_text(*result.baseline));
            return 0;
        });
    }

    run_stage("summary", [&] {
        nlohmann::ordered_json s;
        s["scenario"] = to_string(cfg.scenario);
        s["labeled_fraction"] = cfg.scenario.labeled_fraction;
        s["known_classes"] = known.labels();
        s["train_samples"] = train.size();
        s["test_samples"] = test.size();
        s["estimator_used"] = result.estimator_used;
        s["estimated_domains"] = num_domains;
        s["domain_agreement"] = result.domain_agreement ? nlohmann::ordered_json(*result.domain_agreement) : nlohmann::ordered_json(nullptr);
        s["hos"] = result.report.hos;
        s["baseline_hos"] = result.baseline ? nlohmann::ordered_json(result.baseline->hos) : nlohmann::ordered_json(nullptr);
        nlohmann::ordered_json secs;
        for (const auto& [k, v] : result.seconds) secs[k] = v;
        s["seconds"] = secs;
        write_text(out_dir / "summary.json", s.dump(2) + "\n");
        return 0;
    });
    return result;
}

// ---------------------------------------------------------------------------

struct ClusterSweepRow {
    int k = 0;
    double nmi_domain = 0.0;
    double agreement = 0.0;
};

/// Trains one encoder on the (unlabeled) dataset, then clusters its features
/// for each k and scores the partition against the true domains.
inline std::vector<ClusterSweepRow> cluster_sweep(const GdaDataset& dataset, const std::vector<int>& ks, const EncoderSpec& spec,
                                                  const SslConfig& ssl, int restarts, const EpochCallback& on_epoch = {}) {
    const BlindedView view(dataset);
    auto res = train_ssl(view, spec, ssl, on_epoch);
    const auto features = extract_features(res.encoder, view);
    std::vector<int> truth;
    for (const auto& s : dataset) truth.push_back(s.domain_label);
    std::vector<ClusterSweepRow> rows;
    for (int k : ks) {
        const auto est = estimate_from_features(features, k, restarts, ssl.seed);
        rows.push_back({k, nmi(est.assignments, truth), matched_agreement(est.assignments, truth)});
    }
    return rows;
}

/// Index of the largest value, ties toward the first.
inline std::size_t peak_index(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

inline void write_nmi_curve(const fs::path& dir, const std::vector<NmiRow>& rows, bool with_plot) {
    std::ostringstream os;
    os << "g,nmi_domain,nmi_class\n" << std::setprecision(8);
    for (const auto& r : rows) os << r.g << ',' << r.nmi_domain << ',' << r.nmi_class << '\n';
    write_text(dir / "nmi_curve.csv", os.str());
    if (with_plot) {
        plot::Series d{"DOMAIN", {}, {}}, c{"CLASS", {}, {}};
        for (const auto& r : rows) {
            d.x.push_back(r.g);
            d.y.push_back(r.nmi_domain);
            c.x.push_back(r.g);
            c.y.push_back(r.nmi_class);
        }
        plot::line_plot({d, c}, "NMI VS GRID", "GRID SIZE G", "NMI").save(dir / "nmi_curve.png");
    }
}

inline void write_cluster_sweep(const fs::path& dir, const std::vector<ClusterSweepRow>& rows, bool with_plot) {
    std::ostringstream os;
    os << "k,nmi_domain,agreement\n" << std::setprecision(8);
    for (const auto& r : rows) os << r.k << ',' << r.nmi_domain << ',' << r.agreement << '\n';
    write_text(dir / "cluster_sweep.csv", os.str());
    if (with_plot) {
        plot::Series s{"NMI", {}, {}};
        for (const auto& r : rows) {
            s.x.push_back(r.k);
            s.y.push_back(r.nmi_domain);
        }
        plot::line_plot({s}, "NMI VS CLUSTERS", "NUMBER OF CLUSTERS K", "NMI").save(dir / "cluster_sweep.png");
    }
}

namespace detail {

inline std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw Error("missing artifact " + path.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line))
        if (!line.empty()) rows.push_back(split_csv_line(line));
    return rows;
}

}  // namespace detail

/// Regenerates plots from the CSV/JSON artifacts found in a run or sweep
/// directory; returns the files written.
inline std::vector<fs::path> emit_plots(const fs::path& dir) {
    std::vector<fs::path> out;
    const fs::path plots = dir / "plots";
    auto ensure = [&] { fs::create_directories(plots); };
    if (fs::exists(dir / "metrics.json")) {
        ensure();
        std::ifstream is(dir / "metrics.json");
        const auto report = report_from_json(nlohmann::json::parse(is));
        plot::confusion_heatmap(report.confusion.rows(), "CONFUSION").save(plots / "confusion.png");
        out.push_back(plots / "confusion.png");
    }
    if (fs::exists(dir / "pca.csv")) {
        ensure();
        std::vector<std::array<double, 2>> pts;
        std::vector<int> d, c;
        for (const auto& r : detail::read_csv(dir / "pca.csv")) {
            if (r.size() != 5) throw Error("pca.csv: malformed row");
            pts.push_back({std::stod(r[1]), std::stod(r[2])});
            d.push_back(std::stoi(r[3]));
            c.push_back(std::stoi(r[4]));
        }
        plot::scatter_plot(pts, d, "FEATURES BY DOMAIN").save(plots / "features_by_domain.png");
        plot::scatter_plot(pts, c, "FEATURES BY CLASS").save(plots / "features_by_class.png");
        out.push_back(plots / "features_by_domain.png");
        out.push_back(plots / "features_by_class.png");
    }
    if (fs::exists(dir / "nmi_curve.csv")) {
        std::vector<NmiRow> rows;
        for (const auto& r : detail::read_csv(dir / "nmi_curve.csv")) rows.push_back({std::stoi(r.at(0)), std::stod(r.at(1)), std::stod(r.at(2))});
        write_nmi_curve(dir, rows, true);
        out.push_back(dir / "nmi_curve.png");
    }
    if (fs::exists(dir / "cluster_sweep.csv")) {
        std::vector<ClusterSweepRow> rows;
        for (const auto& r : detail::read_csv(dir / "cluster_sweep.csv"))
            rows.push_back({std::stoi(r.at(0)), std::stod(r.at(1)), std::stod(r.at(2))});
        write_cluster_sweep(dir, rows, true);
        out.push_back(dir / "cluster_sweep.png");
    }
    if (out.empty()) throw Error("no plottable artifacts in " + dir.string());
    return out;
}

}  // namespace gda
