// Command-line front end for the generalized domain adaptation pipeline.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "gda/experiment.hpp"

namespace {

using namespace gda;

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string config;
    std::string out_dir = "out";
};

ExperimentConfig load_config(const Globals& g) {
    ExperimentConfig cfg = g.config.empty() ? experiment_from_json(nlohmann::json::object()) : load_experiment_config(g.config);
    if (g.seed) set_seed(cfg, *g.seed);
    return cfg;
}

std::vector<int> domains_for(const BlindedView& view, const std::string& csv, int* count) {
    if (!csv.empty()) {
        auto d = read_assignments_csv(csv);
        if (d.size() != view.size())
            throw Error("domain estimate has " + std::to_string(d.size()) + " rows, manifest has " + std::to_string(view.size()));
        return compact_domains(d, count);
    }
    std::vector<int> visible;
    for (std::size_t i = 0; i < view.size(); ++i) {
        if (!view.domain_visible(i)) throw Error("sample " + std::to_string(i) + " hides its domain label; pass --domains");
        visible.push_back(view.domain_label(i));
    }
    return compact_domains(visible, count);
}

void print_report(const MetricsReport& r) { std::cout << to_json(r).dump(2) << std::endl; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generalized domain adaptation: domain estimation, adversarial training, evaluation"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "Global seed (overrides the config)");
    app.add_option("--config", g.config, "TOML experiment config");
    app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();

    auto* synth = app.add_subcommand("synth", "Generate a ShapeDomains dataset (PNG images + manifest.csv)");

    auto* scenario = app.add_subcommand("scenario", "Scenario utilities");
    scenario->require_subcommand(1);
    auto* validate = scenario->add_subcommand("validate", "Print the Table-1 settings a dataset instantiates");
    std::string manifest, split_text;
    double fraction = 1.0;
    bool show_domains = false;
    validate->add_option("--manifest", manifest, "Manifest CSV")->required();
    validate->add_option("--split", split_text, "Apply a scenario first, e.g. \"d0(0-3), d1(4-7)\"");
    validate->add_option("--labeled-fraction", fraction, "Fraction labeled per matching (domain, class)")->capture_default_str();
    validate->add_flag("--show-domain-labels", show_domains, "Keep domain labels visible when applying --split");

    auto* estimate = app.add_subcommand("estimate-domains", "Self-supervised training + GMM clustering into k domains");
    int k = 0;
    estimate->add_option("--manifest", manifest, "Manifest CSV")->required();
    estimate->add_option("--k", k, "Number of clusters (default: config, else the manifest's domain count)");

    auto* train = app.add_subcommand("train", "Adversarial training with pseudo-labels");
    std::string domains_csv;
    std::optional<double> lp_weight;
    train->add_option("--manifest", manifest, "Manifest CSV (visibility flags are honoured)")->required();
    train->add_option("--domains", domains_csv, "sample_index,cluster CSV; default: visible domain labels");
    train->add_option("--lp-weight", lp_weight, "Weight of the prior regularizer (0 disables it)");

    auto* evaluate = app.add_subcommand("evaluate", "Score a classifier checkpoint on a manifest");
    std::string checkpoint;
    evaluate->add_option("--manifest", manifest, "Manifest CSV with ground-truth labels")->required();
    evaluate->add_option("--checkpoint", checkpoint, "Classifier checkpoint")->required();

    auto* run = app.add_subcommand("run", "Full pipeline from a config");
    std::optional<double> run_fraction;
    run->add_option("--lp-weight", lp_weight, "Override [trainer] lp_weight");
    run->add_option("--labeled-fraction", run_fraction, "Override [scenario] labeled_fraction");

    auto* sweep = app.add_subcommand("sweep", "Grid-size or cluster-count sweeps");
    sweep->require_subcommand(1);
    auto* sweep_grid = sweep->add_subcommand("grid", "NMI vs grid size");
    std::vector<int> grids{1, 2, 4, 8};
    sweep_grid->add_option("--grids", grids, "Grid sizes")->delimiter(',')->capture_default_str();
    auto* sweep_k = sweep->add_subcommand("clusters", "NMI vs number of clusters");
    std::vector<int> ks{2, 3, 4, 5, 6, 7, 8};
    sweep_k->add_option("--ks", ks, "Cluster counts")->delimiter(',')->capture_default_str();

    auto* plot_cmd = app.add_subcommand("plot", "Re-render plots from run or sweep artifacts");
    std::string run_dir;
    plot_cmd->add_option("--run-dir", run_dir, "Run or sweep directory (default: --out-dir)");

    CLI11_PARSE(app, argc, argv);

    try {
        const fs::path out(g.out_dir);
        if (synth->parsed()) {
            const auto cfg = load_config(g);
            const auto data = run_stage("synth", [&] { return load_or_generate(cfg); });
            const auto path = run_stage("synth", [&] { return write_dataset(data, out); });
            std::cout << "wrote " << data.size() << " samples to " << path.string() << std::endl;
        } else if (validate->parsed()) {
            auto data = run_stage("load", [&] { return read_manifest(manifest).dataset; });
            if (!split_text.empty()) {
                auto spec = run_stage("scenario", [&] { return parse_scenario(split_text); });
                spec.labeled_fraction = fraction;
                spec.hide_domain_labels = !show_domains;
                data = run_stage("scenario", [&] { return apply_scenario(data, spec, g.seed.value_or(0)); });
            }
            const auto names = classify_scenario(data);
            if (names.empty()) std::cout << "none" << std::endl;
            for (auto n : names) std::cout << to_string(n) << std::endl;
        } else if (estimate->parsed()) {
            const auto cfg = load_config(g);
            const auto data = run_stage("load", [&] { return read_manifest(manifest).dataset; });
            int clusters = k > 0 ? k : cfg.clusters;
            std::vector<int> truth;
            for (const auto& s : data) truth.push_back(s.domain_label);
            if (clusters == 0) compact_domains(truth, &clusters);
            const BlindedView view(data);
            SslConfig ssl = cfg.ssl;
            ssl.seed = cfg.stage_seed(3);
            EncoderSpec enc = cfg.encoder;
            enc.in_channels = data.front().image.channels;
            auto res = run_stage("ssl", [&] {
                return train_ssl(view, enc, ssl, [](int e, double l) { std::clog << "  ssl epoch " << e << " loss " << l << std::endl; });
            });
            const auto est = run_stage("estimate", [&] { return estimate_domains(view, res.encoder, clusters, cfg.restarts, cfg.stage_seed(4)); });
            run_stage("estimate", [&] {
                fs::create_directories(out);
                write_assignments_csv(out / "domain_estimate.csv", est.assignments);
                write_ssl_log(out / "ssl_log.csv", res.epoch_losses);
                res.encoder.save((out / "encoder.ckpt").string());
                return 0;
            });
            std::cout << "k=" << clusters << " nmi_domain=" << nmi(est.assignments, truth)
                      << " agreement=" << matched_agreement(est.assignments, truth) << std::endl;
        } else if (train->parsed()) {
            auto cfg = load_config(g);
            if (lp_weight) cfg.trainer.lp_weight = *lp_weight;
            const auto data = run_stage("load", [&] { return read_manifest(manifest).dataset; });
            const BlindedView view(data);
            int nd = 0;
            const auto domains = run_stage("domains", [&] { return domains_for(view, domains_csv, &nd); });
            const auto sets = compute_label_sets(data);
            const KnownClasses known(sets.known_classes);
            ClassifierSpec spec = cfg.classifier;
            spec.in_channels = data.front().image.channels;
            spec.num_known = known.size();
            spec.num_domains = nd;
            TrainConfig tc = cfg.trainer;
            tc.seed = cfg.stage_seed(5);
            auto res = run_stage("train", [&] {
                return train_dann(view, domains, spec, known, tc, [](const EpochLog& e) {
                    std::clog << "  epoch " << e.epoch << " loss_y " << e.loss_y << " loss_d " << e.loss_d << " acc " << e.train_acc << std::endl;
                });
            });
            run_stage("train", [&] {
                fs::create_directories(out);
                write_train_log(out / "train_log.csv", res.log);
                res.classifier.save((out / "classifier.ckpt").string());
                return 0;
            });
            std::cout << "wrote " << (out / "classifier.ckpt").string() << std::endl;
        } else if (evaluate->parsed()) {
            const auto data = run_stage("load", [&] { return read_manifest(manifest).dataset; });
            auto clf = run_stage("load", [&] { return DannClassifier::load(checkpoint); });
            std::vector<const Image*> imgs;
            for (const auto& s : data) imgs.push_back(&s.image);
            std::vector<int> pred;
            for (const auto& p : run_stage("evaluate", [&] { return clf.predict(imgs); })) pred.push_back(p.label);
            const auto report = run_stage("evaluate", [&] { return evaluate_predictions(data, clf.known(), pred); });
            run_stage("evaluate", [&] {
                fs::create_directories(out);
                write_text(out / "metrics.json", metrics_json_text(report));
                return 0;
            });
            print_report(report);
        } else if (run->parsed()) {
            auto cfg = load_config(g);
            if (lp_weight) cfg.trainer.lp_weight = *lp_weight;
            if (run_fraction) cfg.scenario.labeled_fraction = *run_fraction;
            const auto result = run_experiment(cfg, out);
            print_report(result.report);
            if (result.domain_agreement) std::cout << "domain_agreement " << *result.domain_agreement << std::endl;
            if (result.baseline) std::cout << "baseline_hos " << result.baseline->hos << std::endl;
        } else if (sweep_grid->parsed() || sweep_k->parsed()) {
            const auto cfg = load_config(g);
            auto data = run_stage("data", [&] { return load_or_generate(cfg); });
            SslConfig ssl = cfg.ssl;
            ssl.seed = cfg.stage_seed(3);
            EncoderSpec enc = cfg.encoder;
            enc.in_channels = data.front().image.channels;
            auto progress = [](int e, double l) { std::clog << "  ssl epoch " << e << " loss " << l << std::endl; };
            fs::create_directories(out);
            if (sweep_grid->parsed()) {
                std::vector<GridSpec> gs;
                for (int v : grids) gs.push_back(GridSpec{v});
                const auto rows = run_stage("sweep", [&] { return nmi_curve(data, gs, enc, ssl, cfg.restarts, progress); });
                write_nmi_curve(out, rows, cfg.plots);
                for (const auto& r : rows) std::cout << "g=" << r.g << " nmi_domain=" << r.nmi_domain << " nmi_class=" << r.nmi_class << std::endl;
            } else {
                const auto rows = run_stage("sweep", [&] { return cluster_sweep(data, ks, enc, ssl, cfg.restarts, progress); });
                write_cluster_sweep(out, rows, cfg.plots);
                for (const auto& r : rows) std::cout << "k=" << r.k << " nmi_domain=" << r.nmi_domain << " agreement=" << r.agreement << std::endl;
            }
        } else if (plot_cmd->parsed()) {
            for (const auto& p : emit_plots(run_dir.empty() ? out : fs::path(run_dir))) std::cout << "wrote " << p.string() << std::endl;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
