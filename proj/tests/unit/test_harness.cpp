#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gda/experiment.hpp"
#include "gda/scenario.hpp"
#include "gda/toml.hpp"
#include "test_util.hpp"

using namespace gda;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("gda_harness_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::size_t parse_error_position(const std::string& text) {
    try {
        parse_scenario(text);
    } catch (const ParseError& e) {
        return e.position();
    }
    ADD_FAILURE() << "no parse error for '" << text << "'";
    return 0;
}

GdaDataset grid_dataset(int domains, int classes, int per_cell) {
    GdaDataset ds;
    for (int d = 0; d < domains; ++d)
        for (int c = 0; c < classes; ++c)
            for (int i = 0; i < per_cell; ++i) ds.push_back(gda::test::make_sample(c, d, true, true));
    return ds;
}

ExperimentConfig bundled(const std::string& name) { return load_experiment_config(std::string(GDA_CONFIG_DIR) + "/" + name); }

}  // namespace

TEST(ScenarioParse, Examples) {
    const auto s = parse_scenario("sv(0-3), mt(4-7)");
    ASSERT_EQ(s.clauses.size(), 2u);
    EXPECT_EQ(s.clauses[0].domain, "sv");
    EXPECT_EQ(s.clauses[0].classes(), (std::set<int>{0, 1, 2, 3}));
    EXPECT_EQ(s.clauses[1].classes(), (std::set<int>{4, 5, 6, 7}));

    const auto t = parse_scenario("  d0(0,2-3 ,5),d1( 1 )");
    EXPECT_EQ(t.clauses[0].classes(), (std::set<int>{0, 2, 3, 5}));
    EXPECT_EQ(t.clauses[1].classes(), (std::set<int>{1}));
    EXPECT_EQ(to_string(t), "d0(0,2-3,5), d1(1)");
    EXPECT_EQ(to_string(parse_scenario(to_string(t))), to_string(t));
}

TEST(ScenarioParse, ErrorsCarryPositions) {
    EXPECT_EQ(parse_error_position(""), 0u);
    EXPECT_EQ(parse_error_position("(0-1)"), 0u);
    EXPECT_EQ(parse_error_position("d0 0-1)"), 3u);
    EXPECT_EQ(parse_error_position("d0(a)"), 3u);
    EXPECT_EQ(parse_error_position("d0(3-1)"), 3u);
    EXPECT_EQ(parse_error_position("d0(0-1"), 6u);
    EXPECT_EQ(parse_error_position("d0(0-1) d1(2)"), 8u);
    EXPECT_EQ(parse_error_position("d0(0), d0(1)"), 7u);
    EXPECT_EQ(parse_error_position("d0(0-2,1)"), 7u);
    try {
        parse_scenario("d0(0-1");
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("position 6"), std::string::npos);
    }
}

TEST(ScenarioResolve, NamesAndIndices) {
    EXPECT_EQ(resolve_domain("d3"), 3);
    EXPECT_EQ(resolve_domain("2"), 2);
    EXPECT_EQ(resolve_domain("mt", {"sv", "mt"}), 1);
    EXPECT_THROW(resolve_domain("sv"), Error);
    EXPECT_THROW(resolve_domain("xx", {"sv", "mt"}), Error);
}

TEST(ApplyScenario, LabelsTheRequestedFraction) {
    const auto ds = grid_dataset(2, 4, 100);
    auto spec = parse_scenario("d0(0-1), d1(2-3)");
    spec.labeled_fraction = 0.5;
    const auto out = apply_scenario(ds, spec, 3);
    std::map<std::pair<int, int>, int> labeled;
    for (const auto& s : out) {
        EXPECT_FALSE(s.domain_visible);
        if (s.class_visible) ++labeled[{s.domain_label, s.class_label}];
    }
    EXPECT_EQ(labeled, (std::map<std::pair<int, int>, int>{{{0, 0}, 50}, {{0, 1}, 50}, {{1, 2}, 50}, {{1, 3}, 50}}));
    EXPECT_TRUE(classify_scenario(out).count(ScenarioName::GDA2));
}

TEST(ApplyScenario, DeterministicAndLabelPreserving) {
    const auto ds = grid_dataset(2, 4, 20);
    auto spec = parse_scenario("d0(0-1), d1(2-3)");
    spec.labeled_fraction = 0.3;
    const auto a = apply_scenario(ds, spec, 9), b = apply_scenario(ds, spec, 9), c = apply_scenario(ds, spec, 10);
    bool differs = false;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        EXPECT_EQ(a[i].class_visible, b[i].class_visible);
        differs |= a[i].class_visible != c[i].class_visible;
        EXPECT_EQ(a[i].class_label, ds[i].class_label);
        EXPECT_EQ(a[i].domain_label, ds[i].domain_label);
    }
    EXPECT_TRUE(differs);
    const auto back = reveal_all(a);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        EXPECT_TRUE(back[i].class_visible && back[i].domain_visible);
        EXPECT_EQ(back[i].class_label, ds[i].class_label);
    }
}

TEST(ApplyScenario, FullFractionGivesGda1) {
    const auto out = apply_scenario(grid_dataset(2, 6, 5), parse_scenario("d0(0-1), d1(2-3)"), 1);
    const auto names = classify_scenario(out);
    EXPECT_TRUE(names.count(ScenarioName::GDA1));
    EXPECT_FALSE(names.count(ScenarioName::GDA2));
}

TEST(ApplyScenario, VisibleDomainsGiveOsda) {
    auto spec = parse_scenario("d0(0-1)");
    spec.hide_domain_labels = false;
    GdaDataset ds;
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 4; ++i) {
            if (c < 2) ds.push_back(gda::test::make_sample(c, 0, true, true));
            ds.push_back(gda::test::make_sample(c, 1, true, true));
        }
    const auto out = apply_scenario(ds, spec, 1);
    EXPECT_TRUE(classify_scenario(out).count(ScenarioName::OSDA));
}

TEST(ApplyScenario, Errors) {
    const auto ds = grid_dataset(2, 2, 2);
    EXPECT_THROW(apply_scenario(ds, parse_scenario("d5(0)"), 1), Error);
    EXPECT_THROW(apply_scenario(ds, parse_scenario("sv(0)"), 1), Error);
    auto spec = parse_scenario("d0(0)");
    spec.labeled_fraction = 1.5;
    EXPECT_THROW(apply_scenario(ds, spec, 1), Error);
}

TEST(StratifiedSplit, StrataAreSplitProportionally) {
    const auto ds = grid_dataset(2, 3, 10);
    const auto s = stratified_split(ds, 0.2, 4);
    EXPECT_EQ(s.test.size(), 12u);
    EXPECT_EQ(s.train.size() + s.test.size(), ds.size());
    std::map<std::pair<int, int>, int> per;
    for (auto i : s.test) ++per[{ds[i].domain_label, ds[i].class_label}];
    for (const auto& [k, n] : per) EXPECT_EQ(n, 2);
    EXPECT_TRUE(std::is_sorted(s.train.begin(), s.train.end()));
    const auto again = stratified_split(ds, 0.2, 4);
    EXPECT_EQ(again.test, s.test);
    EXPECT_THROW(stratified_split(ds, 0.0, 1), Error);
    EXPECT_THROW(stratified_split(ds, 1.0, 1), Error);
}

// ---------------------------------------------------------------------------

TEST(Toml, ParsesTheSupportedSubset) {
    const auto j = toml::parse(R"(
# comment
seed = 3
name = "a \"q\"\n"  # trailing
[t]
f = -1.5e-3
b = true
arr = [1, 2,
       3]
nested = [[1, 2], ["x"]]
[t.sub]
k = 4
[[items]]
v = 1
[[items]]
v = 2
)");
    EXPECT_EQ(j.at("seed").get<int>(), 3);
    EXPECT_EQ(j.at("name").get<std::string>(), "a \"q\"\n");
    EXPECT_DOUBLE_EQ(j.at("t").at("f").get<double>(), -1.5e-3);
    EXPECT_TRUE(j.at("t").at("b").get<bool>());
    EXPECT_EQ(j.at("t").at("arr").get<std::vector<int>>(), (std::vector<int>{1, 2, 3}));
    EXPECT_EQ(j.at("t").at("nested").at(1).at(0).get<std::string>(), "x");
    EXPECT_EQ(j.at("t").at("sub").at("k").get<int>(), 4);
    ASSERT_EQ(j.at("items").size(), 2u);
    EXPECT_EQ(j.at("items").at(1).at("v").get<int>(), 2);
}

TEST(Toml, ErrorsReportLines) {
    auto line_of = [](const std::string& text) -> std::size_t {
        try {
            toml::parse(text);
        } catch (const toml::TomlError& e) {
            return e.line();
        }
        return 0;
    };
    EXPECT_EQ(line_of("a = 1\nb = \n"), 2u);
    EXPECT_EQ(line_of("a = 1\na = 2\n"), 2u);
    EXPECT_EQ(line_of("[t\n"), 1u);
    EXPECT_EQ(line_of("x = \"open\n"), 1u);
    EXPECT_EQ(line_of("\n\nk = [1, 2\n"), 4u);
}

TEST(ExperimentConfig, DefaultsAndOverrides) {
    const auto cfg = experiment_from_json(toml::parse(R"toml(
seed = 5
[scenario]
split = "d0(0), d1(1-2)"
labeled_fraction = 0.5
[estimator.ssl]
grid = 4
[estimator.augment]
ops = ["grayscale"]
[trainer]
prior = "uniform"
)toml"));
    EXPECT_EQ(cfg.seed, 5u);
    EXPECT_EQ(cfg.scenario.clauses.size(), 2u);
    EXPECT_DOUBLE_EQ(cfg.scenario.labeled_fraction, 0.5);
    EXPECT_EQ(cfg.ssl.grid.g, 4);
    EXPECT_EQ(cfg.ssl.augment.enabled_ops, (std::vector<AugmentOp>{AugmentOp::Grayscale}));
    EXPECT_TRUE(cfg.uniform_prior);
    EXPECT_EQ(cfg.trainer.epochs, TrainConfig{}.epochs);
}

TEST(ExperimentConfig, RejectsUnknownKeysAndBadValues) {
    EXPECT_THROW(experiment_from_json(toml::parse("[trainer]\nepoch = 3\n")), Error);
    EXPECT_THROW(experiment_from_json(toml::parse("[bogus]\n")), Error);
    EXPECT_THROW(experiment_from_json(toml::parse("[estimator.ssl]\ngrids = 2\n")), Error);
    EXPECT_THROW(experiment_from_json(toml::parse("[trainer]\nepochs = \"ten\"\n")), Error);
    EXPECT_THROW(experiment_from_json(toml::parse("[scenario]\nsplit = \"d0(\"\n")), ParseError);
    EXPECT_THROW(experiment_from_json(toml::parse("[trainer]\nprior = \"flat\"\n")), Error);
    EXPECT_THROW(experiment_from_json(toml::parse("[trainer]\npseudo_init_epoch = 50\npseudo_update_epoch = 40\n")), Error);
    EXPECT_THROW(load_experiment_config("/nonexistent/config.toml"), StageError);
}

TEST(ExperimentConfig, BundledConfigsLoad) {
    for (const auto& entry : fs::directory_iterator(GDA_CONFIG_DIR)) {
        if (entry.path().extension() != ".toml") continue;
        EXPECT_NO_THROW(load_experiment_config(entry.path().string())) << entry.path();
    }
    const auto g1 = bundled("gda1_shapedomains.toml");
    const auto g2 = bundled("gda2_shapedomains.toml");
    EXPECT_DOUBLE_EQ(g1.scenario.labeled_fraction, 1.0);
    EXPECT_DOUBLE_EQ(g2.scenario.labeled_fraction, 0.5);
    EXPECT_EQ(to_string(g1.scenario), to_string(g2.scenario));
    EXPECT_EQ(g1.seed, g2.seed);
}

// ---------------------------------------------------------------------------

TEST(RunExperiment, SmokeWritesArtifactsAndIsDeterministic) {
    const auto cfg = bundled("smoke.toml");
    const auto a = scratch("smoke_a"), b = scratch("smoke_b");
    std::ostringstream log;
    const auto ra = run_experiment(cfg, a, log);
    const auto rb = run_experiment(cfg, b, log);
    EXPECT_TRUE(ra.estimator_used);
    ASSERT_TRUE(ra.domain_agreement.has_value());
    EXPECT_GE(*ra.domain_agreement, 0.5);
    EXPECT_EQ(ra.known_classes, 2);
    EXPECT_TRUE(ra.baseline.has_value());
    for (const char* f : {"metrics.json", "baseline_metrics.json", "summary.json", "train_log.csv", "classifier.ckpt", "ssl_log.csv",
                          "encoder.ckpt", "domain_estimate.csv", "pca.csv", "plots/confusion.png", "plots/features_by_domain.png",
                          "data/train/manifest.csv", "data/test/manifest.csv"})
        EXPECT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / "metrics.json"), slurp(b / "metrics.json"));
    EXPECT_EQ(slurp(a / "baseline_metrics.json"), slurp(b / "baseline_metrics.json"));
    EXPECT_EQ(slurp(a / "domain_estimate.csv"), slurp(b / "domain_estimate.csv"));

    // The written training split carries the scenario's flags.
    const auto train = read_manifest(a / "data/train/manifest.csv").dataset;
    EXPECT_TRUE(classify_scenario(train).count(ScenarioName::GDA1));

    // Re-rendering plots from artifacts only.
    fs::remove_all(a / "plots");
    const auto written = emit_plots(a);
    EXPECT_EQ(written.size(), 3u);
    for (const auto& p : written) EXPECT_TRUE(fs::exists(p)) << p;
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(RunExperiment, SeedChangesTheRun) {
    auto cfg = bundled("smoke.toml");
    cfg.plots = false;
    cfg.write_data = false;
    cfg.baseline = false;
    const auto a = scratch("seed_a"), b = scratch("seed_b");
    std::ostringstream log;
    run_experiment(cfg, a, log);
    set_seed(cfg, cfg.seed + 1);
    run_experiment(cfg, b, log);
    EXPECT_NE(slurp(a / "train_log.csv"), slurp(b / "train_log.csv"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(RunExperiment, VisibleDomainLabelsSkipTheEstimator) {
    const auto cfg = bundled("osda_smoke.toml");
    const auto dir = scratch("osda");
    std::ostringstream log;
    const auto r = run_experiment(cfg, dir, log);
    EXPECT_FALSE(r.estimator_used);
    EXPECT_FALSE(r.domain_agreement.has_value());
    EXPECT_EQ(r.estimated_domains, 2);
    EXPECT_FALSE(fs::exists(dir / "encoder.ckpt"));
    EXPECT_TRUE(fs::exists(dir / "metrics.json"));
    EXPECT_NE(log.str().find("[estimator] skipped"), std::string::npos);
    fs::remove_all(dir);
}

TEST(RunExperiment, StageErrorsNameTheStage) {
    auto cfg = bundled("osda_smoke.toml");
    cfg.scenario = parse_scenario("d7(0)");
    cfg.scenario.hide_domain_labels = false;
    const auto dir = scratch("stage_err");
    std::ostringstream log;
    try {
        run_experiment(cfg, dir, log);
        ADD_FAILURE() << "expected a stage error";
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "scenario");
    }
    cfg = bundled("osda_smoke.toml");
    cfg.manifest = (dir / "missing.csv").string();
    try {
        run_experiment(cfg, dir, log);
        ADD_FAILURE() << "expected a stage error";
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "data");
    }
    fs::remove_all(dir);
}

// ---------------------------------------------------------------------------

namespace {

int run_cli(const std::string& args, std::string* out = nullptr) {
    const std::string cmd = std::string(GDA_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return -1;
    std::string text;
    char buf[512];
    while (fgets(buf, sizeof buf, p)) text += buf;
    const int status = pclose(p);
    if (out) *out = text;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, SynthValidateTrainEvaluate) {
    const auto dir = scratch("cli");
    const std::string cfg = std::string(GDA_CONFIG_DIR) + "/smoke.toml";
    std::string out;
    ASSERT_EQ(run_cli("synth --config " + cfg + " --out-dir " + (dir / "data").string(), &out), 0);
    EXPECT_NE(out.find("wrote 72 samples"), std::string::npos) << out;
    const auto manifest = (dir / "data" / "manifest.csv").string();

    ASSERT_EQ(run_cli("scenario validate --manifest " + manifest + " --split \"d0(0), d1(1)\"", &out), 0);
    EXPECT_NE(out.find("GDA1"), std::string::npos) << out;
    ASSERT_EQ(run_cli("scenario validate --manifest " + manifest + " --split \"d0(0), d1(1)\" --labeled-fraction 0.5", &out), 0);
    EXPECT_NE(out.find("GDA2"), std::string::npos) << out;

    ASSERT_EQ(run_cli("estimate-domains --config " + cfg + " --manifest " + manifest + " --out-dir " + (dir / "est").string(), &out), 0);
    EXPECT_NE(out.find("k=2"), std::string::npos) << out;
    EXPECT_EQ(read_assignments_csv(dir / "est" / "domain_estimate.csv").size(), 72u);

    ASSERT_EQ(run_cli("train --config " + cfg + " --manifest " + manifest + " --out-dir " + (dir / "train").string()), 0);
    ASSERT_EQ(run_cli("evaluate --manifest " + manifest + " --checkpoint " + (dir / "train" / "classifier.ckpt").string() +
                          " --out-dir " + (dir / "eval").string(),
                      &out),
              0);
    EXPECT_NE(out.find("\"hos\""), std::string::npos) << out;
    EXPECT_TRUE(fs::exists(dir / "eval" / "metrics.json"));
    fs::remove_all(dir);
}

TEST(Cli, RunAndPlot) {
    const auto dir = scratch("cli_run");
    const std::string cfg = std::string(GDA_CONFIG_DIR) + "/smoke.toml";
    std::string out;
    ASSERT_EQ(run_cli("run --config " + cfg + " --seed 3 --out-dir " + dir.string(), &out), 0);
    EXPECT_NE(out.find("\"hos\""), std::string::npos) << out;
    fs::remove_all(dir / "plots");
    ASSERT_EQ(run_cli("plot --run-dir " + dir.string(), &out), 0);
    EXPECT_TRUE(fs::exists(dir / "plots" / "confusion.png"));
    fs::remove_all(dir);
}

TEST(Cli, ErrorsExitNonZero) {
    std::string out;
    EXPECT_NE(run_cli("run --config /nonexistent.toml"), 0);
    EXPECT_NE(run_cli("scenario validate --manifest /nonexistent.csv"), 0);
    EXPECT_NE(run_cli("bogus"), 0);
}
