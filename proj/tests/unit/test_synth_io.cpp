#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "gda/destructor.hpp"
#include "gda/io.hpp"
#include "gda/synthgen.hpp"
#include "test_util.hpp"

using namespace gda;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("gda_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::vector<double> mean_of(const GdaDataset& ds, int domain, int cls) {
    std::vector<double> m(3, 0.0);
    int n = 0;
    for (const auto& s : ds) {
        if (s.domain_label != domain || (cls >= 0 && s.class_label != cls)) continue;
        const auto cm = channel_means(s.image);
        for (std::size_t c = 0; c < 3; ++c) m[c] += cm[c];
        ++n;
    }
    for (auto& v : m) v /= n;
    return m;
}

double dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

}  // namespace

TEST(Synth, CountsAndLabels) {
    SynthConfig sc;
    const auto ds = generate(sc);
    EXPECT_EQ(ds.size(), 800u);
    const auto sets = compute_label_sets(ds);
    EXPECT_EQ(sets.all_classes, (std::set<int>{0, 1, 2, 3}));
    EXPECT_EQ(sets.per_domain.size(), 2u);
    for (const auto& s : ds) {
        EXPECT_TRUE(s.class_visible);
        EXPECT_TRUE(s.domain_visible);
        EXPECT_EQ(s.image.height, 32);
        for (float v : s.image.data) {
            EXPECT_GE(v, 0.0f);
            EXPECT_LE(v, 1.0f);
        }
    }
}

TEST(Synth, DeterministicGivenSeed) {
    SynthConfig sc;
    sc.samples_per_cell = 5;
    sc.seed = 42;
    const auto a = generate(sc), b = generate(sc);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].image, b[i].image);
    sc.seed = 43;
    EXPECT_NE(generate(sc)[0].image, a[0].image);
}

TEST(Synth, DomainSignalIsGlobalClassSignalIsNot) {
    SynthConfig sc;
    sc.samples_per_cell = 50;
    sc.seed = 1;
    const auto ds = generate(sc);
    EXPECT_GE(dist(mean_of(ds, 0, -1), mean_of(ds, 1, -1)), 0.1);
    for (int d = 0; d < 2; ++d)
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b) EXPECT_LT(dist(mean_of(ds, d, a), mean_of(ds, d, b)), 0.05) << d << " " << a << " " << b;
}

TEST(Synth, NearestCentroidOnChannelMeansRecoversDomains) {
    SynthConfig sc;
    sc.seed = 2;
    const auto ds = generate(sc);
    const auto c0 = mean_of(ds, 0, -1), c1 = mean_of(ds, 1, -1);
    int hits = 0;
    for (const auto& s : ds) {
        const auto m = channel_means(s.image);
        hits += ((dist(m, c0) < dist(m, c1)) ? 0 : 1) == s.domain_label ? 1 : 0;
    }
    EXPECT_GE(hits, static_cast<int>(0.99 * static_cast<double>(ds.size())));
}

TEST(Synth, ShuffleKeepsChannelMeans) {
    SynthConfig sc;
    sc.samples_per_cell = 2;
    const auto ds = generate(sc);
    Rng rng(1);
    for (const auto& s : ds) {
        const auto out = block_shuffle(s.image, GridSpec{4}, rng);
        const auto a = channel_means(s.image), b = channel_means(out);
        for (std::size_t c = 0; c < a.size(); ++c) EXPECT_NEAR(a[c], b[c], 1e-6);
    }
}

TEST(Synth, ConfigErrors) {
    SynthConfig sc;
    sc.num_classes = 9;
    EXPECT_THROW(generate(sc), Error);
    sc = SynthConfig{};
    sc.domain_styles = {{0.2, 0.4, {1, 1, 1}, 0.02}, {0.8, 0.1, {0.5, 0.5, 0.5}, 0.02}};
    EXPECT_THROW(sc.validate(), Error);
    sc.domain_styles = {{0.1, 0.9, {1, 1, 1}, 0.02}, {0.1, 0.9, {1, 1, 1}, 0.02}};
    EXPECT_THROW(sc.validate(), Error);
    sc.domain_styles = {{0.1, 0.9, {1, 1, 1}, 0.02}};
    EXPECT_THROW(sc.validate(), Error);
    sc = SynthConfig{};
    sc.channels = 2;
    EXPECT_THROW(sc.validate(), Error);
}

TEST(Synth, AllGlyphsRenderWithEqualArea) {
    SynthConfig sc;
    sc.num_classes = kGlyphCount;
    sc.num_domains = 1;
    sc.samples_per_cell = 1;
    sc.jitter = 0;
    const auto ds = generate(sc);
    ASSERT_EQ(ds.size(), static_cast<std::size_t>(kGlyphCount));
    const auto ref = channel_means(ds[0].image);
    for (const auto& s : ds) EXPECT_NEAR(channel_means(s.image)[0], ref[0], 0.01);
}

// ---------------------------------------------------------------------------

TEST(Io, PngRoundTripIsExactForQuantizedImages) {
    const auto dir = scratch("png");
    Rng rng(3);
    for (const int c : {1, 3}) {
        auto img = gda::test::random_image(7, 9, c, rng);
        quantize8(img);
        write_png(dir / "x.png", img);
        EXPECT_EQ(read_png(dir / "x.png"), img);
    }
    EXPECT_THROW(read_png(dir / "missing.png"), Error);
    fs::remove_all(dir);
}

TEST(Io, ManifestRoundTripKeepsLabelsFlagsAndPixels) {
    const auto dir = scratch("manifest");
    SynthConfig sc;
    sc.samples_per_cell = 2;
    auto ds = generate(sc);
    ds[1].class_visible = false;
    ds[2].domain_visible = false;
    const auto path = write_dataset(ds, dir);
    const auto back = read_manifest(path);
    ASSERT_EQ(back.dataset.size(), ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        EXPECT_EQ(back.dataset[i].image, ds[i].image);
        EXPECT_EQ(back.dataset[i].class_label, ds[i].class_label);
        EXPECT_EQ(back.dataset[i].domain_label, ds[i].domain_label);
        EXPECT_EQ(back.dataset[i].class_visible, ds[i].class_visible);
        EXPECT_EQ(back.dataset[i].domain_visible, ds[i].domain_visible);
    }
    fs::remove_all(dir);
}

TEST(Io, ManifestErrors) {
    const auto dir = scratch("manifest_bad");
    {
        std::ofstream(dir / "bad_header.csv") << "file,label\n";
        std::ofstream(dir / "empty.csv") << kManifestHeader << "\n";
        std::ofstream(dir / "fields.csv") << kManifestHeader << "\nimages/a.png,1,0\n";
    }
    EXPECT_THROW(read_manifest(dir / "bad_header.csv"), Error);
    EXPECT_THROW(read_manifest(dir / "empty.csv"), Error);
    EXPECT_THROW(read_manifest(dir / "fields.csv"), Error);
    EXPECT_THROW(read_manifest(dir / "nope.csv"), Error);
    fs::remove_all(dir);
}

TEST(Io, AssignmentsRoundTrip) {
    const auto dir = scratch("assign");
    const std::vector<int> a{1, 0, 2, 2, 1};
    write_assignments_csv(dir / "a.csv", a);
    EXPECT_EQ(read_assignments_csv(dir / "a.csv"), a);
    std::ofstream(dir / "gap.csv") << "sample_index,cluster\n0,1\n2,0\n";
    EXPECT_THROW(read_assignments_csv(dir / "gap.csv"), Error);
    fs::remove_all(dir);
}
