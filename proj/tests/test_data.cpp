#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

#include "faml/data.hpp"
#include "faml/errors.hpp"
#include "faml/rng.hpp"

using namespace faml;
namespace fs = std::filesystem;

namespace {

SynthSpec tiny_spec() {
    SynthSpec spec;
    spec.num_classes = 3;
    spec.num_views = 2;
    spec.dims = {4, 6};
    spec.samples_per_class = 40;
    spec.separation = 3.0;
    spec.seed = 9;
    return spec;
}

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "faml_data_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_SUITE("data") {

TEST_CASE("synthetic generator shape, determinism and labeling") {
    const auto spec = tiny_spec();
    const auto ds = synth_generate(spec);
    CHECK(ds.num_views() == 2);
    CHECK(ds.size() == 120);
    CHECK(ds.num_classes == 3);
    CHECK(ds.views[0].cols == 4);
    CHECK(ds.views[1].cols == 6);
    CHECK(ds.views[0].rows == 120);
    CHECK(ds.class_counts() == std::vector<std::size_t>{40, 40, 40});
    CHECK_NOTHROW(ds.validate());

    const auto again = synth_generate(spec);
    CHECK(dataset_checksum(again) == dataset_checksum(ds));

    auto reseeded = spec;
    reseeded.seed = 10;
    CHECK(dataset_checksum(synth_generate(reseeded)) != dataset_checksum(ds));

    SynthSpec bad = spec;
    bad.dims = {4};
    CHECK_THROWS_AS(synth_generate(bad), ConfigError);
}

TEST_CASE("well-separated clusters are nearest-centroid classifiable") {
    SynthSpec spec = tiny_spec();
    spec.separation = 10.0;
    spec.samples_per_class = 60;
    const auto ds = synth_generate(spec);

    // per-class centroid of the concatenated views, then 1-NN on centroids
    const std::size_t d = ds.views[0].cols + ds.views[1].cols;
    std::vector<Vec> centroid(3, Vec(d, 0.0));
    std::vector<std::size_t> counts(3, 0);
    for (std::size_t n = 0; n < ds.size(); ++n) {
        const auto y = ds.labels[n];
        ++counts[y];
        for (std::size_t j = 0; j < ds.views[0].cols; ++j)
            centroid[y][j] += ds.views[0].at(n, j);
        for (std::size_t j = 0; j < ds.views[1].cols; ++j)
            centroid[y][ds.views[0].cols + j] += ds.views[1].at(n, j);
    }
    for (std::size_t c = 0; c < 3; ++c)
        for (double& x : centroid[c])
            x /= static_cast<double>(counts[c]);

    std::size_t hits = 0;
    for (std::size_t n = 0; n < ds.size(); ++n) {
        double best = 1e300;
        std::size_t arg = 0;
        for (std::size_t c = 0; c < 3; ++c) {
            double dist = 0.0;
            for (std::size_t j = 0; j < ds.views[0].cols; ++j) {
                const double diff = ds.views[0].at(n, j) - centroid[c][j];
                dist += diff * diff;
            }
            for (std::size_t j = 0; j < ds.views[1].cols; ++j) {
                const double diff = ds.views[1].at(n, j) - centroid[c][ds.views[0].cols + j];
                dist += diff * diff;
            }
            if (dist < best) {
                best = dist;
                arg = c;
            }
        }
        hits += arg == ds.labels[n] ? 1 : 0;
    }
    CHECK(static_cast<double>(hits) / static_cast<double>(ds.size()) >= 0.99);
}

TEST_CASE("stratified split proportions, disjointness and determinism") {
    const auto ds = synth_generate(tiny_spec());
    const auto [train, test] = stratified_split(ds, 0.25, 31);
    CHECK(train.size() == 90);
    CHECK(test.size() == 30);
    CHECK(train.class_counts() == std::vector<std::size_t>{30, 30, 30});
    CHECK(test.class_counts() == std::vector<std::size_t>{10, 10, 10});

    std::set<std::size_t> train_src(train.source_indices.begin(), train.source_indices.end());
    std::set<std::size_t> test_src(test.source_indices.begin(), test.source_indices.end());
    CHECK(train_src.size() == train.size());
    CHECK(test_src.size() == test.size());
    for (auto i : test_src)
        CHECK(train_src.count(i) == 0);
    CHECK(train_src.size() + test_src.size() == ds.size());

    // rows keep their original relative order
    CHECK(std::is_sorted(train.source_indices.begin(), train.source_indices.end()));
    CHECK(std::is_sorted(test.source_indices.begin(), test.source_indices.end()));

    const auto [train2, test2] = stratified_split(ds, 0.25, 31);
    CHECK(dataset_checksum(train2) == dataset_checksum(train));
    CHECK(dataset_checksum(test2) == dataset_checksum(test));
    const auto [train3, test3] = stratified_split(ds, 0.25, 32);
    CHECK(dataset_checksum(train3) != dataset_checksum(train));

    CHECK_THROWS_AS(stratified_split(ds, 1.0, 1), ConfigError);
    CHECK_THROWS_AS(stratified_split(ds, -0.1, 1), ConfigError);
}

TEST_CASE("split keeps at least one sample per class on both sides") {
    SynthSpec spec = tiny_spec();
    spec.samples_per_class = 2;
    const auto ds = synth_generate(spec);
    const auto [train, test] = stratified_split(ds, 0.2, 5);
    // llround(0.4) would be 0; the clamp forces one test row per class
    CHECK(test.class_counts() == std::vector<std::size_t>{1, 1, 1});
    CHECK(train.class_counts() == std::vector<std::size_t>{1, 1, 1});

    SynthSpec lone = tiny_spec();
    lone.samples_per_class = 1;
    CHECK_THROWS_AS(stratified_split(synth_generate(lone), 0.2, 5), DataError);
}

TEST_CASE("pareto subsampling hits the published counts") {
    SynthSpec spec = tiny_spec();
    spec.samples_per_class = 100;
    const auto ds = synth_generate(spec);
    const auto tail = pareto_subsample(ds, 10.0, 3);
    auto counts = tail.class_counts();
    std::sort(counts.begin(), counts.end());
    // N_max * rho^(-r/(K-1)) for r = 0, 1, 2: 100, 31.6 -> 32, 10
    CHECK(counts == std::vector<std::size_t>{10, 32, 100});
    CHECK_NOTHROW(tail.validate());

    // which class got which rank is seed-driven
    const auto other = pareto_subsample(ds, 10.0, 4);
    CHECK(other.size() == tail.size());

    // rho = 1 keeps everything
    const auto kept = pareto_subsample(ds, 1.0, 3);
    CHECK(kept.class_counts() == std::vector<std::size_t>{100, 100, 100});
    CHECK(dataset_checksum(kept) == dataset_checksum(ds));

    CHECK_THROWS_AS(pareto_subsample(ds, 0.5, 3), ConfigError);
}

TEST_CASE("pareto subsampled rows come from the source dataset unchanged") {
    const auto ds = synth_generate(tiny_spec());
    const auto tail = pareto_subsample(ds, 10.0, 8);
    for (std::size_t n = 0; n < tail.size(); ++n) {
        const auto src = tail.source_indices[n];
        REQUIRE(src < ds.size());
        CHECK(tail.labels[n] == ds.labels[src]);
        for (std::size_t v = 0; v < 2; ++v)
            for (std::size_t j = 0; j < ds.views[v].cols; ++j)
                CHECK(tail.views[v].at(n, j) == ds.views[v].at(src, j));
    }
}

TEST_CASE("region partition thirds with deterministic tie-breaks") {
    {
        // counts descending by class index after sorting
        const auto part = region_partition({50, 40, 30, 20, 10, 5, 4, 3, 2});
        CHECK(part.head == std::vector<std::size_t>{0, 1, 2});
        CHECK(part.medium == std::vector<std::size_t>{3, 4, 5});
        CHECK(part.tail == std::vector<std::size_t>{6, 7, 8});
        CHECK(part.region_of(0) == 0);
        CHECK(part.region_of(4) == 1);
        CHECK(part.region_of(8) == 2);
    }
    {
        // K = 10: sizes 4 / 3 / 3
        const auto part = region_partition({10, 9, 8, 7, 6, 5, 4, 3, 2, 1});
        CHECK(part.head.size() == 4);
        CHECK(part.medium.size() == 3);
        CHECK(part.tail.size() == 3);
    }
    {
        // K = 4: sizes 2 / 1 / 1
        const auto part = region_partition({4, 3, 2, 1});
        CHECK(part.head == std::vector<std::size_t>{0, 1});
        CHECK(part.medium == std::vector<std::size_t>{2});
        CHECK(part.tail == std::vector<std::size_t>{3});
    }
    {
        // ties resolve toward the smaller class index
        const auto part = region_partition({7, 7, 7});
        CHECK(part.head == std::vector<std::size_t>{0});
        CHECK(part.medium == std::vector<std::size_t>{1});
        CHECK(part.tail == std::vector<std::size_t>{2});
    }
    CHECK_THROWS_AS(region_partition({5, 5}), DataError);
    const auto part = region_partition({3, 2, 1});
    CHECK_THROWS_AS(part.region_of(9), DataError);
}

TEST_CASE("csv save/load round trip preserves the dataset") {
    const auto dir = fresh_dir("roundtrip");
    const auto ds = synth_generate(tiny_spec());
    save_multiview(ds, dir);
    CHECK(fs::exists(dir / "view_0.csv"));
    CHECK(fs::exists(dir / "view_1.csv"));
    CHECK(fs::exists(dir / "labels.csv"));

    const auto loaded = load_multiview(dir);
    CHECK(loaded.labels == ds.labels);
    CHECK(loaded.num_classes == ds.num_classes);
    CHECK(dataset_checksum(loaded) == dataset_checksum(ds));
    fs::remove_all(dir.parent_path());
}

TEST_CASE("loader failure modes carry precise diagnostics") {
    const auto dir = fresh_dir("bad_inputs");

    SUBCASE("missing view file") {
        std::ofstream(dir / "labels.csv") << "0\n";
        CHECK_THROWS_WITH_AS(load_multiview(dir),
                             doctest::Contains("missing view file"), DataError);
    }
    SUBCASE("missing labels") {
        std::ofstream(dir / "view_0.csv") << "1.0,2.0\n";
        CHECK_THROWS_WITH_AS(load_multiview(dir),
                             doctest::Contains("missing label file"), DataError);
    }
    SUBCASE("ragged row names the row") {
        std::ofstream(dir / "view_0.csv") << "1.0,2.0\n3.0\n";
        std::ofstream(dir / "labels.csv") << "0\n1\n";
        CHECK_THROWS_WITH_AS(load_multiview(dir), doctest::Contains("ragged row 1"),
                             DataError);
    }
    SUBCASE("non-numeric cell names file, row and column") {
        std::ofstream(dir / "view_0.csv") << "1.0,2.0\n3.0,oops\n";
        std::ofstream(dir / "labels.csv") << "0\n1\n";
        try {
            load_multiview(dir);
            FAIL("expected a DataError");
        } catch (const DataError& err) {
            const std::string what = err.what();
            CHECK(what.find("view_0.csv") != std::string::npos);
            CHECK(what.find("row 1") != std::string::npos);
            CHECK(what.find("column 1") != std::string::npos);
        }
    }
    SUBCASE("row count mismatch names both files") {
        std::ofstream(dir / "view_0.csv") << "1.0\n2.0\n";
        std::ofstream(dir / "labels.csv") << "0\n";
        try {
            load_multiview(dir);
            FAIL("expected a DataError");
        } catch (const DataError& err) {
            const std::string what = err.what();
            CHECK(what.find("view_0.csv") != std::string::npos);
            CHECK(what.find("labels.csv") != std::string::npos);
        }
    }
    SUBCASE("bad label value") {
        std::ofstream(dir / "view_0.csv") << "1.0\n2.0\n";
        std::ofstream(dir / "labels.csv") << "0\n-3\n";
        CHECK_THROWS_AS(load_multiview(dir), DataError);
    }
    fs::remove_all(dir.parent_path());
}

TEST_CASE("normalization uses train statistics and flags constant columns") {
    auto ds = synth_generate(tiny_spec());
    // make one column constant
    for (std::size_t n = 0; n < ds.size(); ++n)
        ds.views[0].at(n, 2) = 5.0;

    const auto stats = fit_normalization(ds);
    CHECK(stats.source_checksum == dataset_checksum(ds));
    CHECK(stats.mean[0][2] == doctest::Approx(5.0));
    CHECK(stats.stddev[0][2] == doctest::Approx(1.0)); // sigma < 1e-12 -> 1.0

    auto normalized = ds;
    apply_normalization(normalized, stats);
    for (std::size_t v = 0; v < 2; ++v) {
        for (std::size_t j = 0; j < ds.views[v].cols; ++j) {
            double mean = 0.0, var = 0.0;
            for (std::size_t n = 0; n < ds.size(); ++n)
                mean += normalized.views[v].at(n, j);
            mean /= static_cast<double>(ds.size());
            for (std::size_t n = 0; n < ds.size(); ++n) {
                const double c = normalized.views[v].at(n, j) - mean;
                var += c * c;
            }
            var /= static_cast<double>(ds.size());
            CHECK(std::fabs(mean) < 1e-9);
            if (v == 0 && j == 2)
                CHECK(std::fabs(var) < 1e-9); // constant column stays constant
            else
                CHECK(var == doctest::Approx(1.0).epsilon(1e-6));
        }
    }

    MultiViewDataset other = synth_generate(tiny_spec());
    other.views.pop_back();
    CHECK_THROWS_AS(apply_normalization(other, stats), DimensionError);
}

TEST_CASE("checksum reacts to any label or feature change") {
    const auto ds = synth_generate(tiny_spec());
    auto mutated = ds;
    mutated.labels[3] = (mutated.labels[3] + 1) % 3;
    CHECK(dataset_checksum(mutated) != dataset_checksum(ds));

    mutated = ds;
    mutated.views[1].at(7, 1) += 1e-12;
    CHECK(dataset_checksum(mutated) != dataset_checksum(ds));
}

TEST_CASE("dataset validation catches misalignment") {
    auto ds = synth_generate(tiny_spec());
    ds.labels.pop_back();
    CHECK_THROWS_AS(ds.validate(), DataError);

    auto ds2 = synth_generate(tiny_spec());
    ds2.labels[0] = 99;
    CHECK_THROWS_AS(ds2.validate(), DataError);

    auto ds3 = synth_generate(tiny_spec());
    ds3.source_indices.pop_back();
    CHECK_THROWS_AS(ds3.validate(), DataError);
}

} // TEST_SUITE
