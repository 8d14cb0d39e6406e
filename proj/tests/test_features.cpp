#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <numeric>

#include "oracles.hpp"
#include "prognosis/features.hpp"
#include "prognosis/synthetic.hpp"

using namespace prognosis;

TEST_CASE("binned_stat on constant series") {
    std::vector<double> series(288, 3.5);
    CHECK(*binned_stat(series, 20, BinnedOuter::mean) == doctest::Approx(3.5));
    CHECK(*binned_stat(series, 20, BinnedOuter::sd) == doctest::Approx(0.0));
}

TEST_CASE("binned_stat equals the materialized-bin oracle") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto series = oracle::ar1_series(seed, 288, 80.0, 0.9, 2.0);
        CHECK(*binned_stat(series, 20, BinnedOuter::mean) ==
              doctest::Approx(oracle::binned(series, 20, false)).epsilon(1e-12));
        CHECK(*binned_stat(series, 20, BinnedOuter::sd) ==
              doctest::Approx(oracle::binned(series, 20, true)).epsilon(1e-12));
    }
}

TEST_CASE("binned mean equals the global mean when bins partition evenly") {
    const auto series = oracle::noise_series(3, 280);  // 280 = 20 * 14
    const double global = std::accumulate(series.begin(), series.end(), 0.0) / series.size();
    CHECK(*binned_stat(series, 20, BinnedOuter::mean) == doctest::Approx(global).epsilon(1e-12));
}

TEST_CASE("binned_stat handles the remainder-to-last-bin rule and short series") {
    std::vector<double> series{1, 2, 3, 4, 5, 6, 7};  // 3 bins: {1,2},{3,4},{5,6,7}
    CHECK(*binned_stat(series, 3, BinnedOuter::mean) ==
          doctest::Approx((1.5 + 3.5 + 6.0) / 3.0));
    CHECK_FALSE(binned_stat(std::vector<double>{1.0, 2.0}, 3, BinnedOuter::mean).has_value());
}

TEST_CASE("polvar trivial cases") {
    std::vector<double> constant(50, 5.0);
    CHECK(*polvar(constant, 3.0, 5) == 1.0);
    std::vector<double> alternating;
    for (int i = 0; i < 50; ++i) alternating.push_back(i % 2 ? 10.0 : 0.0);
    CHECK(*polvar(alternating, 5.0, 5) == 1.0);  // every increment is 10 >= 5
}

TEST_CASE("polvar equals the word-enumeration oracle exactly") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(seed);
        std::vector<double> walk(50, 0.0);
        for (std::size_t i = 1; i < walk.size(); ++i)
            walk[i] = walk[i - 1] + 4.0 * normal_draw(rng);
        for (double d : {3.0, 4.0, 5.0})
            CHECK(*polvar(walk, d, 5) == oracle::polvar(walk, d, 5));
    }
}

TEST_CASE("polvar range and invariance under constant shifts") {
    const auto series = oracle::ar1_series(5, 100, 0.0, 0.8, 2.0);
    const double v = *polvar(series, 3.0, 5);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    std::vector<double> shifted = series;
    for (auto& x : shifted) x += 123.0;
    CHECK(*polvar(shifted, 3.0, 5) == v);
}

TEST_CASE("permutation entropy of a strictly increasing series is zero") {
    std::vector<double> series(100);
    std::iota(series.begin(), series.end(), 0.0);
    CHECK(*permutation_entropy(series, 4, 2) == doctest::Approx(0.0));
}

TEST_CASE("permutation entropy is 1 when all patterns appear equally often") {
    // m = 3, tau = 1: craft a series cycling through all 6 ordinal patterns
    // equally often is fiddly; instead check the normalization on the exact
    // uniform histogram via a series of i.i.d. draws in the large-n limit
    // is close to 1, and that the bound holds.
    const auto series = oracle::noise_series(8, 4000);
    const double h = *permutation_entropy(series, 3, 1);
    CHECK(h > 0.99);
    CHECK(h <= 1.0);
}

TEST_CASE("permutation entropy equals the explicit-sort oracle") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto series = oracle::noise_series(seed, 100);
        CHECK(*permutation_entropy(series, 4, 2) ==
              doctest::Approx(oracle::permutation_entropy(series, 4, 2)).epsilon(1e-12));
        CHECK(*permutation_entropy(series, 5, 2) ==
              doctest::Approx(oracle::permutation_entropy(series, 5, 2)).epsilon(1e-12));
    }
}

TEST_CASE("permutation entropy ties break by earlier index and stay affine-invariant") {
    std::vector<double> with_ties{1.0, 1.0, 2.0, 1.0, 3.0, 3.0, 2.0, 1.0, 1.0, 2.0};
    const double base = *permutation_entropy(with_ties, 3, 1);
    CHECK(base == doctest::Approx(oracle::permutation_entropy(with_ties, 3, 1)).epsilon(1e-12));
    std::vector<double> scaled;
    for (double v : with_ties) scaled.push_back(2.5 * v + 7.0);
    CHECK(*permutation_entropy(scaled, 3, 1) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("too-short series produce missing specialty statistics") {
    std::vector<double> tiny{1.0, 2.0, 3.0};
    CHECK_FALSE(polvar(tiny, 3.0, 5).has_value());
    CHECK_FALSE(permutation_entropy(tiny, 4, 2).has_value());
}

TEST_CASE("basic_stats on a constant series") {
    std::vector<double> series(50, 4.0);
    const auto s = basic_stats(series);
    CHECK(*s.mean == 4.0);
    CHECK(*s.sd == 0.0);
    CHECK(*s.slope == 0.0);
    CHECK(*s.range == 0.0);
    CHECK_FALSE(s.acf1.has_value());
}

TEST_CASE("basic_stats recovers a pure line") {
    std::vector<double> series;
    for (int t = 0; t < 100; ++t) series.push_back(2.0 * t);
    CHECK(*basic_stats(series).slope == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("basic_stats matches naive-formula oracles") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto series = oracle::noise_series(seed, 120, 10.0, 4.0);
        const auto s = basic_stats(series);
        const double mean = std::accumulate(series.begin(), series.end(), 0.0) / series.size();
        CHECK(*s.mean == doctest::Approx(mean).epsilon(1e-12));
        double ss = 0.0;
        for (double v : series) ss += (v - mean) * (v - mean);
        CHECK(*s.sd == doctest::Approx(std::sqrt(ss / (series.size() - 1))).epsilon(1e-12));
        CHECK(*s.min == *std::min_element(series.begin(), series.end()));
        CHECK(*s.max == *std::max_element(series.begin(), series.end()));
        CHECK(*s.first == series.front());
        CHECK(*s.last == series.back());
        CHECK(*s.range == *s.max - *s.min);
        CHECK(*s.slope == doctest::Approx(*oracle::slope(series)).epsilon(1e-10));
        CHECK(*s.acf1 == doctest::Approx(*oracle::acf1(series)).epsilon(1e-12));
    }
}

namespace {

PreprocessedCohort tiny_cohort() {
    SyntheticConfig cfg;
    cfg.n_patients = 10;
    cfg.missing_rate = 0.02;
    const auto [ds, labels] = generate_synthetic_cohort(cfg, 77);
    return preprocess_cohort(ds, BoundsTable::clinical_defaults(), {}, 1);
}

}  // namespace

TEST_CASE("extract_features: shape, determinism, and duplicate-signal rows") {
    const auto cohort = tiny_cohort();
    const auto catalog = FeatureCatalog::default_catalog();
    const auto m = extract_features(cohort, catalog, 1);
    CHECK(m.n_rows() == cohort.patient_ids.size());
    CHECK(m.n_cols() == catalog.descriptors.size());

    const auto m2 = extract_features(cohort, catalog, 1);
    CHECK(m.values == m2.values);

    // identical signals produce identical rows
    PreprocessedCohort twins;
    twins.patient_ids = {"t1", "t2"};
    twins.signals["t1"] = cohort.signals.at(cohort.patient_ids[0]);
    twins.signals["t2"] = cohort.signals.at(cohort.patient_ids[0]);
    const auto tm = extract_features(twins, catalog, 1);
    for (std::size_t c = 0; c < tm.n_cols(); ++c) {
        const double a = tm.at(0, c);
        const double b = tm.at(1, c);
        CHECK(((std::isnan(a) && std::isnan(b)) || a == b));
    }
}

TEST_CASE("parallel extraction equals sequential extraction bit-for-bit") {
    const auto cohort = tiny_cohort();
    const auto catalog = FeatureCatalog::default_catalog();
    const auto seq = extract_features(cohort, catalog, 1);
    const auto par = extract_features(cohort, catalog, 4);
    REQUIRE(seq.values.size() == par.values.size());
    for (std::size_t i = 0; i < seq.values.size(); ++i) {
        if (std::isnan(seq.values[i])) CHECK(std::isnan(par.values[i]));
        else CHECK(seq.values[i] == par.values[i]);
    }
}

TEST_CASE("catalog JSON round-trips and validates") {
    const auto catalog = FeatureCatalog::default_catalog();
    const auto text = catalog.to_json_string();
    const auto back = FeatureCatalog::from_json_string(text);
    REQUIRE(back.descriptors.size() == catalog.descriptors.size());
    for (std::size_t i = 0; i < catalog.descriptors.size(); ++i) {
        CHECK(back.descriptors[i].name == catalog.descriptors[i].name);
        CHECK(back.descriptors[i].kind == catalog.descriptors[i].kind);
        CHECK(back.descriptors[i].start_slot == catalog.descriptors[i].start_slot);
    }

    FeatureCatalog dup = catalog;
    dup.descriptors.push_back(dup.descriptors.front());
    CHECK_THROWS_AS(dup.validate(), ConfigError);

    CHECK_THROWS_AS(FeatureCatalog::from_json_string(
                        R"({"features":[{"name":"x","channel":"ecg","window":[0,288],"statistic":"mean","params":{}}]})"),
                    ConfigError);
}

TEST_CASE("catalog windows drive the evaluated slice") {
    PreprocessedCohort cohort;
    cohort.patient_ids = {"p"};
    PtsSignal sig(Channel::hr);
    for (int t = 0; t < kSlotsPerDay; ++t) {
        sig.values[t] = t < 144 ? 10.0 : 20.0;
        sig.mask[t] = SlotState::observed;
    }
    cohort.signals["p"][Channel::hr] = sig;

    FeatureCatalog cat;
    FeatureDescriptor h1{"hr_mean_h1", Channel::hr, 0, 144, StatKind::mean, {}};
    FeatureDescriptor h2{"hr_mean_h2", Channel::hr, 144, 288, StatKind::mean, {}};
    cat.descriptors = {h1, h2};
    const auto m = extract_features(cohort, cat, 1);
    CHECK(m.at(0, 0) == 10.0);
    CHECK(m.at(0, 1) == 20.0);
}

TEST_CASE("feature matrix CSV round-trip preserves values and missingness") {
    const auto cohort = tiny_cohort();
    const auto m = extract_features(cohort, FeatureCatalog::compact_catalog(), 1);
    const auto path = "/tmp/prognosis_features_rt.csv";
    write_feature_matrix(m, path, "test");
    const auto back = load_feature_matrix(path);
    REQUIRE(back.n_rows() == m.n_rows());
    REQUIRE(back.feature_names == m.feature_names);
    for (std::size_t i = 0; i < m.values.size(); ++i) {
        if (std::isnan(m.values[i])) CHECK(std::isnan(back.values[i]));
        else CHECK(back.values[i] == m.values[i]);
    }
    std::remove(path);
}
