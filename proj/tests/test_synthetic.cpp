#include <doctest.h>

#include <cmath>

#include "prognosis/metrics.hpp"
#include "prognosis/pts.hpp"
#include "prognosis/synthetic.hpp"

using namespace prognosis;

TEST_CASE("synthetic cohort is deterministic given (config, seed)") {
    SyntheticConfig cfg;
    cfg.n_patients = 25;
    const auto [ds1, labels1] = generate_synthetic_cohort(cfg, 42);
    const auto [ds2, labels2] = generate_synthetic_cohort(cfg, 42);
    REQUIRE(ds1.patients.size() == ds2.patients.size());
    for (std::size_t i = 0; i < ds1.patients.size(); ++i) {
        CHECK(ds1.patients[i].patient_id == ds2.patients[i].patient_id);
        CHECK(ds1.patients[i].icu_los_hours == ds2.patients[i].icu_los_hours);
    }
    for (const auto& [id, channels] : ds1.vitals) {
        const auto& other = ds2.vitals.at(id);
        for (const auto& [chan, series] : channels) {
            const auto& os = other.at(chan);
            REQUIRE(series.size() == os.size());
            for (std::size_t k = 0; k < series.size(); ++k) {
                CHECK(series[k].offset_minutes == os[k].offset_minutes);
                CHECK(series[k].value == os[k].value);
            }
        }
    }
    for (std::size_t i = 0; i < labels1.size(); ++i) CHECK(labels1.neuro[i] == labels2.neuro[i]);

    const auto [ds3, labels3] = generate_synthetic_cohort(cfg, 43);
    bool any_diff = false;
    for (std::size_t i = 0; i < labels1.size() && !any_diff; ++i)
        any_diff = labels1.neuro[i] != labels3.neuro[i];
    CHECK(any_diff);
}

TEST_CASE("per-patient streams are prefix-consistent") {
    SyntheticConfig big;
    big.n_patients = 40;
    SyntheticConfig small = big;
    small.n_patients = 20;
    const auto [ds_big, lab_big] = generate_synthetic_cohort(big, 9);
    const auto [ds_small, lab_small] = generate_synthetic_cohort(small, 9);
    for (int i = 0; i < small.n_patients; ++i) {
        CHECK(ds_big.patients[i].patient_id == ds_small.patients[i].patient_id);
        CHECK(ds_big.patients[i].icu_los_hours == ds_small.patients[i].icu_los_hours);
        CHECK(lab_big.neuro[i] == lab_small.neuro[i]);
        const auto& vb = ds_big.vitals.at(ds_big.patients[i].patient_id);
        const auto& vs = ds_small.vitals.at(ds_small.patients[i].patient_id);
        for (const auto& [chan, series] : vb) {
            const auto& os = vs.at(chan);
            REQUIRE(series.size() == os.size());
            for (std::size_t k = 0; k < series.size(); ++k)
                CHECK(series[k].value == os[k].value);
        }
    }
}

TEST_CASE("zero effect sizes leave no learnable signal in the latent draws") {
    SyntheticConfig cfg;
    cfg.n_patients = 1000;
    cfg.ehr_effect = 0.0;
    cfg.pts_effect = 0.0;
    cfg.ehr_missing_rate = 0.0;
    const auto [ds, labels] = generate_synthetic_cohort(cfg, 5);

    // the oracle classifier scores by the (now-uninformative) planted column
    const auto& col = ds.ehr.columns[ds.ehr.column_index(cfg.planted_ehr_column)];
    std::vector<double> scores;
    std::vector<int> y;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        scores.push_back(-col.numeric[i]);
        y.push_back(labels.neuro[i] == NeuroLabel::favorable ? 1 : 0);
    }
    const double a = auc(scores, y);
    // Bayes-optimal AUC is 0.5; sampling noise over 1000 patients is ~0.02
    CHECK(a > 0.44);
    CHECK(a < 0.56);
}

TEST_CASE("default class balance mirrors the target proportions") {
    SyntheticConfig cfg;
    cfg.n_patients = 2000;
    const auto [ds, labels] = generate_synthetic_cohort(cfg, 12);
    std::size_t favorable = 0, died = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        favorable += labels.neuro[i] == NeuroLabel::favorable;
        died += labels.survival[i] == DischargeStatus::died;
    }
    const double frac = double(favorable) / double(labels.size());
    CHECK(frac == doctest::Approx(1046.0 / 2216.0).epsilon(0.08));
    const double died_frac = double(died) / double(labels.size());
    CHECK(died_frac == doctest::Approx(894.0 / 2216.0).epsilon(0.12));
    // labels partition the cohort and death forces unfavorable
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels.survival[i] == DischargeStatus::died)
            CHECK(labels.neuro[i] == NeuroLabel::unfavorable);
}

TEST_CASE("vitals land on the 5-minute grid with 288 slots worth of offsets") {
    SyntheticConfig cfg;
    cfg.n_patients = 10;
    cfg.missing_rate = 0.0;
    cfg.artifact_rate = 0.0;
    const auto [ds, labels] = generate_synthetic_cohort(cfg, 3);
    for (const auto& [id, channels] : ds.vitals) {
        for (const auto& [chan, series] : channels) {
            REQUIRE(series.size() == 288);
            for (std::size_t k = 0; k < series.size(); ++k) {
                CHECK(series[k].offset_minutes == static_cast<int>(k) * 5);
                CHECK(series[k].value.has_value());
            }
        }
    }
}

TEST_CASE("invalid synthetic configs are rejected") {
    SyntheticConfig cfg;
    cfg.n_patients = 5;
    CHECK_THROWS_AS(generate_synthetic_cohort(cfg, 1), ConfigError);
    SyntheticConfig neg;
    neg.missing_rate = -0.1;
    CHECK_THROWS_AS(generate_synthetic_cohort(neg, 1), ConfigError);
    SyntheticConfig bad_phi;
    bad_phi.channel_params[Channel::hr].phi = 1.0;
    CHECK_THROWS_AS(generate_synthetic_cohort(bad_phi, 1), ConfigError);
}

TEST_CASE("artifact injection produces out-of-bound samples at roughly the configured rate") {
    SyntheticConfig cfg;
    cfg.n_patients = 30;
    cfg.missing_rate = 0.0;
    cfg.artifact_rate = 0.02;
    const auto [ds, labels] = generate_synthetic_cohort(cfg, 8);
    std::size_t out_of_bounds = 0, total = 0;
    const auto bounds = BoundsTable::clinical_defaults();
    for (const auto& [id, channels] : ds.vitals) {
        for (const auto& [chan, series] : channels) {
            const auto& b = bounds.at(chan);
            for (const auto& s : series) {
                ++total;
                if (*s.value < b.lower || *s.value > b.upper) ++out_of_bounds;
            }
        }
    }
    const double rate = double(out_of_bounds) / double(total);
    CHECK(rate > 0.01);
    CHECK(rate < 0.12);
}
