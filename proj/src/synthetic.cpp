#include "prognosis/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "prognosis/pts.hpp"
#include "prognosis/rng.hpp"

namespace prognosis {

namespace {

enum Stream : std::uint64_t {
    kOutcome = 1,
    kAdmission = 2,
    kEhr = 3,
    kVitalsBase = 10,  // + channel index
    kChartBase = 20,   // + channel index
};

Rng patient_rng(std::uint64_t seed, int patient, std::uint64_t stream) {
    return Rng(derive_seed(seed, static_cast<std::uint64_t>(patient), stream));
}

std::string patient_id_for(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "p%05d", i);
    return buf;
}

}  // namespace

SyntheticConfig::SyntheticConfig() {
    channel_params[Channel::hr] = {82.0, 0.97, 1.2, 9.0};
    channel_params[Channel::rr] = {18.0, 0.95, 0.5, 2.5};
    channel_params[Channel::sbp] = {120.0, 0.96, 1.5, 10.0};
    channel_params[Channel::dbp] = {65.0, 0.96, 1.0, 6.0};
    channel_params[Channel::spo2] = {96.5, 0.90, 0.35, 1.0};
}

void SyntheticConfig::validate() const {
    if (n_patients < 10) throw ConfigError("synthetic: n_patients must be >= 10");
    if (favorable_fraction <= 0.0 || favorable_fraction >= 1.0)
        throw ConfigError("synthetic: favorable_fraction must be in (0, 1)");
    if (died_given_unfavorable < 0.0 || died_given_unfavorable > 1.0)
        throw ConfigError("synthetic: died_given_unfavorable must be in [0, 1]");
    for (double r : {missing_rate, artifact_rate, ehr_missing_rate, sparse_column_missing_rate,
                     chart_missing_rate, chart_uncorrelated_rate, inclusion_violation_rate})
        if (r < 0.0 || r > 1.0) throw ConfigError("synthetic: rates must be in [0, 1]");
    if (ehr_effect < 0.0 || pts_effect < 0.0)
        throw ConfigError("synthetic: effect sizes must be non-negative");
    if (n_noise_ehr_columns < 0) throw ConfigError("synthetic: n_noise_ehr_columns must be >= 0");
    if (chart_period_slots < 1) throw ConfigError("synthetic: chart_period_slots must be >= 1");
    if (chart_noise_sd < 0.0) throw ConfigError("synthetic: chart_noise_sd must be >= 0");
    for (Channel c : kChannels) {
        auto it = channel_params.find(c);
        if (it == channel_params.end())
            throw ConfigError(std::string("synthetic: missing AR parameters for channel ") +
                              to_string(c));
        if (std::abs(it->second.phi) >= 1.0)
            throw ConfigError("synthetic: |phi| must be < 1 for stationarity");
        if (it->second.sigma < 0.0) throw ConfigError("synthetic: sigma must be >= 0");
        if (it->second.mean_jitter < 0.0)
            throw ConfigError("synthetic: mean_jitter must be >= 0");
    }
    if (sigma_log_jitter < 0.0) throw ConfigError("synthetic: sigma_log_jitter must be >= 0");
}

std::pair<CohortDataset, LabelTable> generate_synthetic_cohort(const SyntheticConfig& config,
                                                               std::uint64_t seed) {
    config.validate();
    const BoundsTable bounds = BoundsTable::clinical_defaults();

    CohortDataset ds;
    LabelTable labels;

    // EHR layout: planted column, noise markers, age, one categorical, one
    // sparse column that the >40% missingness rule should drop.
    std::vector<std::string> ehr_names;
    ehr_names.push_back(config.planted_ehr_column);
    for (int j = 0; j < config.n_noise_ehr_columns; ++j) {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "marker_%02d", j);
        ehr_names.emplace_back(buf);
    }
    ehr_names.emplace_back("age");
    ehr_names.emplace_back("sparse_marker");
    for (const auto& name : ehr_names) {
        EhrColumn col;
        col.name = name;
        col.type = ColumnType::numeric;
        ds.ehr.columns.push_back(std::move(col));
    }
    {
        EhrColumn unit;
        unit.name = "admit_unit";
        unit.type = ColumnType::categorical;
        ds.ehr.columns.push_back(std::move(unit));
    }
    static const char* kUnits[3] = {"micu", "sicu", "ccu"};

    for (int i = 0; i < config.n_patients; ++i) {
        const std::string id = patient_id_for(i);

        Rng outcome_rng = patient_rng(seed, i, kOutcome);
        const bool favorable = bernoulli(outcome_rng, config.favorable_fraction);
        const bool died = !favorable && bernoulli(outcome_rng, config.died_given_unfavorable);

        PatientRecord p;
        p.patient_id = id;
        Rng adm = patient_rng(seed, i, kAdmission);
        p.icu_los_hours = uniform_range(adm, 30.0, 200.0);
        p.intubated = true;
        p.outcome_offset_hours = uniform_range(adm, 0.0, 20.0);
        if (bernoulli(adm, config.inclusion_violation_rate)) {
            switch (bounded(adm, 3)) {
                case 0: p.icu_los_hours = uniform_range(adm, 2.0, 24.0); break;
                case 1: p.intubated = false; break;
                default: p.outcome_offset_hours = uniform_range(adm, 25.0, 72.0); break;
            }
        }
        p.discharge_status = died ? DischargeStatus::died : DischargeStatus::alive;
        if (favorable) {
            p.mgcs_at_discharge = 6;
        } else if (!died) {
            p.mgcs_at_discharge = 1 + static_cast<int>(bounded(adm, 5));
        } else if (!bernoulli(adm, 0.5)) {
            p.mgcs_at_discharge = 1 + static_cast<int>(bounded(adm, 6));
        }
        ds.patients.push_back(p);

        labels.patient_ids.push_back(id);
        labels.neuro.push_back(favorable ? NeuroLabel::favorable : NeuroLabel::unfavorable);
        labels.survival.push_back(p.discharge_status);

        // EHR row
        Rng ehr_rng = patient_rng(seed, i, kEhr);
        ds.ehr.patient_ids.push_back(id);
        for (auto& col : ds.ehr.columns) {
            if (col.name == "admit_unit") {
                col.labels.push_back(kUnits[bounded(ehr_rng, 3)]);
                col.numeric.push_back(0.0);
                col.missing.push_back(bernoulli(ehr_rng, config.ehr_missing_rate) ? 1 : 0);
                continue;
            }
            double v;
            double miss_rate = config.ehr_missing_rate;
            if (col.name == config.planted_ehr_column) {
                v = 2.0 + normal_draw(ehr_rng) + (favorable ? 0.0 : config.ehr_effect);
            } else if (col.name == "age") {
                v = std::clamp(62.0 + 15.0 * normal_draw(ehr_rng), 18.0, 95.0);
            } else if (col.name == "sparse_marker") {
                v = normal_draw(ehr_rng);
                miss_rate = config.sparse_column_missing_rate;
            } else {
                v = normal_draw(ehr_rng);
            }
            col.numeric.push_back(v);
            col.labels.emplace_back();
            col.missing.push_back(bernoulli(ehr_rng, miss_rate) ? 1 : 0);
        }

        // Vitals: stationary AR(1) per channel, clamped into clinical
        // bounds, then artifacts and missingness injected.
        ChannelSeries vitals;
        ChannelSeries chart;
        for (std::size_t ci = 0; ci < kChannels.size(); ++ci) {
            const Channel chan = kChannels[ci];
            const ArParams& ar = config.channel_params.at(chan);
            const Bounds& b = bounds.at(chan);

            Rng vit = patient_rng(seed, i, kVitalsBase + ci);
            const double level = std::clamp(ar.mean + ar.mean_jitter * normal_draw(vit),
                                            b.lower, b.upper);
            double sigma = ar.sigma * std::exp(config.sigma_log_jitter * normal_draw(vit));
            if (chan == Channel::hr && favorable) sigma *= 1.0 + config.pts_effect;

            std::vector<double> clean(kSlotsPerDay);
            const double stat_sd = sigma / std::sqrt(1.0 - ar.phi * ar.phi);
            double x = level + stat_sd * normal_draw(vit);
            for (int t = 0; t < kSlotsPerDay; ++t) {
                if (t > 0) x = level + ar.phi * (x - level) + sigma * normal_draw(vit);
                clean[t] = std::clamp(x, b.lower, b.upper);
            }

            RawSeries series(kSlotsPerDay);
            for (int t = 0; t < kSlotsPerDay; ++t) {
                series[t].offset_minutes = t * kSlotMinutes;
                series[t].value = clean[t];
            }
            const double range = b.upper - b.lower;
            int t = 0;
            while (t < kSlotsPerDay) {
                if (bernoulli(vit, config.artifact_rate)) {
                    const int len = bernoulli(vit, 0.5) ? 1 : 2 + static_cast<int>(bounded(vit, 5));
                    const bool high = bernoulli(vit, 0.5);
                    const double excess = uniform_range(vit, 0.05, 0.30) * range;
                    const double value = high ? b.upper + excess : b.lower - excess;
                    for (int u = t; u < std::min(t + len, kSlotsPerDay); ++u)
                        series[u].value = value;
                    t += len;
                } else {
                    ++t;
                }
            }
            RawSeries kept;
            for (auto& s : series)
                if (!bernoulli(vit, config.missing_rate)) kept.push_back(s);
            vitals[chan] = std::move(kept);

            // Nurse chart: sparse copies of the clean signal (or pure noise
            // for uncorrelated patients) on the same offset axis.
            Rng ch = patient_rng(seed, i, kChartBase + ci);
            const bool uncorrelated = bernoulli(ch, config.chart_uncorrelated_rate);
            RawSeries chart_series;
            for (int slot = 0; slot < kSlotsPerDay; slot += config.chart_period_slots) {
                if (bernoulli(ch, config.chart_missing_rate)) continue;
                const double base = uncorrelated ? ar.mean + 2.0 * stat_sd * normal_draw(ch)
                                                 : clean[slot];
                RawSample s;
                s.offset_minutes = slot * kSlotMinutes;
                s.value = base + config.chart_noise_sd * normal_draw(ch);
                chart_series.push_back(s);
            }
            if (!chart_series.empty()) chart[chan] = std::move(chart_series);
        }
        ds.vitals[id] = std::move(vitals);
        if (!chart.empty()) ds.chart[id] = std::move(chart);
    }

    return {std::move(ds), std::move(labels)};
}

}  // namespace prognosis
