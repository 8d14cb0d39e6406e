#include "prognosis/pts.hpp"

#include <algorithm>
#include <cmath>

#include "prognosis/threading.hpp"

namespace prognosis {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kMadEpsilon = 1e-9;  // ignores float noise around constant windows

double median_of(std::vector<double>& v) {
    const std::size_t n = v.size();
    const std::size_t mid = n / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double hi = v[mid];
    if (n % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
    return (v[mid - 1] + hi) / 2.0;
}

}  // namespace

PtsSignal::PtsSignal(Channel c)
    : channel(c),
      values(kSlotsPerDay, kNaN),
      mask(kSlotsPerDay, SlotState::missing) {}

const Bounds& BoundsTable::at(Channel c) const {
    auto it = bounds.find(c);
    if (it == bounds.end())
        throw ConfigError(std::string("bounds table has no entry for channel ") + to_string(c));
    return it->second;
}

void BoundsTable::validate() const {
    for (Channel c : kChannels) {
        const Bounds& b = at(c);
        if (!(b.lower < b.upper))
            throw ConfigError(std::string("bounds.") + to_string(c) +
                              ": lower must be below upper (" + std::to_string(b.lower) + " vs " +
                              std::to_string(b.upper) + ")");
    }
}

BoundsTable BoundsTable::clinical_defaults() {
    BoundsTable t;
    t.bounds[Channel::hr] = {30.0, 200.0};
    t.bounds[Channel::rr] = {6.0, 50.0};
    t.bounds[Channel::dbp] = {20.0, 100.0};
    t.bounds[Channel::sbp] = {50.0, 220.0};
    t.bounds[Channel::spo2] = {60.0, 100.0};
    return t;
}

void PreprocessParams::validate() const {
    if (window_len < 3 || window_len % 2 == 0)
        throw ConfigError("preprocess.window_len must be odd and >= 3");
    if (!(k > 0.0)) throw ConfigError("preprocess.k must be > 0");
}

PtsSignal signal_from_raw(Channel channel, const RawSeries& series) {
    PtsSignal s(channel);
    for (const auto& sample : series) {
        if (sample.offset_minutes < 0) continue;
        if (sample.offset_minutes % kSlotMinutes != 0) continue;
        const int slot = sample.offset_minutes / kSlotMinutes;
        if (slot >= kSlotsPerDay) continue;
        if (sample.value) {
            s.values[slot] = *sample.value;
            s.mask[slot] = SlotState::observed;
        }
    }
    return s;
}

std::vector<double> bin_chart_series(const RawSeries& series) {
    std::vector<double> sums(kSlotsPerDay, 0.0);
    std::vector<int> counts(kSlotsPerDay, 0);
    for (const auto& sample : series) {
        if (!sample.value || sample.offset_minutes < 0) continue;
        const int slot = sample.offset_minutes / kSlotMinutes;
        if (slot >= kSlotsPerDay) continue;
        sums[slot] += *sample.value;
        counts[slot] += 1;
    }
    std::vector<double> out(kSlotsPerDay, kNaN);
    for (int i = 0; i < kSlotsPerDay; ++i)
        if (counts[i] > 0) out[i] = sums[i] / counts[i];
    return out;
}

std::vector<SlotRun> detect_outliers(const PtsSignal& signal, const BoundsTable& bounds,
                                     int window_len, double k) {
    if (window_len < 3 || window_len % 2 == 0)
        throw ConfigError("detect_outliers: window_len must be odd and >= 3");
    if (!(k > 0.0)) throw ConfigError("detect_outliers: k must be > 0");
    bounds.at(signal.channel);  // channel must be covered

    const int n = kSlotsPerDay;
    const int half = (window_len - 1) / 2;
    std::vector<bool> candidate(n, false);
    std::vector<double> window;
    std::vector<double> deviations;
    for (int t = 0; t < n; ++t) {
        if (signal.mask[t] != SlotState::observed) continue;
        window.clear();
        const int lo = std::max(0, t - half);
        const int hi = std::min(n - 1, t + half);
        for (int j = lo; j <= hi; ++j)
            if (signal.mask[j] == SlotState::observed) window.push_back(signal.values[j]);
        if (window.empty()) continue;
        std::vector<double> tmp = window;
        const double med = median_of(tmp);
        deviations.clear();
        for (double v : window) deviations.push_back(std::abs(v - med));
        const double mad = median_of(deviations);
        const double dev = std::abs(signal.values[t] - med);
        if (dev > k * mad && dev > kMadEpsilon) candidate[t] = true;
    }

    std::vector<SlotRun> runs;
    int t = 0;
    while (t < n) {
        if (!candidate[t]) {
            ++t;
            continue;
        }
        int end = t;
        while (end < n && candidate[end]) ++end;
        runs.push_back({t, end});
        t = end;
    }
    return runs;
}

PtsSignal remove_outlier_intervals(const PtsSignal& signal, const std::vector<SlotRun>& runs,
                                   const BoundsTable& bounds) {
    const Bounds& b = bounds.at(signal.channel);
    PtsSignal out = signal;
    auto out_of_bounds = [&](int slot) {
        return out.values[slot] < b.lower || out.values[slot] > b.upper;
    };

    // Extend the candidate set with every observed bound violation before
    // grouping, so implausible readings are rejected even when they sat in
    // the middle of a window that agreed with them.
    std::vector<bool> candidate(kSlotsPerDay, false);
    for (const auto& run : runs)
        for (int t = run.begin; t < run.end; ++t) candidate[t] = true;
    for (int t = 0; t < kSlotsPerDay; ++t)
        if (signal.mask[t] == SlotState::observed && out_of_bounds(t)) candidate[t] = true;

    int t = 0;
    while (t < kSlotsPerDay) {
        if (!candidate[t]) {
            ++t;
            continue;
        }
        int end = t;
        bool violates = false;
        while (end < kSlotsPerDay && candidate[end]) {
            if (signal.mask[end] == SlotState::observed && out_of_bounds(end)) violates = true;
            ++end;
        }
        if (violates) {
            for (int u = t; u < end; ++u) {
                if (out.mask[u] != SlotState::observed) continue;
                out.mask[u] = SlotState::rejected;
                out.values[u] = kNaN;
            }
        }
        t = end;
    }
    return out;
}

ChartImputeResult impute_from_chart(const PtsSignal& signal, const std::vector<double>& chart_slots) {
    ChartImputeResult res;
    res.signal = signal;

    double sx = 0.0, sy = 0.0;
    int n = 0;
    for (int t = 0; t < kSlotsPerDay; ++t) {
        if (signal.mask[t] != SlotState::observed) continue;
        if (std::isnan(chart_slots[t])) continue;
        sx += signal.values[t];
        sy += chart_slots[t];
        ++n;
    }
    res.n_common = n;
    if (n >= 2) {
        const double mx = sx / n;
        const double my = sy / n;
        double sxy = 0.0, sxx = 0.0, syy = 0.0;
        for (int t = 0; t < kSlotsPerDay; ++t) {
            if (signal.mask[t] != SlotState::observed) continue;
            if (std::isnan(chart_slots[t])) continue;
            const double u = signal.values[t] - mx;
            const double v = chart_slots[t] - my;
            sxy += u * v;
            sxx += u * u;
            syy += v * v;
        }
        if (sxx > 0.0 && syy > 0.0) res.correlation = sxy / std::sqrt(sxx * syy);
    }

    res.gate_passed = !std::isnan(res.correlation) && res.correlation > 0.8 && n > 15;
    if (!res.gate_passed) return res;

    for (int t = 0; t < kSlotsPerDay; ++t) {
        const SlotState st = res.signal.mask[t];
        if (st != SlotState::missing && st != SlotState::rejected) continue;
        if (std::isnan(chart_slots[t])) continue;
        res.signal.values[t] = chart_slots[t];
        res.signal.mask[t] = SlotState::imputed_chart;
        ++res.n_filled;
    }
    return res;
}

InterpolateResult interpolate_gaps(const PtsSignal& signal) {
    InterpolateResult res;
    res.signal = signal;

    std::vector<int> valued;
    for (int t = 0; t < kSlotsPerDay; ++t)
        if (signal.has_value(t)) valued.push_back(t);
    if (valued.empty()) {
        res.usable = false;
        return res;
    }
    res.usable = true;

    auto fill = [&](int slot, double value) {
        res.signal.values[slot] = value;
        res.signal.mask[slot] = SlotState::imputed_interp;
        ++res.n_filled;
    };
    for (int t = 0; t < valued.front(); ++t) fill(t, signal.values[valued.front()]);
    for (std::size_t i = 0; i + 1 < valued.size(); ++i) {
        const int a = valued[i];
        const int b = valued[i + 1];
        const double va = signal.values[a];
        const double vb = signal.values[b];
        for (int t = a + 1; t < b; ++t)
            fill(t, va + (vb - va) * static_cast<double>(t - a) / static_cast<double>(b - a));
    }
    for (int t = valued.back() + 1; t < kSlotsPerDay; ++t) fill(t, signal.values[valued.back()]);
    return res;
}

PreprocessResult preprocess_pipeline(const PtsSignal& signal, const std::vector<double>& chart_slots,
                                     const BoundsTable& bounds, const PreprocessParams& params) {
    params.validate();
    const Bounds& b = bounds.at(signal.channel);

    auto runs = detect_outliers(signal, bounds, params.window_len, params.k);
    PtsSignal cleaned = remove_outlier_intervals(signal, runs, bounds);

    PreprocessResult res;
    for (int t = 0; t < kSlotsPerDay; ++t)
        if (cleaned.mask[t] == SlotState::rejected && signal.mask[t] == SlotState::observed)
            ++res.n_rejected;

    // Out-of-bounds chart values are implausible for the same reason the
    // rejecting bounds exist; drop them before the correlation gate.
    std::vector<double> chart = chart_slots;
    if (chart.empty()) chart.assign(kSlotsPerDay, std::numeric_limits<double>::quiet_NaN());
    for (double& v : chart)
        if (!std::isnan(v) && (v < b.lower || v > b.upper))
            v = std::numeric_limits<double>::quiet_NaN();

    ChartImputeResult chart_res = impute_from_chart(cleaned, chart);
    res.chart_correlation = chart_res.correlation;
    res.gate_passed = chart_res.gate_passed;
    res.n_chart_imputed = chart_res.n_filled;

    InterpolateResult interp = interpolate_gaps(chart_res.signal);
    res.n_interpolated = interp.n_filled;
    res.usable = interp.usable;
    res.signal = std::move(interp.signal);
    return res;
}

PreprocessedCohort preprocess_cohort(const CohortDataset& dataset, const BoundsTable& bounds,
                                     const PreprocessParams& params, int workers) {
    params.validate();
    bounds.validate();

    PreprocessedCohort out;
    for (const auto& p : dataset.patients) out.patient_ids.push_back(p.patient_id);

    struct Task {
        const std::string* patient_id;
        Channel channel;
        const RawSeries* vitals;
        const RawSeries* chart;  // may be null
    };
    std::vector<Task> tasks;
    for (const auto& p : dataset.patients) {
        auto vit = dataset.vitals.find(p.patient_id);
        auto cit = dataset.chart.find(p.patient_id);
        for (Channel c : kChannels) {
            Task task{&p.patient_id, c, nullptr, nullptr};
            if (vit != dataset.vitals.end()) {
                auto sit = vit->second.find(c);
                if (sit != vit->second.end()) task.vitals = &sit->second;
            }
            if (cit != dataset.chart.end()) {
                auto sit = cit->second.find(c);
                if (sit != cit->second.end()) task.chart = &sit->second;
            }
            tasks.push_back(task);
        }
    }

    std::vector<PreprocessResult> results(tasks.size());
    parallel_for(tasks.size(), workers, [&](std::size_t i) {
        const Task& task = tasks[i];
        PtsSignal raw = task.vitals ? signal_from_raw(task.channel, *task.vitals)
                                    : PtsSignal(task.channel);
        std::vector<double> chart_slots =
            task.chart ? bin_chart_series(*task.chart)
                       : std::vector<double>(kSlotsPerDay, std::numeric_limits<double>::quiet_NaN());
        results[i] = preprocess_pipeline(raw, chart_slots, bounds, params);
    });

    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const Task& task = tasks[i];
        PreprocessResult& r = results[i];
        PreprocessAuditRow row;
        row.patient_id = *task.patient_id;
        row.channel = task.channel;
        row.n_rejected = r.n_rejected;
        row.n_chart_imputed = r.n_chart_imputed;
        row.n_interpolated = r.n_interpolated;
        row.chart_correlation = r.chart_correlation;
        row.gate_passed = r.gate_passed;
        row.usable = r.usable;
        out.audit.push_back(row);
        out.signals[*task.patient_id][task.channel] = std::move(r.signal);
    }
    return out;
}

}  // namespace prognosis
