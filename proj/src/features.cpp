#include "prognosis/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "prognosis/csv.hpp"
#include "prognosis/threading.hpp"

namespace prognosis {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double series_mean(std::span<const double> s) {
    double acc = 0.0;
    for (double v : s) acc += v;
    return acc / static_cast<double>(s.size());
}

}  // namespace

std::optional<double> binned_stat(std::span<const double> series, int n_bins, BinnedOuter outer) {
    if (n_bins < 2) return std::nullopt;
    const std::size_t n = series.size();
    if (n < static_cast<std::size_t>(n_bins)) return std::nullopt;
    const std::size_t base = n / static_cast<std::size_t>(n_bins);
    std::vector<double> bin_means(n_bins);
    for (int b = 0; b < n_bins; ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * base;
        const std::size_t hi = (b == n_bins - 1) ? n : lo + base;
        bin_means[b] = series_mean(series.subspan(lo, hi - lo));
    }
    const double m = series_mean(bin_means);
    if (outer == BinnedOuter::mean) return m;
    double ss = 0.0;
    for (double v : bin_means) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(n_bins - 1));
}

std::optional<double> polvar(std::span<const double> series, double d, int D) {
    if (!(d > 0.0) || D < 2) return std::nullopt;
    const std::size_t n = series.size();
    if (n < static_cast<std::size_t>(D) + 1) return std::nullopt;
    std::vector<int> symbols(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
        symbols[i] = std::abs(series[i + 1] - series[i]) >= d ? 1 : 0;
    const std::size_t n_words = n - static_cast<std::size_t>(D);
    std::size_t constant_words = 0;
    for (std::size_t w = 0; w < n_words; ++w) {
        bool all_same = true;
        for (int j = 1; j < D; ++j) {
            if (symbols[w + j] != symbols[w]) {
                all_same = false;
                break;
            }
        }
        constant_words += all_same;
    }
    return static_cast<double>(constant_words) / static_cast<double>(n_words);
}

std::optional<double> permutation_entropy(std::span<const double> series, int m, int tau) {
    if (m < 3 || m > 6 || tau < 1) return std::nullopt;
    const std::size_t n = series.size();
    const std::size_t span_len = static_cast<std::size_t>(m - 1) * tau + 1;
    if (n < span_len) return std::nullopt;

    std::map<std::vector<int>, std::size_t> counts;
    std::vector<int> order(m);
    const std::size_t n_windows = n - span_len + 1;
    for (std::size_t t = 0; t < n_windows; ++t) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return series[t + static_cast<std::size_t>(a) * tau] <
                   series[t + static_cast<std::size_t>(b) * tau];
        });
        ++counts[order];
    }
    double entropy = 0.0;
    for (const auto& [pattern, c] : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(n_windows);
        entropy -= p * std::log(p);
    }
    double log_m_factorial = 0.0;
    for (int i = 2; i <= m; ++i) log_m_factorial += std::log(static_cast<double>(i));
    return entropy / log_m_factorial;
}

BasicStats basic_stats(std::span<const double> series) {
    BasicStats out;
    const std::size_t n = series.size();
    if (n == 0) return out;
    const double mean = series_mean(series);
    double mn = series[0], mx = series[0];
    for (double v : series) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    out.mean = mean;
    out.min = mn;
    out.max = mx;
    out.first = series.front();
    out.last = series.back();
    out.range = mx - mn;

    // least-squares slope against t = 0..n-1, in units per slot
    if (n >= 2) {
        const double t_mean = static_cast<double>(n - 1) / 2.0;
        double num = 0.0, den = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const double dt = static_cast<double>(t) - t_mean;
            num += dt * (series[t] - mean);
            den += dt * dt;
        }
        out.slope = num / den;
    } else {
        out.slope = 0.0;
    }

    if (n >= 2) {
        double ss = 0.0;
        for (double v : series) ss += (v - mean) * (v - mean);
        out.sd = std::sqrt(ss / static_cast<double>(n - 1));
        if (ss > 0.0) {
            double num = 0.0;
            for (std::size_t t = 0; t + 1 < n; ++t)
                num += (series[t] - mean) * (series[t + 1] - mean);
            out.acf1 = num / ss;
        }
    }
    return out;
}

const char* to_string(StatKind k) {
    switch (k) {
        case StatKind::mean: return "mean";
        case StatKind::sd: return "sd";
        case StatKind::min: return "min";
        case StatKind::max: return "max";
        case StatKind::first: return "first";
        case StatKind::last: return "last";
        case StatKind::range: return "range";
        case StatKind::slope: return "slope";
        case StatKind::acf1: return "acf1";
        case StatKind::binned_mean: return "binned_mean";
        case StatKind::binned_sd: return "binned_sd";
        case StatKind::polvar: return "polvar";
        case StatKind::perm_entropy: return "perm_entropy";
        case StatKind::wavelet_mean: return "wavelet_mean";
        case StatKind::wavelet_mean_abs: return "wavelet_mean_abs";
    }
    return "?";
}

std::optional<StatKind> stat_kind_from_string(std::string_view s) {
    for (int k = 0; k <= static_cast<int>(StatKind::wavelet_mean_abs); ++k)
        if (s == to_string(static_cast<StatKind>(k))) return static_cast<StatKind>(k);
    return std::nullopt;
}

void FeatureCatalog::validate() const {
    std::set<std::string> names;
    for (const auto& d : descriptors) {
        if (d.name.empty()) throw ConfigError("feature catalog: empty feature name");
        if (!names.insert(d.name).second)
            throw ConfigError("feature catalog: duplicate feature name '" + d.name + "'");
        if (d.start_slot < 0 || d.end_slot > kSlotsPerDay || d.start_slot >= d.end_slot)
            throw ConfigError("feature catalog: bad window for '" + d.name + "'");
        if ((d.kind == StatKind::binned_mean || d.kind == StatKind::binned_sd) && d.params.n_bins < 2)
            throw ConfigError("feature catalog: n_bins must be >= 2 for '" + d.name + "'");
        if (d.kind == StatKind::polvar && (d.params.word_len < 2 || !(d.params.d > 0.0)))
            throw ConfigError("feature catalog: bad polvar parameters for '" + d.name + "'");
        if (d.kind == StatKind::perm_entropy &&
            (d.params.m < 3 || d.params.m > 6 || d.params.tau < 1))
            throw ConfigError("feature catalog: bad permutation-entropy parameters for '" + d.name + "'");
        if ((d.kind == StatKind::wavelet_mean || d.kind == StatKind::wavelet_mean_abs) &&
            d.params.level < 1)
            throw ConfigError("feature catalog: wavelet level must be >= 1 for '" + d.name + "'");
    }
}

namespace {

struct NamedWindow {
    const char* suffix;
    int start;
    int end;
};

void add_windowed_basics(FeatureCatalog& cat, Channel c, const NamedWindow& w) {
    static constexpr StatKind kBasics[] = {StatKind::mean, StatKind::sd,  StatKind::min,
                                           StatKind::max,  StatKind::first, StatKind::last,
                                           StatKind::range, StatKind::slope, StatKind::acf1};
    for (StatKind k : kBasics) {
        FeatureDescriptor d;
        d.name = std::string(to_string(c)) + "_" + to_string(k) + "_" + w.suffix;
        d.channel = c;
        d.start_slot = w.start;
        d.end_slot = w.end;
        d.kind = k;
        cat.descriptors.push_back(std::move(d));
    }
}

void add_full_day_specials(FeatureCatalog& cat, Channel c) {
    auto add = [&](const std::string& name, StatKind kind, StatParams params) {
        FeatureDescriptor d;
        d.name = std::string(to_string(c)) + "_" + name;
        d.channel = c;
        d.start_slot = 0;
        d.end_slot = kSlotsPerDay;
        d.kind = kind;
        d.params = params;
        cat.descriptors.push_back(std::move(d));
    };
    StatParams binned;
    binned.n_bins = 20;
    add("binned20_mean_full", StatKind::binned_mean, binned);
    add("binned20_sd_full", StatKind::binned_sd, binned);
    for (int d_thr : {3, 4, 5}) {
        StatParams p;
        p.d = static_cast<double>(d_thr);
        p.word_len = 5;
        add("polvar_5_" + std::to_string(d_thr) + "_full", StatKind::polvar, p);
    }
    for (int m : {4, 5}) {
        StatParams p;
        p.m = m;
        p.tau = 2;
        add("pe_" + std::to_string(m) + "_2_full", StatKind::perm_entropy, p);
    }
    StatParams w;
    w.level = 1;
    add("db3_l1_mean_full", StatKind::wavelet_mean, w);
    add("db3_l1_meanabs_full", StatKind::wavelet_mean_abs, w);
}

}  // namespace

FeatureCatalog FeatureCatalog::default_catalog() {
    static constexpr NamedWindow kWindows[] = {
        {"full", 0, 288}, {"h1", 0, 144},  {"h2", 144, 288}, {"q1", 0, 72},
        {"q2", 72, 144},  {"q3", 144, 216}, {"q4", 216, 288},
    };
    FeatureCatalog cat;
    for (Channel c : kChannels) {
        for (const auto& w : kWindows) add_windowed_basics(cat, c, w);
        add_full_day_specials(cat, c);
    }
    cat.validate();
    return cat;
}

FeatureCatalog FeatureCatalog::compact_catalog() {
    FeatureCatalog cat;
    const NamedWindow full{"full", 0, 288};
    for (Channel c : kChannels) {
        add_windowed_basics(cat, c, full);
        add_full_day_specials(cat, c);
    }
    cat.validate();
    return cat;
}

std::string FeatureCatalog::to_json_string() const {
    json features = json::array();
    for (const auto& d : descriptors) {
        json entry{
            {"name", d.name},
            {"channel", to_string(d.channel)},
            {"window", {d.start_slot, d.end_slot}},
            {"statistic", to_string(d.kind)},
        };
        json params = json::object();
        switch (d.kind) {
            case StatKind::binned_mean:
            case StatKind::binned_sd: params["n_bins"] = d.params.n_bins; break;
            case StatKind::polvar:
                params["d"] = d.params.d;
                params["word_len"] = d.params.word_len;
                break;
            case StatKind::perm_entropy:
                params["m"] = d.params.m;
                params["tau"] = d.params.tau;
                break;
            case StatKind::wavelet_mean:
            case StatKind::wavelet_mean_abs: params["level"] = d.params.level; break;
            default: break;
        }
        entry["params"] = params;
        features.push_back(std::move(entry));
    }
    return json{{"features", features}}.dump(2);
}

FeatureCatalog FeatureCatalog::from_json_string(const std::string& text) {
    json doc = json::parse(text);
    if (!doc.contains("features") || !doc["features"].is_array())
        throw ConfigError("feature catalog: expected top-level 'features' array");
    FeatureCatalog cat;
    for (const auto& entry : doc["features"]) {
        FeatureDescriptor d;
        d.name = entry.at("name").get<std::string>();
        auto chan = channel_from_string(entry.at("channel").get<std::string>());
        if (!chan)
            throw ConfigError("feature catalog: unknown channel '" +
                              entry.at("channel").get<std::string>() + "' for '" + d.name + "'");
        d.channel = *chan;
        d.start_slot = entry.at("window").at(0).get<int>();
        d.end_slot = entry.at("window").at(1).get<int>();
        auto kind = stat_kind_from_string(entry.at("statistic").get<std::string>());
        if (!kind)
            throw ConfigError("feature catalog: unknown statistic '" +
                              entry.at("statistic").get<std::string>() + "' for '" + d.name + "'");
        d.kind = *kind;
        if (entry.contains("params")) {
            const auto& p = entry["params"];
            if (p.contains("n_bins")) d.params.n_bins = p["n_bins"].get<int>();
            if (p.contains("d")) d.params.d = p["d"].get<double>();
            if (p.contains("word_len")) d.params.word_len = p["word_len"].get<int>();
            if (p.contains("m")) d.params.m = p["m"].get<int>();
            if (p.contains("tau")) d.params.tau = p["tau"].get<int>();
            if (p.contains("level")) d.params.level = p["level"].get<int>();
        }
        cat.descriptors.push_back(std::move(d));
    }
    cat.validate();
    return cat;
}

namespace {

double evaluate_descriptor(const FeatureDescriptor& d, std::span<const double> window) {
    std::optional<double> v;
    switch (d.kind) {
        case StatKind::mean: v = basic_stats(window).mean; break;
        case StatKind::sd: v = basic_stats(window).sd; break;
        case StatKind::min: v = basic_stats(window).min; break;
        case StatKind::max: v = basic_stats(window).max; break;
        case StatKind::first: v = basic_stats(window).first; break;
        case StatKind::last: v = basic_stats(window).last; break;
        case StatKind::range: v = basic_stats(window).range; break;
        case StatKind::slope: v = basic_stats(window).slope; break;
        case StatKind::acf1: v = basic_stats(window).acf1; break;
        case StatKind::binned_mean: v = binned_stat(window, d.params.n_bins, BinnedOuter::mean); break;
        case StatKind::binned_sd: v = binned_stat(window, d.params.n_bins, BinnedOuter::sd); break;
        case StatKind::polvar: v = polvar(window, d.params.d, d.params.word_len); break;
        case StatKind::perm_entropy: v = permutation_entropy(window, d.params.m, d.params.tau); break;
        case StatKind::wavelet_mean: v = wavelet_feature(window, d.params.level, WaveletStat::mean); break;
        case StatKind::wavelet_mean_abs:
            v = wavelet_feature(window, d.params.level, WaveletStat::mean_abs);
            break;
    }
    return v.value_or(kNaN);
}

}  // namespace

FeatureMatrix extract_features(const PreprocessedCohort& cohort, const FeatureCatalog& catalog,
                               int workers) {
    catalog.validate();
    FeatureMatrix m;
    m.patient_ids = cohort.patient_ids;
    for (const auto& d : catalog.descriptors) m.feature_names.push_back(d.name);
    m.values.assign(m.n_rows() * m.n_cols(), kNaN);

    const std::size_t n_cols = m.n_cols();
    parallel_for(m.n_rows(), workers, [&](std::size_t r) {
        const auto& id = cohort.patient_ids[r];
        auto pit = cohort.signals.find(id);
        if (pit == cohort.signals.end()) return;
        for (std::size_t c = 0; c < n_cols; ++c) {
            const FeatureDescriptor& d = catalog.descriptors[c];
            auto sit = pit->second.find(d.channel);
            if (sit == pit->second.end()) continue;
            const PtsSignal& sig = sit->second;
            bool complete = true;
            for (int t = d.start_slot; t < d.end_slot; ++t)
                if (!sig.has_value(t)) {
                    complete = false;
                    break;
                }
            if (!complete) continue;
            std::span<const double> window(sig.values.data() + d.start_slot,
                                           static_cast<std::size_t>(d.end_slot - d.start_slot));
            m.values[r * n_cols + c] = evaluate_descriptor(d, window);
        }
    });
    return m;
}

void write_feature_matrix(const FeatureMatrix& m, const std::string& path,
                          const std::string& provenance) {
    std::vector<std::string> header{"patient_id"};
    header.insert(header.end(), m.feature_names.begin(), m.feature_names.end());
    std::vector<std::vector<std::string>> rows;
    rows.reserve(m.n_rows());
    for (std::size_t r = 0; r < m.n_rows(); ++r) {
        std::vector<std::string> row{m.patient_ids[r]};
        for (std::size_t c = 0; c < m.n_cols(); ++c) {
            const double v = m.at(r, c);
            row.push_back(std::isnan(v) ? "" : format_double(v));
        }
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows, provenance);
}

FeatureMatrix load_feature_matrix(const std::string& path) {
    CsvTable t = read_csv(path);
    const int c_id = t.require_column("patient_id");
    FeatureMatrix m;
    for (std::size_t c = 0; c < t.header.size(); ++c)
        if (static_cast<int>(c) != c_id) m.feature_names.push_back(t.header[c]);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        m.patient_ids.push_back(t.rows[r][c_id]);
        for (std::size_t c = 0; c < t.header.size(); ++c) {
            if (static_cast<int>(c) == c_id) continue;
            auto v = parse_double_cell(t.rows[r][c], path + " feature cell");
            m.values.push_back(v ? *v : kNaN);
        }
    }
    return m;
}

}  // namespace prognosis
