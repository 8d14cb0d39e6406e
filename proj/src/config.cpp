#include "prognosis/config.hpp"

#include <fstream>
#include <sstream>

namespace prognosis {

using nlohmann::json;

void PipelineConfig::validate() const {
    if (!synthetic && !cohort_paths)
        throw ConfigError("config.cohort: either 'synthetic' or 'paths' must be given");
    if (synthetic) synthetic->validate();
    if (cohort_paths) {
        if (cohort_paths->patients.empty() || cohort_paths->vitals.empty() ||
            cohort_paths->chart.empty() || cohort_paths->ehr.empty())
            throw ConfigError("config.cohort.paths: patients, vitals, chart and ehr are required");
    }
    bounds.validate();
    preprocess.validate();
    if (catalog_kind.empty()) throw ConfigError("config.features.catalog must not be empty");
    if (!(ehr_drop_threshold > 0.0) || !(ehr_drop_threshold < 1.0))
        throw ConfigError("config.ehr.drop_threshold must be in (0, 1)");
    if (ehr_impute_iterations < 1)
        throw ConfigError("config.ehr.impute_iterations must be >= 1");
    if (ehr_impute_params.n_trees < 1)
        throw ConfigError("config.ehr.impute_trees must be >= 1");
    if (enabled_learners.empty())
        throw ConfigError("config.models.enabled must list at least one learner");
    for (const auto& id : enabled_learners) fit_function_for(id);  // throws for unknown ids
    cv.validate();
    if (output_dir.empty()) throw ConfigError("config.output.directory must not be empty");
}

namespace {

json bounds_to_json(const BoundsTable& bounds) {
    json out = json::object();
    for (Channel c : kChannels) {
        const Bounds& b = bounds.at(c);
        out[to_string(c)] = {b.lower, b.upper};
    }
    return out;
}

BoundsTable bounds_from_json(const json& doc) {
    BoundsTable out = BoundsTable::clinical_defaults();
    for (auto& [key, value] : doc.items()) {
        auto chan = channel_from_string(key);
        if (!chan) throw ConfigError("config.preprocess.bounds: unknown channel '" + key + "'");
        out.bounds[*chan] = {value.at(0).get<double>(), value.at(1).get<double>()};
    }
    return out;
}

json synthetic_to_json(const SyntheticConfig& s) {
    json channels = json::object();
    for (Channel c : kChannels) {
        const ArParams& ar = s.channel_params.at(c);
        channels[to_string(c)] = {{"mean", ar.mean},
                                  {"phi", ar.phi},
                                  {"sigma", ar.sigma},
                                  {"mean_jitter", ar.mean_jitter}};
    }
    return json{{"n_patients", s.n_patients},
                {"sigma_log_jitter", s.sigma_log_jitter},
                {"favorable_fraction", s.favorable_fraction},
                {"died_given_unfavorable", s.died_given_unfavorable},
                {"channels", channels},
                {"missing_rate", s.missing_rate},
                {"artifact_rate", s.artifact_rate},
                {"ehr_effect", s.ehr_effect},
                {"pts_effect", s.pts_effect},
                {"planted_ehr_column", s.planted_ehr_column},
                {"n_noise_ehr_columns", s.n_noise_ehr_columns},
                {"ehr_missing_rate", s.ehr_missing_rate},
                {"sparse_column_missing_rate", s.sparse_column_missing_rate},
                {"chart_period_slots", s.chart_period_slots},
                {"chart_noise_sd", s.chart_noise_sd},
                {"chart_missing_rate", s.chart_missing_rate},
                {"chart_uncorrelated_rate", s.chart_uncorrelated_rate},
                {"inclusion_violation_rate", s.inclusion_violation_rate}};
}

SyntheticConfig synthetic_from_json(const json& doc) {
    SyntheticConfig s;
    auto get = [&](const char* key, auto& field) {
        if (doc.contains(key)) field = doc.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("n_patients", s.n_patients);
    get("sigma_log_jitter", s.sigma_log_jitter);
    get("favorable_fraction", s.favorable_fraction);
    get("died_given_unfavorable", s.died_given_unfavorable);
    get("missing_rate", s.missing_rate);
    get("artifact_rate", s.artifact_rate);
    get("ehr_effect", s.ehr_effect);
    get("pts_effect", s.pts_effect);
    get("planted_ehr_column", s.planted_ehr_column);
    get("n_noise_ehr_columns", s.n_noise_ehr_columns);
    get("ehr_missing_rate", s.ehr_missing_rate);
    get("sparse_column_missing_rate", s.sparse_column_missing_rate);
    get("chart_period_slots", s.chart_period_slots);
    get("chart_noise_sd", s.chart_noise_sd);
    get("chart_missing_rate", s.chart_missing_rate);
    get("chart_uncorrelated_rate", s.chart_uncorrelated_rate);
    get("inclusion_violation_rate", s.inclusion_violation_rate);
    if (doc.contains("channels")) {
        for (auto& [key, value] : doc.at("channels").items()) {
            auto chan = channel_from_string(key);
            if (!chan)
                throw ConfigError("config.cohort.synthetic.channels: unknown channel '" + key + "'");
            ArParams ar = s.channel_params[*chan];
            ar.mean = value.at("mean").get<double>();
            ar.phi = value.at("phi").get<double>();
            ar.sigma = value.at("sigma").get<double>();
            if (value.contains("mean_jitter")) ar.mean_jitter = value.at("mean_jitter").get<double>();
            s.channel_params[*chan] = ar;
        }
    }
    return s;
}

}  // namespace

json PipelineConfig::to_json() const {
    json cohort = json::object();
    if (synthetic) cohort["synthetic"] = synthetic_to_json(*synthetic);
    if (cohort_paths) {
        cohort["paths"] = {{"patients", cohort_paths->patients},
                           {"vitals", cohort_paths->vitals},
                           {"chart", cohort_paths->chart},
                           {"ehr", cohort_paths->ehr},
                           {"labels", cohort_paths->labels}};
    }
    cohort["categorical_columns"] = categorical_columns;

    return json{
        {"master_seed", master_seed},
        {"output", {{"directory", output_dir}}},
        {"cohort", cohort},
        {"preprocess",
         {{"window_len", preprocess.window_len}, {"k", preprocess.k},
          {"bounds", bounds_to_json(bounds)}}},
        {"features", {{"catalog", catalog_kind}}},
        {"ehr",
         {{"drop_threshold", ehr_drop_threshold},
          {"impute_iterations", ehr_impute_iterations},
          {"impute_trees", ehr_impute_params.n_trees}}},
        {"models", {{"enabled", enabled_learners}, {"grids", grid_overrides}}},
        {"evaluation",
         {{"outer_folds", cv.outer_folds},
          {"outer_repeats", cv.outer_repeats},
          {"inner_folds", cv.inner_folds},
          {"inner_repeats", cv.inner_repeats},
          {"stratified", cv.stratified},
          {"feature_set", feature_set == FeatureSet::combined
                              ? "combined"
                              : (feature_set == FeatureSet::ehr_only ? "ehr" : "pts")},
          {"outcome", outcome == OutcomeKind::neuro ? "neuro" : "survival"},
          {"threshold_rule", threshold_rule == ThresholdRule::youden ? "youden" : "fixed_half"}}},
    };
}

PipelineConfig PipelineConfig::from_json(const json& doc) {
    PipelineConfig c;
    if (doc.contains("master_seed")) c.master_seed = doc.at("master_seed").get<std::uint64_t>();
    if (doc.contains("output") && doc.at("output").contains("directory"))
        c.output_dir = doc.at("output").at("directory").get<std::string>();

    if (doc.contains("cohort")) {
        const auto& cohort = doc.at("cohort");
        if (cohort.contains("synthetic")) c.synthetic = synthetic_from_json(cohort.at("synthetic"));
        if (cohort.contains("paths")) {
            CohortPaths p;
            const auto& paths = cohort.at("paths");
            p.patients = paths.at("patients").get<std::string>();
            p.vitals = paths.at("vitals").get<std::string>();
            p.chart = paths.at("chart").get<std::string>();
            p.ehr = paths.at("ehr").get<std::string>();
            if (paths.contains("labels")) p.labels = paths.at("labels").get<std::string>();
            c.cohort_paths = p;
        }
        if (cohort.contains("categorical_columns")) {
            c.categorical_columns.clear();
            for (const auto& name : cohort.at("categorical_columns"))
                c.categorical_columns.insert(name.get<std::string>());
        }
    } else {
        c.synthetic = SyntheticConfig{};
    }
    if (!c.synthetic && !c.cohort_paths) c.synthetic = SyntheticConfig{};

    if (doc.contains("preprocess")) {
        const auto& pp = doc.at("preprocess");
        if (pp.contains("window_len")) c.preprocess.window_len = pp.at("window_len").get<int>();
        if (pp.contains("k")) c.preprocess.k = pp.at("k").get<double>();
        if (pp.contains("bounds")) c.bounds = bounds_from_json(pp.at("bounds"));
    }
    if (doc.contains("features") && doc.at("features").contains("catalog"))
        c.catalog_kind = doc.at("features").at("catalog").get<std::string>();
    if (doc.contains("ehr")) {
        const auto& e = doc.at("ehr");
        if (e.contains("drop_threshold")) c.ehr_drop_threshold = e.at("drop_threshold").get<double>();
        if (e.contains("impute_iterations"))
            c.ehr_impute_iterations = e.at("impute_iterations").get<int>();
        if (e.contains("impute_trees")) c.ehr_impute_params.n_trees = e.at("impute_trees").get<int>();
    }
    if (doc.contains("models")) {
        const auto& m = doc.at("models");
        if (m.contains("enabled"))
            c.enabled_learners = m.at("enabled").get<std::vector<std::string>>();
        if (m.contains("grids")) c.grid_overrides = m.at("grids");
    }
    if (doc.contains("evaluation")) {
        const auto& ev = doc.at("evaluation");
        if (ev.contains("outer_folds")) c.cv.outer_folds = ev.at("outer_folds").get<int>();
        if (ev.contains("outer_repeats")) c.cv.outer_repeats = ev.at("outer_repeats").get<int>();
        if (ev.contains("inner_folds")) c.cv.inner_folds = ev.at("inner_folds").get<int>();
        if (ev.contains("inner_repeats")) c.cv.inner_repeats = ev.at("inner_repeats").get<int>();
        if (ev.contains("stratified")) c.cv.stratified = ev.at("stratified").get<bool>();
        if (ev.contains("feature_set")) {
            const std::string fs = ev.at("feature_set").get<std::string>();
            if (fs == "combined") c.feature_set = FeatureSet::combined;
            else if (fs == "ehr") c.feature_set = FeatureSet::ehr_only;
            else if (fs == "pts") c.feature_set = FeatureSet::pts_only;
            else throw ConfigError("config.evaluation.feature_set must be combined|ehr|pts");
        }
        if (ev.contains("outcome")) {
            const std::string o = ev.at("outcome").get<std::string>();
            if (o == "neuro") c.outcome = OutcomeKind::neuro;
            else if (o == "survival") c.outcome = OutcomeKind::survival;
            else throw ConfigError("config.evaluation.outcome must be neuro|survival");
        }
        if (ev.contains("threshold_rule")) {
            const std::string t = ev.at("threshold_rule").get<std::string>();
            if (t == "youden") c.threshold_rule = ThresholdRule::youden;
            else if (t == "fixed_half") c.threshold_rule = ThresholdRule::fixed_half;
            else throw ConfigError("config.evaluation.threshold_rule must be youden|fixed_half");
        }
    }
    c.cv.master_seed = c.master_seed;
    return c;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file not found: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return from_json(doc);
}

std::string PipelineConfig::fingerprint() const {
    json doc = to_json();
    doc["output"]["directory"] = "";  // location must not alter artifact bytes
    const std::string canonical = doc.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string PipelineConfig::provenance() const {
    return "master_seed=" + std::to_string(master_seed) + " config=" + fingerprint();
}

FeatureCatalog PipelineConfig::load_catalog() const {
    if (catalog_kind == "default") return FeatureCatalog::default_catalog();
    if (catalog_kind == "compact") return FeatureCatalog::compact_catalog();
    std::ifstream in(catalog_kind);
    if (!in) throw ConfigError("feature catalog file not found: " + catalog_kind);
    std::ostringstream buf;
    buf << in.rdbuf();
    return FeatureCatalog::from_json_string(buf.str());
}

std::vector<LearnerSpec> PipelineConfig::learner_specs(std::size_t n_features) const {
    std::vector<LearnerSpec> specs;
    for (const auto& id : enabled_learners) {
        LearnerSpec spec;
        spec.id = id;
        spec.fit = fit_function_for(id);
        if (grid_overrides.contains(id)) {
            for (const auto& point : grid_overrides.at(id))
                spec.grid.push_back(point.get<Hyperparams>());
            if (spec.grid.empty())
                throw ConfigError("config.models.grids." + id + " must not be empty");
        } else {
            spec.grid = default_grid(id, n_features);
        }
        specs.push_back(std::move(spec));
    }
    return specs;
}

}  // namespace prognosis
