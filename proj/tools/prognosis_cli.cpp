#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "prognosis/pipeline.hpp"
#include "prognosis/threading.hpp"

namespace {

prognosis::PipelineConfig load_config(const std::string& config_path,
                                      const std::string& output_override,
                                      long long seed_override) {
    prognosis::PipelineConfig config =
        config_path.empty() ? prognosis::PipelineConfig{}
                            : prognosis::PipelineConfig::from_file(config_path);
    if (config.synthetic == std::nullopt && config.cohort_paths == std::nullopt)
        config.synthetic = prognosis::SyntheticConfig{};
    if (!output_override.empty()) config.output_dir = output_override;
    if (seed_override >= 0) {
        config.master_seed = static_cast<std::uint64_t>(seed_override);
        config.cv.master_seed = config.master_seed;
    }
    config.validate();
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Post-cardiac-arrest outcome prediction pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_override;
    long long seed_override = -1;
    int workers_flag = 0;
    app.add_option("-c,--config", config_path, "JSON configuration file");
    app.add_option("-o,--output", output_override, "Override the output directory");
    app.add_option("-s,--seed", seed_override, "Override the master seed");
    app.add_option("-w,--workers", workers_flag,
                   "Worker threads (PROGNOSIS_WORKERS overrides; 0 = hardware)");

    for (const char* name : {"synth", "preprocess", "features", "impute", "evaluate", "rank", "all"})
        app.add_subcommand(name);
    app.get_subcommand("synth")->description("Generate a seeded synthetic cohort");
    app.get_subcommand("preprocess")->description("Denoise and impute the vital-sign series");
    app.get_subcommand("features")->description("Extract the statistical feature matrix");
    app.get_subcommand("impute")->description("Drop sparse EHR columns and impute the rest");
    app.get_subcommand("evaluate")->description("Nested cross-validation over the enabled learners");
    app.get_subcommand("rank")->description("Minimal-depth feature importance report");
    app.get_subcommand("all")->description("Run the whole pipeline");

    CLI11_PARSE(app, argc, argv);

    try {
        const prognosis::PipelineConfig config =
            load_config(config_path, output_override, seed_override);
        const int workers = prognosis::worker_count(workers_flag);
        const std::string command = app.get_subcommands().front()->get_name();

        if (command == "synth") {
            std::puts(prognosis::run_synth(config).c_str());
        } else if (command == "preprocess") {
            std::puts(prognosis::run_preprocess(config, workers).c_str());
        } else if (command == "features") {
            std::puts(prognosis::run_features(config, workers).c_str());
        } else if (command == "impute") {
            std::puts(prognosis::run_impute(config).c_str());
        } else if (command == "evaluate") {
            std::puts(prognosis::run_evaluate(config, workers).c_str());
        } else if (command == "rank") {
            std::puts(prognosis::run_rank(config).c_str());
        } else if (command == "all") {
            for (const auto& line : prognosis::run_all(config, workers)) std::puts(line.c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
