// worldmark - benchmark CLI for action-conditioned interactive I2V world
// models. Four-stage workflow over a working directory:
//
//   worldmark gen-cases   --images DIR --models mock --workdir W
//   worldmark map-actions --workdir W
//   worldmark run         --workdir W
//   worldmark evaluate    --workdir W
//   worldmark report      --workdir W
//
// plus `correlate-human` for the human-alignment analysis and `mock-suite`
// for the fully headless end-to-end run against the built-in mock model.

#include <unistd.h>

#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "worldmark/common.hpp"
#include "worldmark/pipeline.hpp"

using namespace worldmark;

namespace {

fs::path own_binary_dir() {
    char buf[4096];
    ssize_t n = ::readlink("/proc/self/exe", buf, sizeof(buf) - 1);
    if (n <= 0) return fs::current_path();
    buf[n] = '\0';
    return fs::path(buf).parent_path();
}

std::vector<std::string> split_command(const std::string& text) {
    std::vector<std::string> out;
    for (const auto& part : split(text, ' '))
        if (!part.empty()) out.push_back(part);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"worldmark - standardized benchmark for interactive "
                 "image-to-video world models"};
    app.require_subcommand(1);
    // Let --config/--jobs/--seed appear after the subcommand name too.
    app.fallthrough();

    std::string config_path;
    int jobs = 0;
    long long seed = -1;
    app.add_option("--config", config_path, "JSON config file")
        ->envname("WORLDMARK_CONFIG");
    app.add_option("--jobs", jobs, "worker pool width (0 = hardware)");
    app.add_option("--seed", seed, "global seed (overrides config)");

    // gen-cases
    auto* gen = app.add_subcommand("gen-cases",
                                   "build the case manifest from an image "
                                   "directory with metadata sidecars");
    pipeline::GenCasesOptions gen_options;
    std::string gen_workdir, gen_models;
    gen->add_option("--images", gen_options.image_dir, "image directory")
        ->required();
    gen->add_option("--models", gen_models, "comma-separated model ids")
        ->required();
    gen->add_option("--workdir", gen_workdir, "benchmark working directory")
        ->required();
    gen->add_option("--select", gen_options.select,
                    "action selection: all | vlm | file");
    gen->add_option("--select-file", gen_options.select_file,
                    "JSON selection table for --select=file");
    gen->add_option("--min-actions", gen_options.min_actions,
                    "pad VLM selections up to this many actions");
    gen->add_option("--max-actions", gen_options.max_actions,
                    "cap VLM selections at this many actions");
    gen->add_option("--viewpoint", gen_options.viewpoint, "filter: first|third");
    gen->add_option("--style", gen_options.style, "filter: real|stylized");
    gen->add_option("--scene", gen_options.scene,
                    "filter: nature|city|indoor");
    gen->add_option("--tier", gen_options.tier, "filter: Easy|Medium|Hard");

    // map-actions / run / evaluate / report
    std::string workdir;
    auto* map_cmd = app.add_subcommand(
        "map-actions", "serialize native control payloads per case");
    map_cmd->add_option("--workdir", workdir, "benchmark working directory")
        ->required();

    auto* run_cmd =
        app.add_subcommand("run", "drive model runners over the case dirs");
    std::vector<std::string> runner_specs;
    run_cmd->add_option("--workdir", workdir, "benchmark working directory")
        ->required();
    run_cmd->add_option("--runner", runner_specs,
                        "model=command (repeatable; overrides config)");

    auto* eval_cmd =
        app.add_subcommand("evaluate", "compute the eight-metric suite per case");
    eval_cmd->add_option("--workdir", workdir, "benchmark working directory")
        ->required();

    auto* report_cmd = app.add_subcommand(
        "report", "emit per-split leaderboards (table, csv, json)");
    std::string report_format = "table";
    report_cmd->add_option("--workdir", workdir, "benchmark working directory")
        ->required();
    report_cmd->add_option("--format", report_format, "table | csv | json");

    // correlate-human
    auto* corr_cmd = app.add_subcommand(
        "correlate-human", "Spearman correlation against human rankings");
    std::string rankings_path, dimension = "all";
    corr_cmd->add_option("--workdir", workdir, "benchmark working directory")
        ->required();
    corr_cmd
        ->add_option("--rankings", rankings_path,
                     "CSV: set_id,model_best,...,model_worst per line")
        ->required();
    corr_cmd->add_option("--dimension", dimension,
                         "metric column or 'all'");

    // mock-suite
    auto* mock_cmd = app.add_subcommand(
        "mock-suite",
        "headless end-to-end benchmark against the built-in mock model");
    pipeline::MockSuiteOptions mock_options;
    mock_cmd->add_option("--workdir", workdir, "benchmark working directory")
        ->required();
    mock_cmd->add_option("--scenes", mock_options.scene_count,
                         "synthetic scenes (x2 viewpoints)");
    mock_cmd->add_option("--runner-binary", mock_options.runner_binary,
                         "path to worldmark-mock-runner");

    CLI11_PARSE(app, argc, argv);

    try {
        pipeline::Config config = config_path.empty()
                                      ? pipeline::Config{}
                                      : pipeline::load_config(config_path);
        if (jobs > 0) config.jobs = jobs;
        if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);

        if (gen->parsed()) {
            gen_options.models = split(gen_models, ',');
            auto manifest =
                pipeline::gen_cases(config, gen_options, gen_workdir);
            std::printf("gen-cases: %zu image(s), %zu case(s) -> %s\n",
                        manifest.images.size(), manifest.cases.size(),
                        (fs::path(gen_workdir) / "manifest.json").c_str());
        } else if (map_cmd->parsed()) {
            size_t worked = pipeline::map_actions(config, workdir);
            std::printf("map-actions: %zu case(s) mapped\n", worked);
        } else if (run_cmd->parsed()) {
            for (const auto& spec : runner_specs) {
                auto eq = spec.find('=');
                if (eq == std::string::npos)
                    throw ValidationError("--runner expects model=command");
                config.runners[spec.substr(0, eq)] =
                    split_command(spec.substr(eq + 1));
            }
            if (!config.runners.count("mock"))
                config.runners["mock"] = {
                    (own_binary_dir() / "worldmark-mock-runner").string()};
            size_t worked = pipeline::run_generation(config, workdir);
            std::printf("run: %zu case(s) executed\n", worked);
        } else if (eval_cmd->parsed()) {
            size_t worked = pipeline::evaluate(config, workdir);
            auto stats = pipeline::last_judge_stats();
            std::printf("evaluate: %zu case(s) evaluated (judge: %zu requests, "
                        "%zu cache hits, %zu network calls)\n",
                        worked, stats.requests, stats.cache_hits,
                        stats.network_calls);
        } else if (report_cmd->parsed()) {
            auto rows = pipeline::collect_rows(workdir);
            pipeline::write_reports(workdir);
            if (report_format == "table")
                std::cout << report::render_table(rows);
            else if (report_format == "csv")
                std::cout << report::render_csv(rows);
            else if (report_format == "json")
                std::cout << report::render_json(rows);
            else
                throw LookupError("unknown report format: " + report_format);
        } else if (corr_cmd->parsed()) {
            auto results =
                pipeline::correlate_human(workdir, rankings_path, dimension);
            for (const auto& r : results)
                std::printf("%-22s rho = %+.6f\n", r.dimension.c_str(), r.rho);
            std::printf("(quality bar: rho > 0.9 indicates strong "
                        "human-metric alignment)\n");
        } else if (mock_cmd->parsed()) {
            if (mock_options.runner_binary.empty())
                mock_options.runner_binary =
                    own_binary_dir() / "worldmark-mock-runner";
            size_t cases =
                pipeline::mock_suite(config, mock_options, workdir);
            auto stats = pipeline::last_judge_stats();
            std::printf("mock-suite: %zu case(s) complete (judge: %zu "
                        "requests, %zu cache hits, %zu network calls)\n",
                        cases, stats.requests, stats.cache_hits,
                        stats.network_calls);
            std::cout << read_file(fs::path(workdir) / "leaderboard.txt");
        }
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
