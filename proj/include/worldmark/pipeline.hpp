#pragma once

// The four-stage evaluation workflow over a benchmark working directory:
//
//   gen-cases    images + metadata -> manifest.json + per-case directories
//   map-actions  canonical sequences -> serialized native payloads
//   run          model runners over case directories (worker pool)
//   evaluate     the eight-metric suite per case -> report.json
//
// plus report emission and the human-correlation analysis. Stages are
// resumable: per-case state.json records an input hash per stage and
// completed work is skipped. Every path stored in manifests and reports is
// workdir-relative, so identical runs produce byte-identical artifacts
// regardless of where the workdir lives.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "worldmark/calibration.hpp"
#include "worldmark/common.hpp"
#include "worldmark/geometry.hpp"
#include "worldmark/harness.hpp"
#include "worldmark/judge.hpp"
#include "worldmark/report.hpp"
#include "worldmark/scorer.hpp"

namespace worldmark::pipeline {

// ── Configuration ────────────────────────────────────────────────────────────

struct JudgeConfig {
    std::string client = "rule";  // fixed | scripted | rule | remote
    std::string model = "generic-vlm";
    fs::path scripted_table;
    int retries = 3;
    size_t frames_per_request = 16;
    size_t max_concurrent = 4;  // concurrent judge calls across cases
    std::string fixed_score_body;  // optional fixed-client overrides
    std::string fixed_scene_body;
};

struct Config {
    synth::CalibrationRegistry calibration =
        synth::CalibrationRegistry::with_defaults();
    JudgeConfig judge;
    scorer::ScorerConfig aesthetic_scorer{
        "aesthetic", "mock", std::nullopt, {}, "", metrics::ScoreScale::Unit, 60.0};
    scorer::ScorerConfig imaging_scorer{
        "imaging", "mock", std::nullopt, {}, "", metrics::ScoreScale::Unit, 60.0};
    size_t scorer_sample_stride = 8;
    size_t scorer_max_concurrent = 4;  // concurrent scorer requests
    harness::MockModelConfig mock;
    std::map<std::string, std::vector<std::string>> runners;
    double run_timeout_seconds = 1800.0;  // 30 min per case
    geom::CameraIntrinsics intrinsics{110.0, 110.0, 64.0, 64.0, 128, 128};
    std::uint64_t seed = 42;
    int jobs = 0;  // 0 = hardware concurrency
};

/// Merge a JSON config file over the defaults.
Config load_config(const fs::path& path);
Config config_from_json(const std::string& json_text);
std::string config_to_json(const Config& config);

// ── Manifest ─────────────────────────────────────────────────────────────────

struct ImageEntry {
    std::string path;  // workdir-relative
    media::ImageMeta meta;
    std::vector<std::string> action_ids;
};

struct Manifest {
    std::vector<ImageEntry> images;
    std::vector<std::string> models;
    std::vector<harness::EvaluationCase> cases;  // image paths workdir-relative
    std::string config_snapshot;                 // JSON text
};

void save_manifest(const Manifest& manifest, const fs::path& workdir);
Manifest load_manifest(const fs::path& workdir);

fs::path case_dir(const fs::path& workdir, const std::string& case_id);

/// Per-case deterministic seed derived from the global seed and case id.
std::uint64_t case_seed(std::uint64_t global_seed, const std::string& case_id);

// ── Stages ───────────────────────────────────────────────────────────────────

struct GenCasesOptions {
    fs::path image_dir;
    std::vector<std::string> models;
    std::string select = "all";  // all | vlm | file
    fs::path select_file;        // for select=file: {"<image stem>": ["1", ...]}
    size_t min_actions = 5;      // vlm selection floor (padded, logged)
    size_t max_actions = 5;      // vlm selection cap
    std::string viewpoint;       // optional filters
    std::string style;
    std::string scene;
    std::string tier;
};

Manifest gen_cases(const Config& config, const GenCasesOptions& options,
                   const fs::path& workdir);

/// Each stage returns the number of cases actually worked on (skipped cases
/// are resumed from state.json). Per-case failures are isolated: they mark
/// the case, never abort the batch.
size_t map_actions(const Config& config, const fs::path& workdir);
size_t run_generation(const Config& config, const fs::path& workdir);
size_t evaluate(const Config& config, const fs::path& workdir);

// ── Reports ──────────────────────────────────────────────────────────────────

/// One row per (split, model) present in the evaluated manifest, split-major
/// in the fixed split order.
std::vector<report::LeaderboardRow> collect_rows(const fs::path& workdir);

/// Writes leaderboard.txt / leaderboard.csv / leaderboard.json into the
/// workdir; returns the text table.
std::string write_reports(const fs::path& workdir);

// ── Human correlation ────────────────────────────────────────────────────────

struct CorrelationResult {
    std::string dimension;
    double rho = 0.0;
};

/// Rankings CSV: one line per set, "set_id,model_best,...,model_worst".
/// Metric scores are converted to model rankings per dimension (errors rank
/// ascending, scores descending) and correlated against the mean human
/// ranks. Throws ValidationError when the model sets differ.
std::vector<CorrelationResult> correlate_human(const fs::path& workdir,
                                               const fs::path& rankings_csv,
                                               const std::string& dimension);

// ── Mock suite ───────────────────────────────────────────────────────────────

struct MockSuiteOptions {
    size_t scene_count = 50;  // -> 2x images (first/third views)
    fs::path runner_binary;   // worldmark-mock-runner
};

/// End-to-end headless benchmark: synthesizes the placeholder image suite,
/// generates cases for the mock model, and drives all four stages plus
/// report emission. Returns the number of cases.
size_t mock_suite(const Config& config, const MockSuiteOptions& options,
                  const fs::path& workdir);

/// Judge statistics of the last evaluate() call in this process
/// (requests, cache hits, network calls) as written to judge_stats.json.
judge::JudgeStats last_judge_stats();

}  // namespace worldmark::pipeline
