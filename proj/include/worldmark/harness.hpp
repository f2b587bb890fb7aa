#pragma once

// Model-runner contract and the built-in mock world model.
//
// A runner is any executable invoked as `runner <case_dir>` where the case
// directory holds `manifest.json`, the reference image and the serialized
// action payload. On success (exit 0) the runner leaves `frames/%06d.png`
// (or `video.mp4`), optionally `estimated.traj` and `reproj.jsonl`, plus
// `runner.log`. The mock model implements this contract in-process and via
// the worldmark-mock-runner executable; its per-format payload interpreters
// double as adapter verifiers.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "worldmark/adapters.hpp"
#include "worldmark/calibration.hpp"
#include "worldmark/common.hpp"
#include "worldmark/geometry.hpp"
#include "worldmark/mock_media.hpp"

namespace worldmark::harness {

// ── Case and result types ────────────────────────────────────────────────────

struct EvaluationCase {
    std::string id;
    fs::path image;
    media::ImageMeta meta;
    std::string sequence_id;
    std::string sequence_dsl;
    std::string tier;
    std::string model_id;
};

enum class RunStatus { Completed, Incomplete, ContractViolation };

std::string run_status_name(RunStatus status);

struct GenerationResult {
    std::string case_id;
    RunStatus status = RunStatus::Incomplete;
    std::string reason;  // timeout, exit code, missing outputs, ...
    fs::path frames_dir;            // empty when absent
    fs::path video_file;            // alternative to frames
    fs::path estimated_trajectory;  // optional output
    fs::path reprojection_file;     // optional output
    size_t frame_count = 0;
    double wall_seconds = 0.0;
    int exit_code = 0;
};

// ── Mock world model ─────────────────────────────────────────────────────────

struct MockModelConfig {
    enum class Mode { Faithful, Noisy, SwapRotationForStrafe, Static };
    Mode mode = Mode::Faithful;
    double sigma_t = 0.0;  // meters, noisy mode
    double sigma_r = 0.0;  // degrees, noisy mode
    std::uint64_t seed = 0;
    /// Every k-th trajectory pose becomes a rendered frame (the mock's
    /// "video fps"); pose 0 is always rendered.
    size_t frame_stride = 8;

    void validate() const;
};

MockModelConfig::Mode mock_mode_from_name(const std::string& name);
std::string mock_mode_name(MockModelConfig::Mode mode);

/// Recovers the commanded trajectory from any pose-recoverable payload:
/// PoseStream/PluckerStream poses pass through; captions, gamepad scripts,
/// action-call scripts and action-vector streams are decoded to per-step
/// primitives and re-integrated under `calib`. Throws ValidationError on an
/// uninterpretable payload.
geom::Trajectory interpret_payload(const adapters::NativeActionPayload& payload,
                                   const synth::CalibrationProfile& calib);

/// Runs the mock model on a payload, writing the full output contract into
/// `out_dir`. Deterministic: identical (config, payload, calib) produce
/// byte-identical artifacts.
GenerationResult mock_generate(const MockModelConfig& config,
                               const adapters::NativeActionPayload& payload,
                               const synth::CalibrationProfile& calib,
                               const geom::CameraIntrinsics& intrinsics,
                               const fs::path& out_dir);

// ── Runner invocation ────────────────────────────────────────────────────────

/// Launches `runner_argv + [case_dir]` as a child process, waits up to
/// `timeout_seconds`, and collects outputs per the directory contract.
/// Timeouts and nonzero exits yield Incomplete (diagnostics in runner.log);
/// exit 0 without the required outputs yields ContractViolation.
GenerationResult run_case(const std::vector<std::string>& runner_argv,
                          const fs::path& case_dir, double timeout_seconds);

}  // namespace worldmark::harness
