#include "worldmark/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "json.hpp"
#include "worldmark/png_io.hpp"
#include "worldmark/process.hpp"
#include "worldmark/synthesis.hpp"
#include "worldmark/trajectory_io.hpp"

namespace worldmark::harness {

using actions::Kind;
using adapters::NativeActionPayload;
using geom::Pose;
using geom::Rotation;
using geom::Trajectory;
using geom::Vec3;
using synth::CalibrationProfile;

std::string run_status_name(RunStatus status) {
    switch (status) {
        case RunStatus::Completed: return "completed";
        case RunStatus::Incomplete: return "incomplete";
        case RunStatus::ContractViolation: return "contract_violation";
    }
    throw ValidationError("invalid run status");
}

void MockModelConfig::validate() const {
    if (sigma_t < 0.0 || sigma_r < 0.0 || !std::isfinite(sigma_t) ||
        !std::isfinite(sigma_r))
        throw ValidationError("mock noise sigmas must be >= 0 and finite");
    if (frame_stride == 0)
        throw ValidationError("mock frame stride must be >= 1");
}

MockModelConfig::Mode mock_mode_from_name(const std::string& name) {
    if (name == "faithful") return MockModelConfig::Mode::Faithful;
    if (name == "noisy") return MockModelConfig::Mode::Noisy;
    if (name == "swap_rotation_for_strafe")
        return MockModelConfig::Mode::SwapRotationForStrafe;
    if (name == "static") return MockModelConfig::Mode::Static;
    throw LookupError("unknown mock mode: " + name);
}

std::string mock_mode_name(MockModelConfig::Mode mode) {
    switch (mode) {
        case MockModelConfig::Mode::Faithful: return "faithful";
        case MockModelConfig::Mode::Noisy: return "noisy";
        case MockModelConfig::Mode::SwapRotationForStrafe:
            return "swap_rotation_for_strafe";
        case MockModelConfig::Mode::Static: return "static";
    }
    throw ValidationError("invalid mock mode");
}

// ── Payload interpreters ─────────────────────────────────────────────────────

namespace {

std::vector<std::optional<Kind>> steps_from_gamepad(
    const adapters::GamepadScript& script, double fps) {
    double total = 0.0;
    for (const auto& ev : script.events) total = std::max(total, ev.time);
    const auto n = static_cast<size_t>(std::llround(total * fps));
    const double dt = 1.0 / fps;

    std::vector<std::optional<Kind>> steps(n);
    for (size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        // The button held at time t: latest press at or before t without a
        // release in (press, t].
        for (const auto& ev : script.events) {
            if (!ev.press || ev.time > t) continue;
            bool released = false;
            for (const auto& rel : script.events) {
                if (rel.press || rel.button != ev.button) continue;
                if (rel.time > ev.time && rel.time <= t) released = true;
            }
            if (!released) steps[i] = adapters::kind_from_button(ev.button);
        }
    }
    return steps;
}

std::vector<std::optional<Kind>> steps_from_calls(
    const adapters::ActionCallScript& script) {
    size_t n = 0;
    for (const auto& call : script.calls) n = std::max(n, call.end_frame);
    std::vector<std::optional<Kind>> steps(n);
    for (const auto& call : script.calls) {
        Kind kind = adapters::kind_from_call_name(call.name);
        if (call.end_frame < call.start_frame)
            throw ValidationError("action call with end_frame < start_frame");
        for (size_t i = call.start_frame; i < call.end_frame; ++i) {
            if (steps[i])
                throw ValidationError("overlapping action calls at frame " +
                                      std::to_string(i));
            steps[i] = kind;
        }
    }
    return steps;
}

std::vector<std::optional<Kind>> steps_from_vectors(
    const adapters::ActionVectorStream& stream) {
    std::vector<std::optional<Kind>> steps(stream.vectors.size());
    const std::pair<size_t, Kind> index_map[] = {
        {adapters::kVecForward, Kind::Forward},
        {adapters::kVecBackward, Kind::Backward},
        {adapters::kVecStrafeLeft, Kind::StrafeLeft},
        {adapters::kVecStrafeRight, Kind::StrafeRight},
        {adapters::kVecYawLeft, Kind::YawLeft},
        {adapters::kVecYawRight, Kind::YawRight},
    };
    for (size_t i = 0; i < stream.vectors.size(); ++i) {
        for (const auto& [idx, kind] : index_map) {
            if (stream.vectors[i][idx] != 0.0) {
                steps[i] = kind;
                break;
            }
        }
    }
    return steps;
}

}  // namespace

Trajectory interpret_payload(const NativeActionPayload& payload,
                             const CalibrationProfile& calib) {
    if (const auto* stream = std::get_if<adapters::PoseStream>(&payload.value)) {
        if (stream->stride != 1)
            throw ValidationError(
                "mock cannot interpret a strided pose stream (stride " +
                std::to_string(stream->stride) + ")");
        return stream->poses;
    }
    if (const auto* plucker = std::get_if<adapters::PluckerStream>(&payload.value))
        return plucker->poses;
    if (const auto* caption = std::get_if<adapters::CaptionPrompt>(&payload.value))
        return synth::synthesize(adapters::parse_caption(caption->text), calib);
    if (const auto* pad = std::get_if<adapters::GamepadScript>(&payload.value))
        return synth::integrate_steps(
            steps_from_gamepad(*pad, calib.frame_rate), calib);
    if (const auto* calls = std::get_if<adapters::ActionCallScript>(&payload.value))
        return synth::integrate_steps(steps_from_calls(*calls), calib);
    if (const auto* vecs = std::get_if<adapters::ActionVectorStream>(&payload.value))
        return synth::integrate_steps(steps_from_vectors(*vecs), calib);
    throw ValidationError("uninterpretable payload format: " + payload.format());
}

// ── Mock generation ──────────────────────────────────────────────────────────

namespace {

std::vector<Pose> relative_deltas(const Trajectory& traj) {
    std::vector<Pose> deltas;
    deltas.reserve(traj.size() > 0 ? traj.size() - 1 : 0);
    for (size_t i = 0; i + 1 < traj.size(); ++i)
        deltas.push_back(compose(inverse(traj.poses[i]), traj.poses[i + 1]));
    return deltas;
}

Trajectory integrate_deltas(const std::vector<Pose>& deltas, double fps,
                            const std::vector<double>& timestamps) {
    Trajectory out;
    out.frame_rate = fps;
    out.poses.push_back(Pose::identity(timestamps[0]));
    for (size_t i = 0; i < deltas.size(); ++i) {
        Pose next = compose(out.poses.back(), deltas[i]);
        next.timestamp = timestamps[i + 1];
        out.poses.push_back(next);
    }
    return out;
}

/// Signed yaw of a rotation step about the -y axis, degrees; near zero for
/// translation steps.
double yaw_left_deg_of(const Rotation& r) {
    // For a yaw-left rotation by a, q = (cos(a/2), 0, sin(-a/2)... ) with
    // axis (0,-1,0): q.y = -sin(a/2).
    double half = std::atan2(-r.y, r.w);
    return geom::rad_to_deg(2.0 * half);
}

Trajectory apply_obedience(const MockModelConfig& config,
                           const Trajectory& intended,
                           const CalibrationProfile& calib) {
    std::vector<double> timestamps;
    timestamps.reserve(intended.size());
    for (const auto& p : intended.poses) timestamps.push_back(p.timestamp);

    switch (config.mode) {
        case MockModelConfig::Mode::Faithful:
            return intended;
        case MockModelConfig::Mode::Static: {
            Trajectory out;
            out.frame_rate = intended.frame_rate;
            for (double t : timestamps) out.poses.push_back(Pose::identity(t));
            return out;
        }
        case MockModelConfig::Mode::SwapRotationForStrafe: {
            const double dt = 1.0 / intended.frame_rate;
            auto deltas = relative_deltas(intended);
            for (auto& delta : deltas) {
                double yaw = yaw_left_deg_of(delta.rotation);
                if (std::abs(yaw) < 1e-9) continue;
                // L-ish step -> strafe left (-x), R-ish step -> strafe right.
                double sign = yaw > 0.0 ? -1.0 : 1.0;
                delta.rotation = Rotation::identity();
                delta.translation = {sign * calib.linear_speed * dt, 0.0, 0.0};
            }
            return integrate_deltas(deltas, intended.frame_rate, timestamps);
        }
        case MockModelConfig::Mode::Noisy: {
            std::mt19937_64 rng(config.seed);
            std::normal_distribution<double> noise_t(0.0, config.sigma_t);
            std::normal_distribution<double> noise_r(
                0.0, geom::deg_to_rad(config.sigma_r));
            std::uniform_real_distribution<double> unit(-1.0, 1.0);
            Trajectory out = intended;
            for (auto& pose : out.poses) {
                if (config.sigma_t > 0.0) {
                    pose.translation = geom::add(
                        pose.translation,
                        Vec3{noise_t(rng), noise_t(rng), noise_t(rng)});
                }
                if (config.sigma_r > 0.0) {
                    Vec3 axis{unit(rng), unit(rng), unit(rng)};
                    if (geom::norm(axis) < 1e-6) axis = {0.0, 1.0, 0.0};
                    pose.rotation = compose(
                        pose.rotation,
                        Rotation::from_axis_angle(axis, noise_r(rng)));
                }
            }
            return out;
        }
    }
    throw ValidationError("invalid mock mode");
}

}  // namespace

GenerationResult mock_generate(const MockModelConfig& config,
                               const NativeActionPayload& payload,
                               const CalibrationProfile& calib,
                               const geom::CameraIntrinsics& intrinsics,
                               const fs::path& out_dir) {
    config.validate();
    intrinsics.validate();
    const auto start = std::chrono::steady_clock::now();

    const Trajectory intended = interpret_payload(payload, calib);
    if (intended.size() < 2)
        throw ValidationError("interpreted payload yields fewer than 2 poses");
    const Trajectory estimated = apply_obedience(config, intended, calib);

    fs::create_directories(out_dir);
    GenerationResult result;
    result.status = RunStatus::Completed;
    result.exit_code = 0;

    // SLAM-style estimate in the trajectory text format.
    result.estimated_trajectory = out_dir / "estimated.traj";
    geom::save_trajectory(estimated, result.estimated_trajectory);

    // Frames at the decimated mock video rate.
    result.frames_dir = out_dir / "frames";
    fs::create_directories(result.frames_dir);
    size_t frame_idx = 0;
    for (size_t i = 0; i < estimated.size(); i += config.frame_stride) {
        char name[32];
        std::snprintf(name, sizeof(name), "%06zu.png", frame_idx);
        png::write_rgb8(result.frames_dir / name, intrinsics.width,
                        intrinsics.height,
                        media::render_frame(intrinsics.width, intrinsics.height,
                                            config.seed, frame_idx,
                                            estimated.poses[i], intrinsics));
        ++frame_idx;
    }
    result.frame_count = frame_idx;

    // Reprojection observations: fixed world points seen by consecutive
    // sampled frames; the observed pixel comes from the intended pose, the
    // reconstructed point from the estimated pose. Faithful runs therefore
    // reproject exactly; disobedient runs do not.
    std::string jsonl;
    const size_t obs_stride = std::max<size_t>(config.frame_stride, 1);
    for (size_t j = obs_stride; j < estimated.size(); j += obs_stride) {
        Pose intended_inv = inverse(intended.poses[j]);
        Pose estimated_inv = inverse(estimated.poses[j]);
        for (int gx = -2; gx <= 2; ++gx) {
            for (int gz = 2; gz <= 4; ++gz) {
                Vec3 world{static_cast<double>(gx) * 3.0, 0.5,
                           static_cast<double>(gz) * 10.0};
                Vec3 p_int = geom::add(intended_inv.rotation.rotate(world),
                                       intended_inv.translation);
                Vec3 p_est = geom::add(estimated_inv.rotation.rotate(world),
                                       estimated_inv.translation);
                if (p_int[2] <= 0.5 || p_est[2] <= 0.1) continue;
                auto px = intrinsics.project(p_int);
                if (px[0] < 0.0 || px[0] > intrinsics.width || px[1] < 0.0 ||
                    px[1] > intrinsics.height)
                    continue;
                nlohmann::json row = {
                    {"i", static_cast<int>(j - obs_stride)},
                    {"j", static_cast<int>(j)},
                    {"px", px[0]},
                    {"py", px[1]},
                    {"X", p_est[0]},
                    {"Y", p_est[1]},
                    {"Z", p_est[2]}};
                jsonl += row.dump();
                jsonl += '\n';
            }
        }
    }
    if (!jsonl.empty()) {
        result.reprojection_file = out_dir / "reproj.jsonl";
        write_file(result.reprojection_file, jsonl);
    }

    std::ostringstream log;
    log << "mock model: mode=" << mock_mode_name(config.mode)
        << " seed=" << config.seed << " poses=" << estimated.size()
        << " frames=" << result.frame_count << "\n";
    write_file(out_dir / "runner.log", log.str());

    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return result;
}

// ── Runner invocation ────────────────────────────────────────────────────────

GenerationResult run_case(const std::vector<std::string>& runner_argv,
                          const fs::path& case_dir, double timeout_seconds) {
    if (runner_argv.empty())
        throw ValidationError("runner command line is empty");
    if (!fs::exists(case_dir / "manifest.json"))
        throw ValidationError("case directory missing manifest.json: " +
                              case_dir.string());

    GenerationResult result;
    result.case_id = case_dir.filename().string();

    std::vector<std::string> argv = runner_argv;
    argv.push_back(case_dir.string());

    const fs::path log_path = case_dir / "runner.log";
    std::error_code ec;
    fs::remove(log_path, ec);  // fresh log per invocation

    const auto start = std::chrono::steady_clock::now();
    proc::Result run = proc::run_redirected(argv, log_path, timeout_seconds);
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    result.exit_code = run.exit_code;

    if (run.timed_out) {
        result.status = RunStatus::Incomplete;
        result.reason = "timeout after " + format_double(timeout_seconds) + " s";
        return result;
    }
    if (run.exit_code != 0) {
        result.status = RunStatus::Incomplete;
        result.reason = "runner exited with code " +
                        std::to_string(run.exit_code) + " (see runner.log)";
        return result;
    }

    // Output contract: frames/%06d.png with >= 2 frames, or video.mp4.
    const fs::path frames_dir = case_dir / "frames";
    const fs::path video_file = case_dir / "video.mp4";
    if (fs::is_directory(frames_dir)) {
        auto frames = list_files(frames_dir, ".png");
        result.frame_count = frames.size();
        result.frames_dir = frames_dir;
    }
    if (fs::exists(video_file)) result.video_file = video_file;

    if (result.frame_count < 2 && result.video_file.empty()) {
        result.status = RunStatus::ContractViolation;
        result.reason = result.frame_count == 0
                            ? "runner exited 0 but wrote no frames"
                            : "runner wrote fewer than 2 frames";
        return result;
    }

    if (fs::exists(case_dir / "estimated.traj"))
        result.estimated_trajectory = case_dir / "estimated.traj";
    if (fs::exists(case_dir / "reproj.jsonl"))
        result.reprojection_file = case_dir / "reproj.jsonl";

    result.status = RunStatus::Completed;
    return result;
}

}  // namespace worldmark::harness
