#include "worldmark/harness.hpp"

#include <cmath>
#include <cstdlib>

#include "doctest.h"
#include "json.hpp"
#include "worldmark/common.hpp"
#include "worldmark/metrics.hpp"
#include "worldmark/synthesis.hpp"
#include "worldmark/trajectory_io.hpp"

using namespace worldmark;
using geom::Trajectory;
using harness::MockModelConfig;
using synth::CalibrationProfile;

namespace {

const CalibrationProfile kMock{"mock", 1.0, 9.0, 16.0};
const geom::CameraIntrinsics kIntr{110.0, 110.0, 64.0, 64.0, 128, 128};

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name)
        : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

actions::ActionSequence seq_of(const char* dsl) {
    return actions::parse_sequence(dsl, true);
}

/// Max per-frame deviation between two trajectories, translation in meters
/// and rotation in degrees.
std::pair<double, double> max_deviation(const Trajectory& a,
                                        const Trajectory& b) {
    REQUIRE(a.size() == b.size());
    double dt = 0.0, dr = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dt = std::max(dt, geom::norm(geom::sub(a.poses[i].translation,
                                               b.poses[i].translation)));
        dr = std::max(dr,
                      geom::geodesic_deg(a.poses[i].rotation, b.poses[i].rotation));
    }
    return {dt, dr};
}

/// Mean |yaw| of the ground-truth rotation profile, the oracle for the
/// swap-mode rotation error.
double mean_gt_yaw_deg(const Trajectory& gt) {
    double sum = 0.0;
    for (const auto& p : gt.poses)
        sum += geom::geodesic_deg(p.rotation, geom::Rotation::identity());
    return sum / static_cast<double>(gt.size());
}

}  // namespace

TEST_CASE("cross-adapter semantic equivalence via the mock interpreter") {
    auto registry = adapters::AdapterRegistry::with_defaults();
    const char* models[] = {"hy-world", "genie3", "matrix-game", "open-oasis",
                            "yume"};
    const CalibrationProfile profiles[] = {kMock,
                                           {"a", 0.5, 4.5, 10.0},
                                           {"b", 2.0, 12.0, 25.0}};
    for (const auto& calib : profiles) {
        const double step_t = calib.linear_speed / calib.frame_rate;
        const double step_r = calib.yaw_rate / calib.frame_rate;
        for (const char* dsl : {"W:20", "L:20", "W:20,R:20", "W:20,L:20,W:20"}) {
            Trajectory gt = synth::synthesize(seq_of(dsl), calib);
            for (const char* model : models) {
                auto payload =
                    registry.map(model, seq_of(dsl), calib, kIntr);
                Trajectory recovered = harness::interpret_payload(payload, calib);
                auto [dt, dr] = max_deviation(gt, recovered);
                // Within one frame-step of motion.
                CHECK(dt <= step_t + 1e-9);
                CHECK(dr <= step_r + 1e-9);
            }
        }
    }
}

TEST_CASE("interpret_payload rejects uninterpretable input") {
    auto strided = adapters::to_pose_stream(seq_of("W:20"), kMock, 4);
    adapters::NativeActionPayload payload{"hy-world", strided};
    CHECK_THROWS_AS(harness::interpret_payload(payload, kMock),
                    ValidationError);
}

TEST_CASE("mock modes") {
    auto registry = adapters::AdapterRegistry::with_defaults();

    SUBCASE("faithful on W:20 reproduces the ground truth exactly") {
        TempDir out("wm_mock_faithful");
        auto payload = registry.map("mock", seq_of("W:20"), kMock, kIntr);
        MockModelConfig config;
        auto result = harness::mock_generate(config, payload, kMock, kIntr,
                                             out.path);
        CHECK(result.status == harness::RunStatus::Completed);
        CHECK(result.frame_count >= 2);

        Trajectory gt = synth::synthesize(seq_of("W:20"), kMock);
        Trajectory est = geom::load_trajectory(result.estimated_trajectory,
                                               kMock.frame_rate);
        REQUIRE(est.size() == gt.size());
        CHECK(metrics::translation_error(align_to_first(gt),
                                         align_to_first(est)) == 0.0);
        CHECK(metrics::rotation_error(align_to_first(gt),
                                      align_to_first(est)) == 0.0);
        // Faithful reprojection is exact.
        auto obs = metrics::load_observations_jsonl(result.reprojection_file);
        CHECK(metrics::reprojection_error(obs, kIntr) < 1e-9);
    }

    SUBCASE("swap mode on L:20: rotation error equals the mean gt yaw") {
        TempDir out("wm_mock_swap");
        auto payload = registry.map("mock", seq_of("L:20"), kMock, kIntr);
        MockModelConfig config;
        config.mode = MockModelConfig::Mode::SwapRotationForStrafe;
        auto result =
            harness::mock_generate(config, payload, kMock, kIntr, out.path);

        Trajectory gt = synth::synthesize(seq_of("L:20"), kMock);
        Trajectory est = geom::load_trajectory(result.estimated_trajectory,
                                               kMock.frame_rate);
        double rot = metrics::rotation_error(align_to_first(gt),
                                             align_to_first(est));
        double oracle = mean_gt_yaw_deg(align_to_first(gt));
        CHECK(rot == doctest::Approx(oracle).epsilon(0.05));
        CHECK(oracle == doctest::Approx(90.0).epsilon(1e-6));

        // The estimate strafes, so it moves; but a pure-rotation ground
        // truth has zero translation everywhere, and the least-squares
        // scale collapses any estimate onto it: the scale-invariant
        // translation error is exactly 0 for a static reference path.
        double trans = metrics::translation_error(align_to_first(gt),
                                                  align_to_first(est));
        CHECK(trans == 0.0);
        double moved = 0.0;
        for (const auto& p : est.poses)
            moved = std::max(moved, geom::norm(p.translation));
        CHECK(moved > 1.0);  // it really did strafe
    }

    SUBCASE("static mode scores the closed-form maximal translation penalty") {
        TempDir out("wm_mock_static");
        auto payload = registry.map("mock", seq_of("W:20"), kMock, kIntr);
        MockModelConfig config;
        config.mode = MockModelConfig::Mode::Static;
        auto result =
            harness::mock_generate(config, payload, kMock, kIntr, out.path);

        Trajectory gt = synth::synthesize(seq_of("W:20"), kMock);
        Trajectory est = geom::load_trajectory(result.estimated_trajectory,
                                               kMock.frame_rate);
        double trans = metrics::translation_error(align_to_first(gt),
                                                  align_to_first(est));
        // Straight line: positions k*d for k = 0..n-1 with d = v/fps, so
        // the mean norm is d*(n-1)/2.
        const double d = kMock.linear_speed / kMock.frame_rate;
        const auto n = static_cast<double>(gt.size());
        CHECK(trans == doctest::Approx(d * (n - 1) / 2.0).epsilon(1e-12));
    }

    SUBCASE("disobedience ordering on a rotation-bearing sequence") {
        auto payload = registry.map("mock", seq_of("W:20,L:20"), kMock, kIntr);
        Trajectory gt = synth::synthesize(seq_of("W:20,L:20"), kMock);

        auto rotation_error_of = [&](MockModelConfig config,
                                     const char* label) {
            TempDir out(std::string("wm_mock_order_") + label);
            config.seed = 42;
            auto result = harness::mock_generate(config, payload, kMock, kIntr,
                                                 out.path);
            Trajectory est = geom::load_trajectory(result.estimated_trajectory,
                                                   kMock.frame_rate);
            return metrics::rotation_error(align_to_first(gt),
                                           align_to_first(est));
        };
        MockModelConfig faithful;
        MockModelConfig noisy;
        noisy.mode = MockModelConfig::Mode::Noisy;
        noisy.sigma_r = 2.0;
        MockModelConfig swap;
        swap.mode = MockModelConfig::Mode::SwapRotationForStrafe;

        double e_faithful = rotation_error_of(faithful, "faithful");
        double e_noisy = rotation_error_of(noisy, "noisy");
        double e_swap = rotation_error_of(swap, "swap");
        CHECK(e_faithful < e_noisy);
        CHECK(e_noisy < e_swap);
    }

    SUBCASE("determinism: identical config and payload, byte-identical output") {
        auto payload = registry.map("mock", seq_of("W:20,R:20"), kMock, kIntr);
        MockModelConfig config;
        config.mode = MockModelConfig::Mode::Noisy;
        config.sigma_t = 0.05;
        config.sigma_r = 1.0;
        config.seed = 1234;

        TempDir a("wm_mock_det_a"), b("wm_mock_det_b");
        harness::mock_generate(config, payload, kMock, kIntr, a.path);
        harness::mock_generate(config, payload, kMock, kIntr, b.path);

        CHECK(read_file(a.path / "estimated.traj") ==
              read_file(b.path / "estimated.traj"));
        auto frames_a = list_files(a.path / "frames", ".png");
        auto frames_b = list_files(b.path / "frames", ".png");
        REQUIRE(frames_a.size() == frames_b.size());
        for (size_t i = 0; i < frames_a.size(); ++i)
            CHECK(read_file(frames_a[i]) == read_file(frames_b[i]));
    }
}

TEST_CASE("run_case subprocess contract") {
    auto write_case_manifest = [](const fs::path& dir) {
        write_file(dir / "manifest.json", "{}");
    };

    SUBCASE("runner exiting 1 yields incomplete with diagnostics retained") {
        TempDir dir("wm_run_fail");
        write_case_manifest(dir.path);
        auto result = harness::run_case(
            {"/bin/sh", "-c", "echo boom >&2; exit 1"}, dir.path, 10.0);
        CHECK(result.status == harness::RunStatus::Incomplete);
        CHECK(result.exit_code == 1);
        CHECK(result.reason.find("exit") != std::string::npos);
        CHECK(read_file(dir.path / "runner.log").find("boom") !=
              std::string::npos);
    }
    SUBCASE("runner writing no frames is a contract violation") {
        TempDir dir("wm_run_noframes");
        write_case_manifest(dir.path);
        auto result =
            harness::run_case({"/bin/sh", "-c", "exit 0"}, dir.path, 10.0);
        CHECK(result.status == harness::RunStatus::ContractViolation);
        CHECK(result.reason.find("frames") != std::string::npos);
    }
    SUBCASE("timeout kills the runner and reports incomplete") {
        TempDir dir("wm_run_timeout");
        write_case_manifest(dir.path);
        auto result =
            harness::run_case({"/bin/sh", "-c", "sleep 30"}, dir.path, 0.3);
        CHECK(result.status == harness::RunStatus::Incomplete);
        CHECK(result.reason.find("timeout") != std::string::npos);
    }
    SUBCASE("well-behaved runner output is collected per the contract") {
        TempDir dir("wm_run_ok");
        write_case_manifest(dir.path);
        auto result = harness::run_case(
            {"/bin/sh", "-c",
             "mkdir -p \"$1/frames\" && touch \"$1/frames/000000.png\" "
             "\"$1/frames/000001.png\" \"$1/frames/000002.png\" && "
             "echo '0 0 0 0 0 0 0 1' > \"$1/estimated.traj\"",
             "sh"},
            dir.path, 10.0);
        CHECK(result.status == harness::RunStatus::Completed);
        CHECK(result.frame_count == 3);
        CHECK(result.estimated_trajectory == dir.path / "estimated.traj");
        CHECK(result.reprojection_file.empty());
    }
}

TEST_CASE("mock runner binary end to end") {
    const char* bin_dir = std::getenv("WORLDMARK_BIN_DIR");
    if (!bin_dir) return;  // only meaningful under ctest

    TempDir dir("wm_runner_bin");
    nlohmann::json manifest = {
        {"case_id", "t1"},
        {"reference", "reference.png"},
        {"meta", {{"viewpoint", "first"}, {"style", "real"}, {"scene", "nature"}}},
        {"sequence_id", "1"},
        {"dsl", "W:20"},
        {"tier", "Easy"},
        {"model_id", "mock"},
        {"calibration",
         {{"linear_speed", 1.0}, {"yaw_rate", 9.0}, {"frame_rate", 16.0}}},
        {"intrinsics",
         {{"fx", 110.0}, {"fy", 110.0}, {"cx", 64.0}, {"cy", 64.0},
          {"width", 128}, {"height", 128}}},
        {"seed", 7},
        {"mock", {{"mode", "faithful"}, {"sigma_t", 0.0}, {"sigma_r", 0.0},
                  {"frame_stride", 8}}}};
    write_file(dir.path / "manifest.json", manifest.dump(2));
    write_file(dir.path / "reference.png", "ref");
    auto payload = adapters::AdapterRegistry::with_defaults().map(
        "mock", seq_of("W:20"), kMock, kIntr);
    write_file(dir.path / adapters::payload_filename(payload),
               adapters::serialize_payload(payload));

    auto result = harness::run_case(
        {(fs::path(bin_dir) / "worldmark-mock-runner").string()}, dir.path,
        60.0);
    CHECK(result.status == harness::RunStatus::Completed);
    CHECK(result.frame_count == 41);  // 321 poses at stride 8
    Trajectory est =
        geom::load_trajectory(dir.path / "estimated.traj", kMock.frame_rate);
    CHECK(est.size() == 321);
}
