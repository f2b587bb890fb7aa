#include "worldmark/pipeline.hpp"

#include <cstdlib>
#include <set>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "worldmark/common.hpp"
#include "worldmark/mock_media.hpp"
#include "worldmark/scorer.hpp"

using namespace worldmark;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name)
        : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

fs::path mock_runner_path() {
    const char* bin_dir = std::getenv("WORLDMARK_BIN_DIR");
    if (!bin_dir) return {};
    return fs::path(bin_dir) / "worldmark-mock-runner";
}

pipeline::Config test_config() {
    pipeline::Config config;
    config.jobs = 2;
    config.seed = 42;
    config.mock.frame_stride = 8;
    fs::path runner = mock_runner_path();
    if (!runner.empty()) config.runners["mock"] = {runner.string()};
    return config;
}

}  // namespace

TEST_CASE("config file round trip") {
    pipeline::Config config = pipeline::config_from_json(R"({
        "calibration": {"mock": {"linear_speed": 2.0}},
        "judge": {"client": "fixed", "frames": 8},
        "scorers": {"aesthetic": {"kind": "mock", "value": 0.7},
                    "sample_stride": 4},
        "mock": {"mode": "noisy", "sigma_r": 1.5},
        "run_timeout_seconds": 120,
        "seed": 7,
        "jobs": 3
    })");
    CHECK(config.calibration.profile_for("mock").linear_speed == 2.0);
    CHECK(config.judge.client == "fixed");
    CHECK(config.judge.frames_per_request == 8);
    CHECK(config.aesthetic_scorer.mock_value == 0.7);
    CHECK(config.scorer_sample_stride == 4);
    CHECK(config.mock.mode == harness::MockModelConfig::Mode::Noisy);
    CHECK(config.run_timeout_seconds == 120.0);
    CHECK(config.seed == 7);
    CHECK(config.jobs == 3);

    // Snapshot text parses back to an equivalent config.
    auto snapshot = pipeline::config_to_json(config);
    auto reloaded = pipeline::config_from_json(snapshot);
    CHECK(reloaded.calibration.profile_for("mock").linear_speed == 2.0);
    CHECK(pipeline::config_to_json(reloaded) == snapshot);
}

TEST_CASE("gen-cases arithmetic and filters") {
    TempDir images("wm_pipe_images");
    media::generate_image_suite(images.path, 2);  // 4 images

    SUBCASE("2 first-person images x 5 Easy actions x 1 model = 10 cases") {
        TempDir work("wm_pipe_work1");
        pipeline::GenCasesOptions options;
        options.image_dir = images.path;
        options.models = {"mock"};
        options.select = "all";
        options.tier = "Easy";
        options.viewpoint = "first";
        auto manifest = pipeline::gen_cases(test_config(), options, work.path);
        CHECK(manifest.images.size() == 2);
        CHECK(manifest.cases.size() == 10);
        // Case directories carry the inputs.
        for (const auto& c : manifest.cases) {
            auto dir = pipeline::case_dir(work.path, c.id);
            CHECK(fs::exists(dir / "manifest.json"));
            CHECK(fs::exists(dir / "reference.png"));
        }
        // Library export rides along.
        CHECK(fs::exists(work.path / "actions_library.json"));
    }
    SUBCASE("missing sidecar is an error") {
        TempDir bare("wm_pipe_bare");
        write_file(bare.path / "img.png", "x");
        TempDir work("wm_pipe_work2");
        pipeline::GenCasesOptions options;
        options.image_dir = bare.path;
        options.models = {"mock"};
        CHECK_THROWS_AS(pipeline::gen_cases(test_config(), options, work.path),
                        ValidationError);
    }
    SUBCASE("vlm selection with the rule judge: indoor images avoid strafes") {
        TempDir work("wm_pipe_work3");
        pipeline::GenCasesOptions options;
        options.image_dir = images.path;
        options.models = {"mock"};
        options.select = "vlm";
        auto manifest = pipeline::gen_cases(test_config(), options, work.path);
        CHECK(manifest.cases.size() == manifest.images.size() * 5);
        for (const auto& entry : manifest.images) {
            REQUIRE(entry.action_ids.size() == 5);
            if (entry.meta.scene == "indoor") {
                for (const auto& id : entry.action_ids) {
                    const auto& seq = actions::standard_library().by_id(id);
                    CHECK_FALSE(seq.contains(actions::Kind::StrafeLeft));
                    CHECK_FALSE(seq.contains(actions::Kind::StrafeRight));
                }
            }
        }
    }
    SUBCASE("file selection with default entry") {
        TempDir work("wm_pipe_work4");
        write_file(work.path / "selection.json",
                   R"({"default": ["1", "5", "13"]})");
        pipeline::GenCasesOptions options;
        options.image_dir = images.path;
        options.models = {"mock"};
        options.select = "file";
        options.select_file = work.path / "selection.json";
        auto manifest = pipeline::gen_cases(test_config(), options, work.path);
        CHECK(manifest.cases.size() == 4 * 3);
    }
    SUBCASE("unknown model fails fast") {
        TempDir work("wm_pipe_work5");
        pipeline::GenCasesOptions options;
        options.image_dir = images.path;
        options.models = {"not-a-model"};
        CHECK_THROWS_AS(pipeline::gen_cases(test_config(), options, work.path),
                        LookupError);
    }
    SUBCASE("third-person restriction across several models") {
        TempDir work("wm_pipe_work6");
        pipeline::GenCasesOptions options;
        options.image_dir = images.path;
        options.models = {"matrix-game", "hy-world", "genie3"};
        options.select = "all";
        options.viewpoint = "third";
        auto manifest = pipeline::gen_cases(test_config(), options, work.path);
        CHECK(manifest.images.size() == 2);  // the two third-person views
        CHECK(manifest.cases.size() == 2 * 15 * 3);
        for (const auto& c : manifest.cases)
            CHECK(c.meta.viewpoint == "third");
    }
}

TEST_CASE("four-stage pipeline on a small mock benchmark") {
    if (mock_runner_path().empty()) return;  // needs the built runner

    TempDir images("wm_pipe_e2e_images");
    media::generate_image_suite(images.path, 2);  // 4 images
    TempDir work("wm_pipe_e2e");
    pipeline::Config config = test_config();

    pipeline::GenCasesOptions options;
    options.image_dir = images.path;
    options.models = {"mock"};
    options.select = "vlm";
    auto manifest = pipeline::gen_cases(config, options, work.path);
    REQUIRE(manifest.cases.size() == 20);

    CHECK(pipeline::map_actions(config, work.path) == 20);
    CHECK(pipeline::run_generation(config, work.path) == 20);
    CHECK(pipeline::evaluate(config, work.path) == 20);

    SUBCASE("faithful mock scores zero control error everywhere") {
        for (const auto& c : manifest.cases) {
            auto report = report::report_from_json(read_file(
                pipeline::case_dir(work.path, c.id) / "report.json"));
            REQUIRE(report.translation_error.has_value());
            REQUIRE(report.rotation_error.has_value());
            CHECK(*report.translation_error == 0.0);
            CHECK(*report.rotation_error == 0.0);
            CHECK(report.complete());
        }
    }

    SUBCASE("stage idempotence: unchanged inputs are zero work") {
        CHECK(pipeline::map_actions(config, work.path) == 0);
        CHECK(pipeline::run_generation(config, work.path) == 0);
        CHECK(pipeline::evaluate(config, work.path) == 0);
    }

    SUBCASE("deleting one case report re-evaluates exactly one case") {
        fs::remove(pipeline::case_dir(work.path, manifest.cases[3].id) /
                   "report.json");
        CHECK(pipeline::evaluate(config, work.path) == 1);
    }

    SUBCASE("reports render with the fixed column order") {
        auto table = pipeline::write_reports(work.path);
        CHECK(table.find("Aesthetic") != std::string::npos);
        size_t aesthetic = table.find("Aesthetic");
        size_t imaging = table.find("Imaging");
        size_t trans = table.find("TransErr");
        size_t rot = table.find("RotErr");
        size_t reproj = table.find("ReprojErr");
        size_t state = table.find("State");
        size_t content = table.find("Content");
        size_t style = table.find("Style");
        CHECK(aesthetic < imaging);
        CHECK(imaging < trans);
        CHECK(trans < rot);
        CHECK(rot < reproj);
        CHECK(reproj < state);
        CHECK(state < content);
        CHECK(content < style);
        CHECK(fs::exists(work.path / "leaderboard.csv"));
        CHECK(fs::exists(work.path / "leaderboard.json"));

        // CSV and JSON carry identical values.
        auto rows = pipeline::collect_rows(work.path);
        auto doc = json::parse(report::render_json(rows));
        std::string csv = report::render_csv(rows);
        for (const auto& entry : doc) {
            for (const auto& [metric, value] : entry.at("means").items()) {
                if (value.is_null()) continue;
                CHECK(csv.find(format_double(value.get<double>())) !=
                      std::string::npos);
            }
        }
    }

    SUBCASE("case isolation: corrupting one case changes only that row") {
        // Corrupt one case's estimated trajectory and re-evaluate.
        auto victim = manifest.cases[1].id;
        write_file(pipeline::case_dir(work.path, victim) / "estimated.traj",
                   "not a trajectory\n");
        pipeline::evaluate(config, work.path);
        auto victim_report = report::report_from_json(
            read_file(pipeline::case_dir(work.path, victim) / "report.json"));
        CHECK_FALSE(victim_report.complete());
        // Others untouched.
        auto other_report = report::report_from_json(read_file(
            pipeline::case_dir(work.path, manifest.cases[0].id) /
            "report.json"));
        CHECK(other_report.complete());
    }
}

TEST_CASE("leaderboard fixture renders the published row shape") {
    // Format fixture: a row with aesthetic 56.94 / imaging 74.36 renders
    // those exact figures in the table.
    metrics::MetricReport a;
    a.case_id = "c1";
    a.aesthetic = 56.94;
    a.imaging = 74.36;
    a.translation_error = 0.159;
    a.rotation_error = 1.324;
    a.reprojection_error = 0.9;
    a.state_consistency = 85.88;
    a.content_consistency = 80.0;
    a.style_consistency = 88.0;
    auto row = report::aggregate("first_real", "model-a", {a});
    auto table = report::render_table({row});
    CHECK(table.find("First-Person Real") != std::string::npos);
    CHECK(table.find("56.94") != std::string::npos);
    CHECK(table.find("74.36") != std::string::npos);
    CHECK(table.find("0.159") != std::string::npos);
    CHECK(table.find("85.88") != std::string::npos);

    SUBCASE("single-model split is best in every column") {
        size_t stars = 0;
        for (char ch : table)
            if (ch == '*') ++stars;
        CHECK(stars >= 8);  // one best marker per metric column
    }
    SUBCASE("incomplete metrics are counted, never imputed") {
        metrics::MetricReport partial;
        partial.case_id = "c2";
        partial.aesthetic = 50.0;
        partial.incomplete.emplace_back("imaging", "scorer failed");
        auto row2 =
            report::aggregate("first_real", "model-a", {a, partial});
        CHECK(row2.counts[0] == 2);  // aesthetic present twice
        CHECK(row2.counts[1] == 1);  // imaging only once
        CHECK(row2.incomplete_cases == 1);
        CHECK(*row2.means[0] == doctest::Approx((56.94 + 50.0) / 2));
        CHECK(*row2.means[1] == doctest::Approx(74.36));
    }
}

TEST_CASE("correlate-human on synthetic rankings") {
    // Build a tiny evaluated workdir by hand: three models, one case each.
    TempDir work("wm_pipe_corr");
    fs::create_directories(work.path / "cases");

    pipeline::Manifest manifest;
    manifest.models = {"model-a", "model-b", "model-c"};
    manifest.config_snapshot = pipeline::config_to_json(pipeline::Config{});
    const double rot_errors[] = {1.0, 2.0, 3.0};  // a best, c worst
    for (int m = 0; m < 3; ++m) {
        harness::EvaluationCase c;
        c.id = "img__s01__model-" + std::string(1, char('a' + m));
        c.image = "cases/" + c.id + "/reference.png";
        c.meta = {"first", "real", "nature"};
        c.sequence_id = "1";
        c.sequence_dsl = "W:20";
        c.tier = "Easy";
        c.model_id = manifest.models[m];
        manifest.cases.push_back(c);

        metrics::MetricReport report;
        report.case_id = c.id;
        report.rotation_error = rot_errors[m];
        report.aesthetic = 90.0 - 10.0 * m;  // a best again
        fs::create_directories(pipeline::case_dir(work.path, c.id));
        write_file(work.path / c.image, "ref");
        write_file(pipeline::case_dir(work.path, c.id) / "report.json",
                   report::report_to_json(report));
    }
    pipeline::save_manifest(manifest, work.path);

    SUBCASE("rankings equal to the metric-induced order give rho = 1") {
        write_file(work.path / "human.csv",
                   "set1,model-a,model-b,model-c\n"
                   "set2,model-a,model-b,model-c\n");
        auto results = pipeline::correlate_human(
            work.path, work.path / "human.csv", "rotation_error");
        REQUIRE(results.size() == 1);
        CHECK(results[0].rho == doctest::Approx(1.0).epsilon(1e-12));
        // Score metrics rank descending: same order for aesthetic.
        auto aes = pipeline::correlate_human(work.path,
                                             work.path / "human.csv",
                                             "aesthetic");
        CHECK(aes[0].rho == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("inverted rankings give rho = -1") {
        write_file(work.path / "human.csv", "set1,model-c,model-b,model-a\n");
        auto results = pipeline::correlate_human(
            work.path, work.path / "human.csv", "rotation_error");
        CHECK(results[0].rho == doctest::Approx(-1.0).epsilon(1e-12));
    }
    SUBCASE("model-set mismatch rejected") {
        write_file(work.path / "human.csv", "set1,model-a,model-b,model-x\n");
        CHECK_THROWS_AS(pipeline::correlate_human(work.path,
                                                  work.path / "human.csv",
                                                  "rotation_error"),
                        ValidationError);
    }
    SUBCASE("dimension 'all' reports every column with values") {
        write_file(work.path / "human.csv", "set1,model-a,model-b,model-c\n");
        CHECK_THROWS_AS(
            pipeline::correlate_human(work.path, work.path / "human.csv",
                                      "all"),
            ValidationError);  // most columns have no values in this fixture
        auto one = pipeline::correlate_human(work.path, work.path / "human.csv",
                                             "aesthetic");
        CHECK(one.size() == 1);
    }
}

TEST_CASE("subprocess and http scorer transports") {
    const char* bin_dir = std::getenv("WORLDMARK_BIN_DIR");
    if (!bin_dir) return;

    TempDir frames("wm_scorer_frames");
    for (int i = 0; i < 4; ++i)
        write_file(frames.path / (std::to_string(i) + ".png"),
                   "frame" + std::to_string(i));

    scorer::SubprocessScorer sub(
        "aesthetic",
        {(fs::path(bin_dir) / "worldmark-mock-scorer").string(), "--value",
         "0.25"});
    auto files = list_files(frames.path, ".png");
    auto scores = sub.score(files);
    REQUIRE(scores.size() == files.size());
    for (double s : scores) CHECK(s == 0.25);

    // Content-hash mode is deterministic across invocations.
    scorer::SubprocessScorer hashed(
        "imaging", {(fs::path(bin_dir) / "worldmark-mock-scorer").string()});
    auto first = hashed.score(files);
    auto second = hashed.score(files);
    CHECK(first == second);

    SUBCASE("failure paths surface as contract errors") {
        scorer::SubprocessScorer broken("aesthetic", {"/bin/false"});
        CHECK_THROWS_AS(broken.score(files), ContractError);
        scorer::SubprocessScorer garbage("aesthetic",
                                         {"/bin/echo", "not json"});
        CHECK_THROWS_AS(garbage.score(files), ContractError);
    }
}

TEST_CASE("http scorer over a loopback server") {
    TempDir frames("wm_scorer_http");
    for (int i = 0; i < 3; ++i)
        write_file(frames.path / (std::to_string(i) + ".png"), "f");
    auto files = list_files(frames.path, ".png");

    httplib::Server server;
    server.Post("/score", [](const httplib::Request& req,
                             httplib::Response& res) {
        auto doc = json::parse(req.body);
        CHECK(doc.at("scorer_id") == "aesthetic");
        json scores = json::array();
        for (size_t i = 0; i < doc.at("frames").size(); ++i)
            scores.push_back(0.6);
        res.set_content(json({{"scores", scores}}).dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    scorer::HttpScorer http("aesthetic",
                            "http://127.0.0.1:" + std::to_string(port) +
                                "/score");
    auto scores = http.score(files);
    REQUIRE(scores.size() == 3);
    for (double s : scores) CHECK(s == 0.6);
    CHECK(metrics::score_visual(frames.path, http, metrics::ScoreScale::Unit,
                                1) == doctest::Approx(60.0));

    server.stop();
    server_thread.join();

    scorer::HttpScorer unreachable("aesthetic", "http://127.0.0.1:1/score");
    CHECK_THROWS_AS(unreachable.score(files), ContractError);
}

TEST_CASE("vlm selection below the floor is padded rotation-first") {
    TempDir images("wm_pipe_pad_images");
    media::generate_image_suite(images.path, 1);  // 2 images
    TempDir work("wm_pipe_pad_work");

    // Fixed judge that blocks every translation axis: the filter keeps only
    // the 3 rotation-only sequences, so selection must pad up to 5.
    pipeline::Config config = test_config();
    config.judge.client = "fixed";
    config.judge.fixed_scene_body =
        R"({"forward_blocked": true, "backward_blocked": true,
            "lateral_blocked": true, "rationale": "boxed in"})";

    pipeline::GenCasesOptions options;
    options.image_dir = images.path;
    options.models = {"mock"};
    options.select = "vlm";
    auto manifest = pipeline::gen_cases(config, options, work.path);
    for (const auto& entry : manifest.images) {
        REQUIRE(entry.action_ids.size() == 5);
        // Rotation-only sequences first (5, 13, 14), then padding in
        // library order.
        CHECK(entry.action_ids[0] == "5");
        CHECK(entry.action_ids[1] == "13");
        CHECK(entry.action_ids[2] == "14");
    }
}
