#include "worldmark/pipeline.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <semaphore>
#include <sstream>

#include "json.hpp"
#include "worldmark/actions.hpp"
#include "worldmark/metrics.hpp"
#include "worldmark/synthesis.hpp"
#include "worldmark/trajectory_io.hpp"

namespace worldmark::pipeline {

using actions::ActionSequence;
using harness::EvaluationCase;
using metrics::MetricReport;
using nlohmann::json;

namespace {

json judge_stats_to_json(const judge::JudgeStats& stats) {
    return {{"requests", stats.requests},
            {"cache_hits", stats.cache_hits},
            {"client_calls", stats.client_calls},
            {"network_calls", stats.network_calls}};
}

judge::JudgeStats g_last_judge_stats;
std::mutex g_stats_mutex;

}  // namespace

judge::JudgeStats last_judge_stats() {
    std::lock_guard<std::mutex> lock(g_stats_mutex);
    return g_last_judge_stats;
}

// ── Configuration ────────────────────────────────────────────────────────────

namespace {

metrics::ScoreScale scale_from_name(const std::string& name) {
    if (name == "unit") return metrics::ScoreScale::Unit;
    if (name == "laion") return metrics::ScoreScale::Laion;
    if (name == "native") return metrics::ScoreScale::Native;
    throw LookupError("unknown score scale: " + name);
}

std::string scale_name(metrics::ScoreScale scale) {
    switch (scale) {
        case metrics::ScoreScale::Unit: return "unit";
        case metrics::ScoreScale::Laion: return "laion";
        case metrics::ScoreScale::Native: return "native";
    }
    throw ValidationError("invalid score scale");
}

void scorer_from_json(scorer::ScorerConfig& config, const json& doc) {
    if (doc.contains("kind")) config.kind = doc.at("kind").get<std::string>();
    if (doc.contains("value")) config.mock_value = doc.at("value").get<double>();
    if (doc.contains("command"))
        config.command = doc.at("command").get<std::vector<std::string>>();
    if (doc.contains("endpoint"))
        config.endpoint = doc.at("endpoint").get<std::string>();
    if (doc.contains("scale"))
        config.scale = scale_from_name(doc.at("scale").get<std::string>());
    if (doc.contains("timeout_seconds"))
        config.timeout_seconds = doc.at("timeout_seconds").get<double>();
}

json scorer_to_json(const scorer::ScorerConfig& config) {
    json doc;
    doc["kind"] = config.kind;
    if (config.mock_value) doc["value"] = *config.mock_value;
    if (!config.command.empty()) doc["command"] = config.command;
    if (!config.endpoint.empty()) doc["endpoint"] = config.endpoint;
    doc["scale"] = scale_name(config.scale);
    doc["timeout_seconds"] = config.timeout_seconds;
    return doc;
}

}  // namespace

Config config_from_json(const std::string& json_text) {
    Config config;
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    if (doc.contains("calibration"))
        config.calibration.apply_json_overrides(doc.at("calibration").dump());
    if (doc.contains("judge")) {
        const json& j = doc.at("judge");
        if (j.contains("client")) config.judge.client = j.at("client");
        if (j.contains("model")) config.judge.model = j.at("model");
        if (j.contains("scripted_table"))
            config.judge.scripted_table =
                fs::path(j.at("scripted_table").get<std::string>());
        if (j.contains("retries")) config.judge.retries = j.at("retries");
        if (j.contains("frames"))
            config.judge.frames_per_request = j.at("frames");
        if (j.contains("fixed_score_body"))
            config.judge.fixed_score_body = j.at("fixed_score_body");
        if (j.contains("fixed_scene_body"))
            config.judge.fixed_scene_body = j.at("fixed_scene_body");
        if (j.contains("max_concurrent"))
            config.judge.max_concurrent = j.at("max_concurrent").get<size_t>();
    }
    if (doc.contains("scorers")) {
        const json& s = doc.at("scorers");
        if (s.contains("aesthetic"))
            scorer_from_json(config.aesthetic_scorer, s.at("aesthetic"));
        if (s.contains("imaging"))
            scorer_from_json(config.imaging_scorer, s.at("imaging"));
        if (s.contains("sample_stride"))
            config.scorer_sample_stride = s.at("sample_stride").get<size_t>();
        if (s.contains("max_concurrent"))
            config.scorer_max_concurrent =
                s.at("max_concurrent").get<size_t>();
    }
    if (doc.contains("mock")) {
        const json& m = doc.at("mock");
        if (m.contains("mode"))
            config.mock.mode =
                harness::mock_mode_from_name(m.at("mode").get<std::string>());
        if (m.contains("sigma_t")) config.mock.sigma_t = m.at("sigma_t");
        if (m.contains("sigma_r")) config.mock.sigma_r = m.at("sigma_r");
        if (m.contains("frame_stride"))
            config.mock.frame_stride = m.at("frame_stride").get<size_t>();
        config.mock.validate();
    }
    if (doc.contains("runners")) {
        for (const auto& [model, argv] : doc.at("runners").items())
            config.runners[model] = argv.get<std::vector<std::string>>();
    }
    if (doc.contains("run_timeout_seconds"))
        config.run_timeout_seconds = doc.at("run_timeout_seconds");
    if (doc.contains("intrinsics")) {
        const json& k = doc.at("intrinsics");
        config.intrinsics = {k.at("fx"), k.at("fy"), k.at("cx"),
                             k.at("cy"), k.at("width"), k.at("height")};
        config.intrinsics.validate();
    }
    if (doc.contains("seed")) config.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("jobs")) config.jobs = doc.at("jobs").get<int>();
    return config;
}

Config load_config(const fs::path& path) {
    return config_from_json(read_file(path));
}

std::string config_to_json(const Config& config) {
    json calib;
    for (const std::string& id : config.calibration.model_ids()) {
        const auto& p = config.calibration.profile_for(id);
        calib[id] = {{"linear_speed", p.linear_speed},
                     {"yaw_rate", p.yaw_rate},
                     {"frame_rate", p.frame_rate}};
    }
    json doc;
    doc["calibration"] = calib;
    doc["judge"] = {{"client", config.judge.client},
                    {"model", config.judge.model},
                    {"retries", config.judge.retries},
                    {"frames", config.judge.frames_per_request},
                    {"max_concurrent", config.judge.max_concurrent}};
    if (!config.judge.scripted_table.empty())
        doc["judge"]["scripted_table"] = config.judge.scripted_table.string();
    doc["scorers"] = {{"aesthetic", scorer_to_json(config.aesthetic_scorer)},
                      {"imaging", scorer_to_json(config.imaging_scorer)},
                      {"sample_stride", config.scorer_sample_stride},
                      {"max_concurrent", config.scorer_max_concurrent}};
    doc["mock"] = {{"mode", harness::mock_mode_name(config.mock.mode)},
                   {"sigma_t", config.mock.sigma_t},
                   {"sigma_r", config.mock.sigma_r},
                   {"frame_stride", config.mock.frame_stride}};
    json runners = json::object();
    for (const auto& [model, argv] : config.runners) runners[model] = argv;
    doc["runners"] = runners;
    doc["run_timeout_seconds"] = config.run_timeout_seconds;
    doc["intrinsics"] = {{"fx", config.intrinsics.fx},
                         {"fy", config.intrinsics.fy},
                         {"cx", config.intrinsics.cx},
                         {"cy", config.intrinsics.cy},
                         {"width", config.intrinsics.width},
                         {"height", config.intrinsics.height}};
    doc["seed"] = config.seed;
    return doc.dump(2) + "\n";
}

// ── Manifest ─────────────────────────────────────────────────────────────────

fs::path case_dir(const fs::path& workdir, const std::string& case_id) {
    return workdir / "cases" / case_id;
}

std::uint64_t case_seed(std::uint64_t global_seed, const std::string& case_id) {
    return fnv1a64(case_id, kFnvOffset ^ global_seed);
}

void save_manifest(const Manifest& manifest, const fs::path& workdir) {
    json images = json::array();
    for (const auto& entry : manifest.images) {
        images.push_back({{"path", entry.path},
                          {"viewpoint", entry.meta.viewpoint},
                          {"style", entry.meta.style},
                          {"scene", entry.meta.scene},
                          {"actions", entry.action_ids}});
    }
    json cases = json::array();
    for (const auto& c : manifest.cases) {
        cases.push_back({{"id", c.id},
                         {"image", c.image.string()},
                         {"viewpoint", c.meta.viewpoint},
                         {"style", c.meta.style},
                         {"scene", c.meta.scene},
                         {"sequence_id", c.sequence_id},
                         {"dsl", c.sequence_dsl},
                         {"tier", c.tier},
                         {"model", c.model_id}});
    }
    json doc;
    doc["images"] = images;
    doc["models"] = manifest.models;
    doc["cases"] = cases;
    doc["config"] = json::parse(manifest.config_snapshot);
    write_file(workdir / "manifest.json", doc.dump(2) + "\n");
}

Manifest load_manifest(const fs::path& workdir) {
    json doc;
    try {
        doc = json::parse(read_file(workdir / "manifest.json"));
    } catch (const json::exception& e) {
        throw ParseError("manifest.json: " + std::string(e.what()));
    }
    Manifest manifest;
    for (const auto& entry : doc.at("images")) {
        ImageEntry image;
        image.path = entry.at("path").get<std::string>();
        image.meta = {entry.at("viewpoint").get<std::string>(),
                      entry.at("style").get<std::string>(),
                      entry.at("scene").get<std::string>()};
        image.action_ids = entry.at("actions").get<std::vector<std::string>>();
        manifest.images.push_back(std::move(image));
    }
    manifest.models = doc.at("models").get<std::vector<std::string>>();
    for (const auto& entry : doc.at("cases")) {
        EvaluationCase c;
        c.id = entry.at("id").get<std::string>();
        c.image = fs::path(entry.at("image").get<std::string>());
        c.meta = {entry.at("viewpoint").get<std::string>(),
                  entry.at("style").get<std::string>(),
                  entry.at("scene").get<std::string>()};
        c.sequence_id = entry.at("sequence_id").get<std::string>();
        c.sequence_dsl = entry.at("dsl").get<std::string>();
        c.tier = entry.at("tier").get<std::string>();
        c.model_id = entry.at("model").get<std::string>();
        if (!fs::exists(workdir / c.image))
            throw ValidationError("manifest case " + c.id +
                                  ": reference image missing: " +
                                  c.image.string());
        // The sequence must resolve: a standard library id or a custom DSL.
        bool standard = false;
        for (const auto& seq : actions::standard_library().sequences)
            standard |= seq.id == c.sequence_id;
        if (!standard) actions::parse_sequence(c.sequence_dsl, true);
        manifest.cases.push_back(std::move(c));
    }
    manifest.config_snapshot = doc.at("config").dump(2) + "\n";
    return manifest;
}

// ── Per-case state ───────────────────────────────────────────────────────────

namespace {

json load_state(const fs::path& dir) {
    const fs::path path = dir / "state.json";
    if (!fs::exists(path)) return json::object();
    try {
        return json::parse(read_file(path));
    } catch (const json::exception&) {
        return json::object();  // corrupt state: redo the work
    }
}

void save_state(const fs::path& dir, const json& state) {
    write_file(dir / "state.json", state.dump(2) + "\n");
}

struct CaseManifest {
    std::string case_id;
    std::string reference;  // file name inside the case dir
    media::ImageMeta meta;
    std::string sequence_id;
    std::string dsl;
    std::string tier;
    std::string model_id;
    synth::CalibrationProfile calib;
    geom::CameraIntrinsics intrinsics;
    std::uint64_t seed = 0;
    std::optional<harness::MockModelConfig> mock;
};

void save_case_manifest(const CaseManifest& cm, const fs::path& dir) {
    json doc;
    doc["case_id"] = cm.case_id;
    doc["reference"] = cm.reference;
    doc["meta"] = {{"viewpoint", cm.meta.viewpoint},
                   {"style", cm.meta.style},
                   {"scene", cm.meta.scene}};
    doc["sequence_id"] = cm.sequence_id;
    doc["dsl"] = cm.dsl;
    doc["tier"] = cm.tier;
    doc["model_id"] = cm.model_id;
    doc["calibration"] = {{"linear_speed", cm.calib.linear_speed},
                          {"yaw_rate", cm.calib.yaw_rate},
                          {"frame_rate", cm.calib.frame_rate}};
    doc["intrinsics"] = {{"fx", cm.intrinsics.fx},   {"fy", cm.intrinsics.fy},
                         {"cx", cm.intrinsics.cx},   {"cy", cm.intrinsics.cy},
                         {"width", cm.intrinsics.width},
                         {"height", cm.intrinsics.height}};
    doc["seed"] = cm.seed;
    if (cm.mock) {
        doc["mock"] = {{"mode", harness::mock_mode_name(cm.mock->mode)},
                       {"sigma_t", cm.mock->sigma_t},
                       {"sigma_r", cm.mock->sigma_r},
                       {"frame_stride", cm.mock->frame_stride}};
    }
    write_file(dir / "manifest.json", doc.dump(2) + "\n");
}

CaseManifest load_case_manifest(const fs::path& dir) {
    json doc;
    try {
        doc = json::parse(read_file(dir / "manifest.json"));
    } catch (const json::exception& e) {
        throw ParseError(dir.string() + "/manifest.json: " + e.what());
    }
    CaseManifest cm;
    cm.case_id = doc.at("case_id").get<std::string>();
    cm.reference = doc.at("reference").get<std::string>();
    cm.meta = {doc.at("meta").at("viewpoint").get<std::string>(),
               doc.at("meta").at("style").get<std::string>(),
               doc.at("meta").at("scene").get<std::string>()};
    cm.sequence_id = doc.at("sequence_id").get<std::string>();
    cm.dsl = doc.at("dsl").get<std::string>();
    cm.tier = doc.at("tier").get<std::string>();
    cm.model_id = doc.at("model_id").get<std::string>();
    const json& calib = doc.at("calibration");
    cm.calib = {cm.model_id, calib.at("linear_speed"), calib.at("yaw_rate"),
                calib.at("frame_rate")};
    const json& k = doc.at("intrinsics");
    cm.intrinsics = {k.at("fx"), k.at("fy"), k.at("cx"),
                     k.at("cy"), k.at("width"), k.at("height")};
    cm.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("mock")) {
        harness::MockModelConfig mock;
        mock.mode =
            harness::mock_mode_from_name(doc.at("mock").at("mode"));
        mock.sigma_t = doc.at("mock").at("sigma_t");
        mock.sigma_r = doc.at("mock").at("sigma_r");
        mock.frame_stride = doc.at("mock").at("frame_stride").get<size_t>();
        mock.seed = cm.seed;
        cm.mock = mock;
    }
    return cm;
}

int effective_jobs(const Config& config) {
    if (config.jobs > 0) return config.jobs;
    return std::max(1, omp_get_max_threads());
}

std::string hash_calib(const synth::CalibrationProfile& calib) {
    return format_double(calib.linear_speed) + "|" +
           format_double(calib.yaw_rate) + "|" +
           format_double(calib.frame_rate);
}

}  // namespace

// ── gen-cases ────────────────────────────────────────────────────────────────

namespace {

bool tier_matches(const ActionSequence& seq, const std::string& tier_filter) {
    if (tier_filter.empty()) return true;
    return actions::tier_name(seq.tier) == tier_filter;
}

/// Rotation-only sequences first, then the rest, both in library order.
std::vector<std::string> rotation_first_order() {
    std::vector<std::string> order;
    const auto& lib = actions::standard_library();
    for (const auto& seq : lib.sequences)
        if (seq.rotation_only()) order.push_back(seq.id);
    for (const auto& seq : lib.sequences)
        if (!seq.rotation_only()) order.push_back(seq.id);
    return order;
}

std::unique_ptr<judge::VlmClient> make_judge_client(const Config& config) {
    const std::string& kind = config.judge.client;
    if (kind == "rule") return std::make_unique<judge::RuleMockClient>();
    if (kind == "fixed") {
        if (!config.judge.fixed_score_body.empty() ||
            !config.judge.fixed_scene_body.empty())
            return std::make_unique<judge::FixedMockClient>(
                config.judge.fixed_score_body, config.judge.fixed_scene_body);
        return std::make_unique<judge::FixedMockClient>();
    }
    if (kind == "scripted") {
        if (config.judge.scripted_table.empty())
            throw ValidationError("scripted judge needs judge.scripted_table");
        return std::make_unique<judge::ScriptedMockClient>(
            config.judge.scripted_table);
    }
    if (kind == "remote")
        return judge::RemoteVlmClient::from_environment(config.judge.model);
    throw LookupError("unknown judge client kind: " + kind);
}

std::string meta_context(const media::ImageMeta& meta,
                         const std::string& image_name) {
    return "reference image " + image_name + "; viewpoint: " + meta.viewpoint +
           "; style: " + meta.style + "; scene: " + meta.scene;
}

}  // namespace

Manifest gen_cases(const Config& config, const GenCasesOptions& options,
                   const fs::path& workdir) {
    if (options.models.empty())
        throw ValidationError("gen-cases needs at least one model");
    for (const auto& model : options.models)
        config.calibration.profile_for(model);  // fail fast on unknown ids

    fs::create_directories(workdir);
    const auto& library = actions::standard_library();

    // Collect images + sidecars, apply the metadata filters.
    std::vector<std::pair<fs::path, media::ImageMeta>> images;
    for (const char* ext : {".png", ".jpg", ".jpeg"}) {
        for (const auto& image : list_files(options.image_dir, ext)) {
            const fs::path sidecar = media::sidecar_path(image);
            if (!fs::exists(sidecar))
                throw ValidationError("missing metadata sidecar for " +
                                      image.string());
            images.emplace_back(image, media::load_image_meta(sidecar));
        }
    }
    std::sort(images.begin(), images.end(),
              [](const auto& a, const auto& b) {
                  return a.first.filename().string() < b.first.filename().string();
              });
    std::erase_if(images, [&](const auto& entry) {
        const media::ImageMeta& meta = entry.second;
        if (!options.viewpoint.empty() && meta.viewpoint != options.viewpoint)
            return true;
        if (!options.style.empty() && meta.style != options.style) return true;
        if (!options.scene.empty() && meta.scene != options.scene) return true;
        return false;
    });
    if (images.empty())
        throw ValidationError("no images matched in " +
                              options.image_dir.string());

    // Optional inputs for the selection strategies.
    std::optional<json> select_table;
    if (options.select == "file") {
        if (options.select_file.empty())
            throw ValidationError("--select=file needs a selection file");
        select_table = json::parse(read_file(options.select_file));
    }
    std::unique_ptr<judge::VlmClient> client;
    std::optional<judge::JudgeEngine> engine;
    if (options.select == "vlm") {
        client = make_judge_client(config);
        engine.emplace(*client, workdir / "judge_cache", config.judge.retries);
    }

    Manifest manifest;
    manifest.models = options.models;
    manifest.config_snapshot = config_to_json(config);

    for (const auto& [image, meta] : images) {
        const std::string stem = image.stem().string();

        std::vector<std::string> selected;
        if (options.select == "all") {
            for (const auto& seq : library.sequences)
                if (tier_matches(seq, options.tier)) selected.push_back(seq.id);
        } else if (options.select == "file") {
            const json& table = *select_table;
            if (table.contains(stem))
                selected = table.at(stem).get<std::vector<std::string>>();
            else if (table.contains("default"))
                selected = table.at("default").get<std::vector<std::string>>();
            else
                throw ValidationError("selection file has no entry for '" +
                                      stem + "' and no default");
            for (const auto& id : selected)
                if (!tier_matches(library.by_id(id), options.tier))
                    throw ValidationError("selection for '" + stem +
                                          "' violates the tier filter: " + id);
        } else if (options.select == "vlm") {
            auto scene = engine->analyze_scene(
                image, meta_context(meta, image.filename().string()), stem);
            selected = actions::filter_actions(scene, library);
            std::erase_if(selected, [&](const std::string& id) {
                return !tier_matches(library.by_id(id), options.tier);
            });
            if (selected.size() > options.max_actions)
                selected.resize(options.max_actions);
            if (selected.size() < options.min_actions) {
                // Pad from rotation-first library order; a VLM selection
                // below the floor is topped up, not trusted blindly.
                for (const auto& id : rotation_first_order()) {
                    if (selected.size() >= options.min_actions) break;
                    if (std::find(selected.begin(), selected.end(), id) !=
                        selected.end())
                        continue;
                    if (!tier_matches(library.by_id(id), options.tier)) continue;
                    selected.push_back(id);
                }
                std::fprintf(stderr,
                             "[gen-cases] %s: selection below --min-actions, "
                             "padded to %zu\n",
                             stem.c_str(), selected.size());
            }
        } else {
            throw LookupError("unknown selection strategy: " + options.select);
        }
        if (selected.empty())
            throw ValidationError("no actions selected for image " + stem);

        ImageEntry entry;
        entry.meta = meta;
        entry.action_ids = selected;

        // Copy the reference into each case directory so cases stay
        // self-contained and isolated.
        for (const auto& model : options.models) {
            for (const auto& seq_id : selected) {
                const auto& seq = library.by_id(seq_id);
                char padded[8];
                std::snprintf(padded, sizeof(padded), "s%02d",
                              std::atoi(seq_id.c_str()));
                EvaluationCase c;
                c.id = stem + "__" + padded + "__" + model;
                c.meta = meta;
                c.sequence_id = seq_id;
                c.sequence_dsl = actions::serialize_sequence(seq);
                c.tier = actions::tier_name(seq.tier);
                c.model_id = model;

                const fs::path dir = case_dir(workdir, c.id);
                fs::create_directories(dir);
                const std::string ref_name =
                    "reference" + image.extension().string();
                fs::copy_file(image, dir / ref_name,
                              fs::copy_options::overwrite_existing);
                c.image = fs::path("cases") / c.id / ref_name;

                CaseManifest cm;
                cm.case_id = c.id;
                cm.reference = ref_name;
                cm.meta = meta;
                cm.sequence_id = seq_id;
                cm.dsl = c.sequence_dsl;
                cm.tier = c.tier;
                cm.model_id = model;
                cm.calib = config.calibration.profile_for(model);
                cm.intrinsics = config.intrinsics;
                cm.seed = case_seed(config.seed, c.id);
                if (model == "mock") {
                    cm.mock = config.mock;
                    cm.mock->seed = cm.seed;
                }
                save_case_manifest(cm, dir);
                manifest.cases.push_back(std::move(c));
            }
        }
        // Record the image entry with a workdir-relative path when possible.
        std::error_code ec;
        fs::path rel = fs::relative(image, workdir, ec);
        entry.path = (ec || rel.empty()) ? image.string() : rel.string();
        manifest.images.push_back(std::move(entry));
    }

    save_manifest(manifest, workdir);
    // Library export for non-code consumers.
    write_file(workdir / "actions_library.json", actions::library_to_json(library));
    return manifest;
}

// ── map-actions ──────────────────────────────────────────────────────────────

size_t map_actions(const Config& config, const fs::path& workdir) {
    Manifest manifest = load_manifest(workdir);
    const auto registry = adapters::AdapterRegistry::with_defaults();
    const auto n = static_cast<std::ptrdiff_t>(manifest.cases.size());
    size_t worked = 0;

#pragma omp parallel for schedule(dynamic) reduction(+ : worked) \
    num_threads(effective_jobs(config))
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const EvaluationCase& c = manifest.cases[i];
        const fs::path dir = case_dir(workdir, c.id);
        try {
            CaseManifest cm = load_case_manifest(dir);
            const std::string input_hash = to_hex(fnv1a64(
                cm.dsl + "|" + cm.model_id + "|" + hash_calib(cm.calib) + "|" +
                format_double(cm.intrinsics.fx) + "," +
                format_double(cm.intrinsics.fy)));

            json state = load_state(dir);
            if (state.contains("mapped") &&
                state["mapped"].value("hash", "") == input_hash) {
                auto payload_name = state["mapped"].value("payload", "");
                if (!payload_name.empty() && fs::exists(dir / payload_name))
                    continue;  // already mapped with identical inputs
            }

            ActionSequence seq =
                actions::parse_sequence(cm.dsl, true, cm.sequence_id);
            auto payload =
                registry.map(cm.model_id, seq, cm.calib, cm.intrinsics);
            const std::string filename = adapters::payload_filename(payload);
            write_file(dir / filename, adapters::serialize_payload(payload));

            state["mapped"] = {{"hash", input_hash},
                               {"status", "done"},
                               {"payload", filename}};
            save_state(dir, state);
            ++worked;
        } catch (const std::exception& e) {
            json state = load_state(dir);
            state["mapped"] = {{"status", "failed"}, {"reason", e.what()}};
            save_state(dir, state);
        }
    }
    return worked;
}

// ── run ──────────────────────────────────────────────────────────────────────

size_t run_generation(const Config& config, const fs::path& workdir) {
    Manifest manifest = load_manifest(workdir);
    const auto n = static_cast<std::ptrdiff_t>(manifest.cases.size());
    size_t worked = 0;

#pragma omp parallel for schedule(dynamic) reduction(+ : worked) \
    num_threads(effective_jobs(config))
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const EvaluationCase& c = manifest.cases[i];
        const fs::path dir = case_dir(workdir, c.id);
        try {
            auto runner_it = config.runners.find(c.model_id);
            if (runner_it == config.runners.end())
                throw ValidationError("no runner command configured for model '" +
                                      c.model_id + "'");

            json state = load_state(dir);
            if (!state.contains("mapped") ||
                state["mapped"].value("status", "") != "done")
                throw ValidationError("case not mapped yet (run map-actions)");
            const std::string payload_name = state["mapped"].value("payload", "");

            std::string runner_sig;
            for (const auto& arg : runner_it->second) runner_sig += arg + "\x1f";
            CaseManifest cm = load_case_manifest(dir);
            std::string mock_sig;
            if (cm.mock)
                mock_sig = harness::mock_mode_name(cm.mock->mode) + "|" +
                           format_double(cm.mock->sigma_t) + "|" +
                           format_double(cm.mock->sigma_r) + "|" +
                           std::to_string(cm.mock->frame_stride) + "|" +
                           std::to_string(cm.mock->seed);
            const std::string input_hash = to_hex(
                fnv1a64(to_hex(hash_file(dir / payload_name)) + "|" +
                        runner_sig + "|" + mock_sig));

            if (state.contains("generated") &&
                state["generated"].value("hash", "") == input_hash &&
                state["generated"].value("status", "") == "completed")
                continue;

            harness::GenerationResult result = harness::run_case(
                runner_it->second, dir, config.run_timeout_seconds);

            state["generated"] = {
                {"hash", input_hash},
                {"status", harness::run_status_name(result.status)},
                {"reason", result.reason},
                {"exit_code", result.exit_code},
                {"frame_count", result.frame_count}};
            save_state(dir, state);
            // Timing is diagnostics, not report material.
            write_file(dir / "generation.json",
                       json({{"wall_seconds", result.wall_seconds},
                             {"exit_code", result.exit_code}})
                               .dump(2) +
                           "\n");
            ++worked;
        } catch (const std::exception& e) {
            json state = load_state(dir);
            state["generated"] = {{"status", "failed"}, {"reason", e.what()}};
            save_state(dir, state);
            ++worked;
        }
    }
    return worked;
}

// ── evaluate ─────────────────────────────────────────────────────────────────

namespace {

std::string file_hash_or(const fs::path& path, const std::string& fallback) {
    return fs::exists(path) ? to_hex(hash_file(path)) : fallback;
}

std::string frames_signature(const fs::path& frames_dir) {
    if (!fs::is_directory(frames_dir)) return "none";
    std::uint64_t h = kFnvOffset;
    for (const auto& frame : list_files(frames_dir, ".png")) {
        h = fnv1a64(frame.filename().string(), h);
        h = fnv1a64(to_hex(hash_file(frame)), h);
    }
    return to_hex(h);
}

void mark_incomplete(MetricReport& report, const std::string& metric,
                     const std::string& reason) {
    report.incomplete.emplace_back(metric, reason);
}

void mark_all_incomplete(MetricReport& report, const std::string& reason) {
    for (const char* column : metrics::kMetricColumns)
        mark_incomplete(report, column, reason);
}

}  // namespace

size_t evaluate(const Config& config, const fs::path& workdir) {
    Manifest manifest = load_manifest(workdir);
    const auto n = static_cast<std::ptrdiff_t>(manifest.cases.size());

    auto client = make_judge_client(config);
    judge::JudgeEngine engine(*client, workdir / "judge_cache",
                              config.judge.retries);
    auto aesthetic = scorer::make_scorer(config.aesthetic_scorer);
    auto imaging = scorer::make_scorer(config.imaging_scorer);

    // Concurrent-request caps for the external clients, independent of the
    // case worker pool width.
    std::counting_semaphore<1024> judge_slots(static_cast<std::ptrdiff_t>(
        std::max<size_t>(1, config.judge.max_concurrent)));
    std::counting_semaphore<1024> scorer_slots(static_cast<std::ptrdiff_t>(
        std::max<size_t>(1, config.scorer_max_concurrent)));
    auto capped_score = [&](scorer::FrameScorer& s,
                            const scorer::ScorerConfig& sc,
                            const fs::path& frames_dir) {
        scorer_slots.acquire();
        struct Release {
            std::counting_semaphore<1024>& slots;
            ~Release() { slots.release(); }
        } release{scorer_slots};
        return metrics::score_visual(frames_dir, s, sc.scale,
                                     config.scorer_sample_stride);
    };
    auto capped_judge = [&](const judge::JudgeRequest& request) {
        judge_slots.acquire();
        struct Release {
            std::counting_semaphore<1024>& slots;
            ~Release() { slots.release(); }
        } release{judge_slots};
        return engine.judge(request);
    };

    const std::string eval_sig =
        config.judge.client + "|" + config.judge.model + "|" +
        std::to_string(config.judge.frames_per_request) + "|" +
        config.aesthetic_scorer.kind + "|" + config.imaging_scorer.kind + "|" +
        std::to_string(config.scorer_sample_stride);

    size_t worked = 0;

#pragma omp parallel for schedule(dynamic) reduction(+ : worked) \
    num_threads(effective_jobs(config))
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const EvaluationCase& c = manifest.cases[i];
        const fs::path dir = case_dir(workdir, c.id);
        try {
            CaseManifest cm = load_case_manifest(dir);
            json state = load_state(dir);

            const fs::path est_path = dir / "estimated.traj";
            const fs::path reproj_path = dir / "reproj.jsonl";
            const fs::path frames_dir = dir / "frames";
            const std::string input_hash = to_hex(fnv1a64(
                file_hash_or(est_path, "no-est") + "|" +
                file_hash_or(reproj_path, "no-reproj") + "|" +
                frames_signature(frames_dir) + "|" + eval_sig + "|" +
                state.value("generated", json::object()).value("status", "")));

            if (state.contains("evaluated") &&
                state["evaluated"].value("hash", "") == input_hash &&
                fs::exists(dir / "report.json"))
                continue;  // idempotent: unchanged inputs, keep the report

            MetricReport report;
            report.case_id = c.id;

            const std::string gen_status =
                state.value("generated", json::object()).value("status", "");
            if (gen_status != "completed") {
                mark_all_incomplete(
                    report, gen_status.empty()
                                ? "generation has not run"
                                : "generation " + gen_status + ": " +
                                      state["generated"].value("reason", ""));
            } else {
                const std::string context =
                    "case " + c.id + "; viewpoint: " + cm.meta.viewpoint +
                    "; style: " + cm.meta.style + "; scene: " + cm.meta.scene;

                // Control alignment: first-frame align both trajectories,
                // then compare on the ground-truth time base.
                if (fs::exists(est_path)) {
                    try {
                        geom::Trajectory gt = synth::synthesize(
                            actions::parse_sequence(cm.dsl, true,
                                                    cm.sequence_id),
                            cm.calib);
                        geom::Trajectory est = geom::load_trajectory(
                            est_path, cm.calib.frame_rate);
                        if (est.size() < 2)
                            throw ValidationError(
                                "estimated trajectory too short");
                        if (est.size() != gt.size()) {
                            std::vector<double> stamps;
                            for (const auto& p : gt.poses)
                                stamps.push_back(p.timestamp);
                            est = geom::resample_nearest(est, stamps);
                        }
                        geom::Trajectory gt_aligned = geom::align_to_first(gt);
                        geom::Trajectory est_aligned = geom::align_to_first(est);
                        report.translation_error = metrics::translation_error(
                            gt_aligned, est_aligned);
                        report.rotation_error =
                            metrics::rotation_error(gt_aligned, est_aligned);
                    } catch (const std::exception& e) {
                        mark_incomplete(report, "translation_error", e.what());
                        mark_incomplete(report, "rotation_error", e.what());
                    }
                } else {
                    mark_incomplete(report, "translation_error",
                                    "no estimated.traj");
                    mark_incomplete(report, "rotation_error",
                                    "no estimated.traj");
                }

                if (fs::exists(reproj_path)) {
                    try {
                        auto observations =
                            metrics::load_observations_jsonl(reproj_path);
                        report.reprojection_error = metrics::reprojection_error(
                            observations, cm.intrinsics);
                    } catch (const std::exception& e) {
                        mark_incomplete(report, "reprojection_error", e.what());
                    }
                } else {
                    mark_incomplete(report, "reprojection_error",
                                    "no reproj.jsonl");
                }

                try {
                    report.aesthetic = capped_score(
                        *aesthetic, config.aesthetic_scorer, frames_dir);
                } catch (const std::exception& e) {
                    mark_incomplete(report, "aesthetic", e.what());
                }
                try {
                    report.imaging = capped_score(
                        *imaging, config.imaging_scorer, frames_dir);
                } catch (const std::exception& e) {
                    mark_incomplete(report, "imaging", e.what());
                }

                const std::pair<judge::MetricKind, const char*> kinds[] = {
                    {judge::MetricKind::State, "state_consistency"},
                    {judge::MetricKind::Content, "content_consistency"},
                    {judge::MetricKind::Style, "style_consistency"},
                };
                for (const auto& [kind, column] : kinds) {
                    try {
                        judge::JudgeRequest request;
                        request.kind = kind;
                        request.frames = judge::sample_frames(
                            frames_dir, config.judge.frames_per_request);
                        request.prompt = judge::build_prompt(kind, context);
                        request.schema_id = "score_v1";
                        request.tag = c.id + ":" + judge::kind_name(kind);
                        auto response = capped_judge(request);
                        double score = *response.score;
                        if (column == std::string("state_consistency"))
                            report.state_consistency = score;
                        else if (column == std::string("content_consistency"))
                            report.content_consistency = score;
                        else
                            report.style_consistency = score;
                    } catch (const judge::JudgeFailure& e) {
                        mark_incomplete(report, column, e.what());
                    } catch (const std::exception& e) {
                        mark_incomplete(report, column, e.what());
                    }
                }
            }

            report.validate();
            write_file(dir / "report.json", report::report_to_json(report));
            state["evaluated"] = {{"hash", input_hash}, {"status", "done"}};
            save_state(dir, state);
            ++worked;
        } catch (const std::exception& e) {
            json state = load_state(dir);
            state["evaluated"] = {{"status", "failed"}, {"reason", e.what()}};
            save_state(dir, state);
            ++worked;
        }
    }

    const judge::JudgeStats stats = engine.stats();
    {
        std::lock_guard<std::mutex> lock(g_stats_mutex);
        g_last_judge_stats = stats;
    }
    write_file(workdir / "judge_stats.json",
               judge_stats_to_json(stats).dump(2) + "\n");
    return worked;
}

// ── Reports ──────────────────────────────────────────────────────────────────

std::vector<report::LeaderboardRow> collect_rows(const fs::path& workdir) {
    Manifest manifest = load_manifest(workdir);

    // (split, model) -> reports, in deterministic manifest order.
    const char* split_order[] = {"first_real", "first_stylized", "third_real",
                                 "third_stylized"};
    std::vector<report::LeaderboardRow> rows;
    for (const char* split : split_order) {
        for (const auto& model : manifest.models) {
            std::vector<MetricReport> reports;
            for (const auto& c : manifest.cases) {
                if (c.model_id != model || c.meta.split() != split) continue;
                const fs::path report_path =
                    case_dir(workdir, c.id) / "report.json";
                if (!fs::exists(report_path)) continue;
                reports.push_back(
                    report::report_from_json(read_file(report_path)));
            }
            if (reports.empty()) continue;
            rows.push_back(report::aggregate(split, model, reports));
        }
    }
    if (rows.empty())
        throw ValidationError("no evaluated cases found under " +
                              workdir.string());
    return rows;
}

std::string write_reports(const fs::path& workdir) {
    auto rows = collect_rows(workdir);
    const std::string table = report::render_table(rows);
    write_file(workdir / "leaderboard.txt", table);
    write_file(workdir / "leaderboard.csv", report::render_csv(rows));
    write_file(workdir / "leaderboard.json", report::render_json(rows));
    return table;
}

// ── Human correlation ────────────────────────────────────────────────────────

std::vector<CorrelationResult> correlate_human(const fs::path& workdir,
                                               const fs::path& rankings_csv,
                                               const std::string& dimension) {
    Manifest manifest = load_manifest(workdir);
    std::vector<std::string> models = manifest.models;
    std::sort(models.begin(), models.end());
    if (models.size() < 2)
        throw ValidationError("human correlation needs at least 2 models");

    // Parse rankings: set_id,best,...,worst
    std::ifstream in(rankings_csv);
    if (!in) throw IoError("cannot open rankings file: " + rankings_csv.string());
    std::map<std::string, double> rank_sums;
    size_t set_count = 0;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string body = trim(line);
        if (body.empty() || body[0] == '#') continue;
        auto fields = split(body, ',');
        if (fields.size() != models.size() + 1)
            throw ParseError(rankings_csv.filename().string() + ":" +
                             std::to_string(line_no) + ": expected set id + " +
                             std::to_string(models.size()) + " models");
        std::vector<std::string> ranked;
        for (size_t i = 1; i < fields.size(); ++i)
            ranked.push_back(trim(fields[i]));
        std::vector<std::string> sorted_ranked = ranked;
        std::sort(sorted_ranked.begin(), sorted_ranked.end());
        if (sorted_ranked != models)
            throw ValidationError(
                rankings_csv.filename().string() + ":" +
                std::to_string(line_no) +
                ": ranked models do not match the manifest model set");
        for (size_t pos = 0; pos < ranked.size(); ++pos)
            rank_sums[ranked[pos]] += static_cast<double>(pos + 1);
        ++set_count;
    }
    if (set_count == 0)
        throw ValidationError("rankings file contains no sets");

    // Metric means per model over all evaluated cases.
    std::map<std::string, std::vector<MetricReport>> per_model;
    for (const auto& c : manifest.cases) {
        const fs::path report_path = case_dir(workdir, c.id) / "report.json";
        if (!fs::exists(report_path)) continue;
        per_model[c.model_id].push_back(
            report::report_from_json(read_file(report_path)));
    }

    std::vector<std::string> dimensions;
    if (dimension == "all") {
        for (const char* column : metrics::kMetricColumns)
            dimensions.push_back(column);
    } else {
        metrics::metric_lower_is_better(dimension);  // validates the name
        dimensions.push_back(dimension);
    }

    std::vector<CorrelationResult> results;
    for (const auto& dim : dimensions) {
        std::vector<double> human_ranks, oriented_scores;
        for (const auto& model : models) {
            auto it = per_model.find(model);
            if (it == per_model.end())
                throw ValidationError("model '" + model +
                                      "' has no evaluated cases");
            double sum = 0.0;
            size_t count = 0;
            for (const auto& r : it->second) {
                auto v = metrics::metric_value(r, dim);
                if (v) {
                    sum += *v;
                    ++count;
                }
            }
            if (count == 0)
                throw ValidationError("model '" + model + "' has no complete '" +
                                      dim + "' values");
            double mean = sum / static_cast<double>(count);
            // Orient so that "smaller = better" matches the human rank
            // scale (1 = best).
            oriented_scores.push_back(
                metrics::metric_lower_is_better(dim) ? mean : -mean);
            human_ranks.push_back(rank_sums[model] /
                                  static_cast<double>(set_count));
        }
        results.push_back({dim,
                           metrics::spearman_rho(human_ranks, oriented_scores)});
    }
    return results;
}

// ── Mock suite ───────────────────────────────────────────────────────────────

size_t mock_suite(const Config& config, const MockSuiteOptions& options,
                  const fs::path& workdir) {
    if (options.runner_binary.empty())
        throw ValidationError("mock suite needs the mock runner binary path");

    Config cfg = config;
    cfg.runners["mock"] = {options.runner_binary.string()};

    fs::create_directories(workdir);
    media::generate_image_suite(workdir / "images", options.scene_count,
                                cfg.intrinsics.width, cfg.intrinsics.height,
                                cfg.seed);

    GenCasesOptions gen;
    gen.image_dir = workdir / "images";
    gen.models = {"mock"};
    gen.select = "vlm";
    gen.min_actions = 5;
    gen.max_actions = 5;
    Manifest manifest = gen_cases(cfg, gen, workdir);

    map_actions(cfg, workdir);
    run_generation(cfg, workdir);
    evaluate(cfg, workdir);
    write_reports(workdir);
    return manifest.cases.size();
}

}  // namespace worldmark::pipeline
