#include "worldmark/judge.hpp"

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace worldmark::judge {

using nlohmann::json;

std::string kind_name(MetricKind kind) {
    switch (kind) {
        case MetricKind::State: return "state";
        case MetricKind::Content: return "content";
        case MetricKind::Style: return "style";
        case MetricKind::SceneAnalysis: return "scene_analysis";
    }
    throw ValidationError("invalid judge metric kind");
}

// ── Frame sampling ───────────────────────────────────────────────────────────

std::vector<fs::path> sample_frames(const fs::path& video_dir, size_t n) {
    if (n < 2) throw ValidationError("frame sampling needs n >= 2");
    auto frames = list_files(video_dir, ".png");
    const size_t total = frames.size();
    if (total < n)
        throw ValidationError("not enough frames: have " +
                              std::to_string(total) + ", need " +
                              std::to_string(n));
    std::vector<fs::path> sampled;
    sampled.reserve(n);
    for (size_t k = 0; k < n; ++k) {
        auto idx = static_cast<size_t>(std::llround(
            static_cast<double>(k) * static_cast<double>(total - 1) /
            static_cast<double>(n - 1)));
        sampled.push_back(frames[idx]);
    }
    return sampled;
}

// ── Prompts ──────────────────────────────────────────────────────────────────

std::string build_prompt(MetricKind kind, const std::string& context) {
    std::string ctx = context.empty() ? "" : "Context: " + context + "\n";
    const std::string json_instruction =
        "Respond with exactly one JSON object and nothing else: ";
    switch (kind) {
        case MetricKind::State:
            return "You are judging the physical consistency of a generated "
                   "video from uniformly sampled frames shown in temporal "
                   "order.\n" + ctx +
                   "Task: track primary subjects and detect abrupt mutations "
                   "or jerky movements in their shape, texture, and motion.\n"
                   "Score from 0 to 100: 100 means every subject stays "
                   "physically continuous across all frames; 0 means subjects "
                   "constantly mutate, teleport, or deform.\n" +
                   json_instruction +
                   R"({"score": <number 0-100>, "rationale": "<short explanation>"})";
        case MetricKind::Content:
            return "You are judging a generated video for object "
                   "hallucination using consecutive keyframes shown in "
                   "temporal order.\n" + ctx +
                   "Task: compare scene elements across consecutive keyframes "
                   "and rate the frequency and severity of spatiotemporal "
                   "hallucinations: objects suddenly appearing, disappearing, "
                   "or popping in and out of existence.\n"
                   "Score from 0 to 100: 100 means no hallucinated content at "
                   "all; 0 means the scene content is constantly unstable.\n" +
                   json_instruction +
                   R"({"score": <number 0-100>, "rationale": "<short explanation>"})";
        case MetricKind::Style:
            return "You are judging the stylistic stability of a generated "
                   "video from uniformly sampled frames shown in temporal "
                   "order.\n" + ctx +
                   "Task: analyze the global visual characteristics - "
                   "aesthetic tone, lighting, and color palette - and compare "
                   "them across the timeline to detect stylistic degradation "
                   "such as color shifting, unnatural distortions, or "
                   "fluctuations of the artistic or photorealistic style.\n"
                   "Score from 0 to 100: 100 means a perfectly uniform style "
                   "throughout; 0 means the style drifts beyond recognition.\n" +
                   json_instruction +
                   R"({"score": <number 0-100>, "rationale": "<short explanation>"})";
        case MetricKind::SceneAnalysis:
            return "You are shown the reference image of an interactive "
                   "camera-motion benchmark.\n" + ctx +
                   "Task: identify physical constraints in the scene that "
                   "make sustained camera motions implausible, such as walls "
                   "directly ahead or behind, or lateral obstacles in an "
                   "enclosed space that rule out prolonged sideways "
                   "translation.\n" +
                   json_instruction +
                   R"({"forward_blocked": <true|false>, "backward_blocked": <true|false>, "lateral_blocked": <true|false>, "rationale": "<short explanation>"})";
    }
    throw ValidationError("invalid judge metric kind");
}

// ── Mock clients ─────────────────────────────────────────────────────────────

std::string FixedMockClient::send(const JudgeRequest& request) {
    return request.kind == MetricKind::SceneAnalysis ? scene_body_ : score_body_;
}

ScriptedMockClient::ScriptedMockClient(const fs::path& table_file)
    : table_json_(read_file(table_file)) {
    json::parse(table_json_);  // fail fast on a broken table
}

std::string ScriptedMockClient::send(const JudgeRequest& request) {
    json table = json::parse(table_json_);
    const json* entry = nullptr;
    if (table.contains(request.tag)) {
        entry = &table.at(request.tag);
    } else if (table.contains("default")) {
        entry = &table.at("default");
    } else {
        throw ContractError("scripted judge table has no entry for tag '" +
                            request.tag + "' and no default");
    }
    return entry->is_string() ? entry->get<std::string>() : entry->dump();
}

std::string RuleMockClient::send(const JudgeRequest& request) {
    if (request.kind == MetricKind::SceneAnalysis) {
        const bool indoor = request.prompt.find("indoor") != std::string::npos;
        json doc = {{"forward_blocked", false},
                    {"backward_blocked", false},
                    {"lateral_blocked", indoor},
                    {"rationale", indoor
                                      ? "enclosed indoor space; prolonged "
                                        "sideways translation implausible"
                                      : "open scene; no constraints detected"}};
        return doc.dump();
    }
    // Stable pseudo-score in [60, 100] derived from the request content.
    std::uint64_t h = fnv1a64(request.prompt);
    h = fnv1a64(kind_name(request.kind), h);
    for (const auto& frame : request.frames)
        h = fnv1a64(to_hex(hash_file(frame)), h);
    double score = 60.0 + static_cast<double>(h % 4001) / 100.0;
    json doc = {{"score", score}, {"rationale", "mock rule-based judgement"}};
    return doc.dump();
}

// ── Remote client ────────────────────────────────────────────────────────────

RemoteVlmClient::RemoteVlmClient(std::string endpoint, std::string model_name,
                                 std::string api_key, double timeout_seconds)
    : endpoint_(std::move(endpoint)),
      model_name_(std::move(model_name)),
      api_key_(std::move(api_key)),
      timeout_seconds_(timeout_seconds) {}

std::unique_ptr<RemoteVlmClient> RemoteVlmClient::from_environment(
    const std::string& model_name) {
    const char* endpoint = std::getenv("WORLDMARK_VLM_ENDPOINT");
    if (!endpoint || !*endpoint)
        throw ValidationError(
            "WORLDMARK_VLM_ENDPOINT is not set; remote judging unavailable");
    const char* key = std::getenv("WORLDMARK_VLM_KEY");
    return std::make_unique<RemoteVlmClient>(endpoint, model_name,
                                             key ? key : "");
}

std::string RemoteVlmClient::send(const JudgeRequest& request) {
    json doc;
    doc["model"] = model_name_;
    doc["prompt"] = request.prompt;
    json frames = json::array();
    for (const auto& frame : request.frames) {
        frames.push_back({{"name", frame.filename().string()},
                          {"data", base64_encode(read_file(frame))}});
    }
    doc["frames"] = frames;

    const std::string scheme = "http://";
    std::string url = endpoint_;
    if (url.rfind(scheme, 0) != 0)
        throw ValidationError("VLM endpoint must start with http://");
    url = url.substr(scheme.size());
    size_t slash = url.find('/');
    std::string host = slash == std::string::npos ? url : url.substr(0, slash);
    std::string path = slash == std::string::npos ? "/" : url.substr(slash);

    httplib::Client client(scheme + host);
    client.set_read_timeout(static_cast<time_t>(timeout_seconds_), 0);
    httplib::Headers headers;
    if (!api_key_.empty())
        headers.emplace("Authorization", "Bearer " + api_key_);

    ++network_calls_;
    auto res = client.Post(path, headers, doc.dump(), "application/json");
    if (!res) throw ContractError("VLM endpoint unreachable: " + endpoint_);
    if (res->status != 200)
        throw ContractError("VLM endpoint returned HTTP " +
                            std::to_string(res->status));
    return res->body;
}

// ── Engine ───────────────────────────────────────────────────────────────────

JudgeEngine::JudgeEngine(VlmClient& client, fs::path cache_dir, int max_retries,
                         double backoff_base_seconds)
    : client_(client),
      cache_dir_(std::move(cache_dir)),
      max_retries_(max_retries),
      backoff_base_seconds_(backoff_base_seconds) {
    fs::create_directories(cache_dir_);
}

std::string JudgeEngine::cache_key(const JudgeRequest& request) const {
    std::uint64_t h = fnv1a64(client_.id());
    h = fnv1a64(kind_name(request.kind), h);
    h = fnv1a64(request.schema_id, h);
    h = fnv1a64(request.prompt, h);
    h = fnv1a64(request.tag, h);
    for (const auto& frame : request.frames)
        h = fnv1a64(to_hex(hash_file(frame)), h);
    return to_hex(h);
}

JudgeResponse JudgeEngine::validate(const JudgeRequest& request,
                                    const std::string& body) const {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception& e) {
        throw ParseError(std::string("judge response is not JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("judge response is not a JSON object");

    JudgeResponse response;
    response.rationale = doc.value("rationale", "");
    if (request.kind == MetricKind::SceneAnalysis) {
        for (const char* field :
             {"forward_blocked", "backward_blocked", "lateral_blocked"}) {
            if (!doc.contains(field) || !doc[field].is_boolean())
                throw ParseError(std::string("scene response missing boolean '") +
                                 field + "'");
        }
        response.scene.forward_blocked = doc["forward_blocked"].get<bool>();
        response.scene.backward_blocked = doc["backward_blocked"].get<bool>();
        response.scene.lateral_blocked = doc["lateral_blocked"].get<bool>();
        response.scene.rationale = response.rationale;
        return response;
    }
    if (!doc.contains("score") || !doc["score"].is_number())
        throw ParseError("judge response missing numeric 'score'");
    double score = doc["score"].get<double>();
    // Out-of-range scores are schema violations, never clamped.
    if (!std::isfinite(score) || score < 0.0 || score > 100.0)
        throw ParseError("judge score " + format_double(score) +
                         " outside [0, 100]");
    response.score = score;
    return response;
}

JudgeStats JudgeEngine::stats() const {
    std::lock_guard<std::mutex> lock(stats_mutex_);
    return stats_;
}

JudgeResponse JudgeEngine::judge(const JudgeRequest& request) {
    if (request.prompt.empty())
        throw ValidationError("judge request needs a prompt");
    if (request.kind != MetricKind::SceneAnalysis && request.frames.size() < 2)
        throw ValidationError("consistency judging needs >= 2 frames");

    {
        std::lock_guard<std::mutex> lock(stats_mutex_);
        ++stats_.requests;
    }
    const std::string key = cache_key(request);
    const fs::path cache_file = cache_dir_ / (key + ".json");
    if (fs::exists(cache_file)) {
        try {
            JudgeResponse cached = validate(request, read_file(cache_file));
            std::lock_guard<std::mutex> lock(stats_mutex_);
            ++stats_.cache_hits;
            return cached;
        } catch (const ParseError&) {
            // Stale or corrupt entry; fall through to a fresh call.
        }
    }

    std::string last_error;
    bool last_was_transport = false;
    for (int attempt = 0; attempt <= max_retries_; ++attempt) {
        if (attempt > 0 && client_.is_remote()) {
            auto delay = std::chrono::duration<double>(
                backoff_base_seconds_ * std::pow(2.0, attempt - 1));
            std::this_thread::sleep_for(
                std::chrono::duration_cast<std::chrono::milliseconds>(delay));
        }
        std::string body;
        try {
            {
                std::lock_guard<std::mutex> lock(stats_mutex_);
                ++stats_.client_calls;
                if (client_.is_remote()) ++stats_.network_calls;
            }
            body = client_.send(request);
        } catch (const Error& e) {
            last_error = e.what();
            last_was_transport = true;
            continue;
        }
        try {
            JudgeResponse response = validate(request, body);
            // Single writer per key: unique side file, then rename.
            static std::atomic<unsigned> tmp_counter{0};
            fs::path tmp = cache_file;
            tmp += ".tmp" + std::to_string(::getpid()) + "." +
                   std::to_string(tmp_counter.fetch_add(1));
            write_file(tmp, body);
            fs::rename(tmp, cache_file);
            return response;
        } catch (const ParseError& e) {
            last_error = e.what();
            last_was_transport = false;
        }
    }
    throw JudgeFailure(last_was_transport ? JudgeFailure::Reason::Transport
                                          : JudgeFailure::Reason::Malformed,
                       "judge failed after " + std::to_string(max_retries_ + 1) +
                           " attempts (" +
                           (last_was_transport ? "transport" : "malformed") +
                           "): " + last_error);
}

actions::SceneConstraintReport JudgeEngine::analyze_scene(
    const fs::path& image, const std::string& context, const std::string& tag) {
    JudgeRequest request;
    request.kind = MetricKind::SceneAnalysis;
    request.frames = {image};
    request.prompt = build_prompt(MetricKind::SceneAnalysis, context);
    request.schema_id = "scene_v1";
    request.tag = tag;
    return judge(request).scene;
}

}  // namespace worldmark::judge
