#pragma once

// VLM-as-judge protocols: uniform frame sampling, deterministic prompt
// templates for the three consistency metrics and for scene-constraint
// analysis, a generic chat-with-images client contract, retries with
// backoff, and a disk cache keyed by request content.
//
// Responses must be strict JSON matching the per-kind schema; out-of-range
// or missing fields are schema violations (retried, never clamped).

#include <atomic>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "worldmark/actions.hpp"
#include "worldmark/common.hpp"

namespace worldmark::judge {

enum class MetricKind { State, Content, Style, SceneAnalysis };

std::string kind_name(MetricKind kind);

struct JudgeRequest {
    MetricKind kind = MetricKind::State;
    std::vector<fs::path> frames;  // sampled frame files (>= 2 for consistency)
    std::string prompt;
    std::string schema_id;  // "score_v1" | "scene_v1"
    std::string tag;        // correlation id (case id + metric), used by
                            // scripted mocks and included in the cache key
};

struct JudgeResponse {
    std::optional<double> score;  // present for scoring kinds, in [0, 100]
    std::string rationale;
    actions::SceneConstraintReport scene;  // valid for SceneAnalysis
};

/// Why a judge call ultimately failed after retries; the case metric is
/// marked incomplete with this distinction preserved.
class JudgeFailure : public Error {
public:
    enum class Reason { Transport, Malformed };
    JudgeFailure(Reason reason, const std::string& msg)
        : Error(msg), reason_(reason) {}
    Reason reason() const { return reason_; }

private:
    Reason reason_;
};

// ── Frame sampling ───────────────────────────────────────────────────────────

/// Uniform sample of n frames: indices round(k*(N-1)/(n-1)) for k = 0..n-1,
/// so the first and last frames are always included. Throws ValidationError
/// when fewer than n frames exist or n < 2.
std::vector<fs::path> sample_frames(const fs::path& video_dir, size_t n);

// ── Prompts ──────────────────────────────────────────────────────────────────

/// Deterministic template for `kind`; `context` is embedded verbatim (image
/// metadata, scene hints). Every template pins the 0-100 scale and demands a
/// single strict-JSON object as the reply.
std::string build_prompt(MetricKind kind, const std::string& context);

// ── Client contract ──────────────────────────────────────────────────────────

class VlmClient {
public:
    virtual ~VlmClient() = default;
    /// Returns the raw response body. Throws ContractError on transport
    /// failure. The body is validated by the engine, not the client.
    virtual std::string send(const JudgeRequest& request) = 0;
    virtual std::string id() const = 0;  // part of the cache key
    virtual bool is_remote() const { return false; }
};

/// Always replies with the same JSON per kind.
class FixedMockClient : public VlmClient {
public:
    /// Defaults: score 80 with a stock rationale, nothing blocked.
    FixedMockClient() = default;
    FixedMockClient(std::string score_body, std::string scene_body)
        : score_body_(std::move(score_body)), scene_body_(std::move(scene_body)) {}
    std::string send(const JudgeRequest& request) override;
    std::string id() const override { return "mock-fixed"; }

private:
    std::string score_body_ =
        R"({"score": 80, "rationale": "mock fixed response"})";
    std::string scene_body_ =
        R"({"forward_blocked": false, "backward_blocked": false, "lateral_blocked": false, "rationale": "mock fixed response"})";
};

/// Replies from a JSON table file: { "<tag>": <response object or string>,
/// "default": ... }. Unknown tags fall back to "default"; no default means
/// a transport error (useful for failure-path tests).
class ScriptedMockClient : public VlmClient {
public:
    explicit ScriptedMockClient(const fs::path& table_file);
    std::string send(const JudgeRequest& request) override;
    std::string id() const override { return "mock-scripted"; }

private:
    std::string table_json_;
};

/// Deterministic scene-aware mock: scene analysis reports lateral_blocked
/// when the prompt context mentions "indoor"; scoring kinds get a stable
/// content-derived score. This is the default judge of the mock suite.
class RuleMockClient : public VlmClient {
public:
    std::string send(const JudgeRequest& request) override;
    std::string id() const override { return "mock-rule"; }
};

/// Generic HTTP chat-with-images client: POST {model, prompt, frames:[{name,
/// data(base64)}]} to the endpoint, expecting the strict JSON reply as the
/// body. Endpoint and credential come from the environment by default
/// (WORLDMARK_VLM_ENDPOINT, WORLDMARK_VLM_KEY).
class RemoteVlmClient : public VlmClient {
public:
    RemoteVlmClient(std::string endpoint, std::string model_name,
                    std::string api_key, double timeout_seconds = 120.0);
    /// Reads endpoint/key from the environment; throws ValidationError if
    /// WORLDMARK_VLM_ENDPOINT is unset.
    static std::unique_ptr<RemoteVlmClient> from_environment(
        const std::string& model_name);

    std::string send(const JudgeRequest& request) override;
    std::string id() const override { return "remote:" + model_name_; }
    bool is_remote() const override { return true; }
    size_t network_calls() const { return network_calls_.load(); }

private:
    std::string endpoint_;
    std::string model_name_;
    std::string api_key_;
    double timeout_seconds_;
    std::atomic<size_t> network_calls_{0};
};

// ── Engine ───────────────────────────────────────────────────────────────────

struct JudgeStats {
    size_t requests = 0;
    size_t cache_hits = 0;
    size_t client_calls = 0;
    size_t network_calls = 0;  // client calls that actually hit the network
};

/// Sends requests through a client with schema validation, retries with
/// exponential backoff, and a disk cache keyed by prompt text, frame content
/// hashes, request tag and client id. Cached responses are revalidated, so
/// a schema change invalidates stale entries naturally. Safe for concurrent
/// judging across cases: stats are mutex-guarded and cache writes go through
/// unique side files renamed into place.
class JudgeEngine {
public:
    JudgeEngine(VlmClient& client, fs::path cache_dir, int max_retries = 3,
                double backoff_base_seconds = 0.25);

    JudgeResponse judge(const JudgeRequest& request);

    actions::SceneConstraintReport analyze_scene(const fs::path& image,
                                                 const std::string& context,
                                                 const std::string& tag);

    JudgeStats stats() const;

    std::string cache_key(const JudgeRequest& request) const;

private:
    JudgeResponse validate(const JudgeRequest& request,
                           const std::string& body) const;

    VlmClient& client_;
    fs::path cache_dir_;
    int max_retries_;
    double backoff_base_seconds_;
    mutable std::mutex stats_mutex_;
    JudgeStats stats_;
};

}  // namespace worldmark::judge
