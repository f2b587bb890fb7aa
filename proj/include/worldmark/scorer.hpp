#pragma once

// External visual-quality scorer contract. A scorer receives a list of frame
// file paths and returns one scalar per frame. Three transports:
//   mock        in-process, deterministic (constant or content-hash based)
//   subprocess  JSON over stdin/stdout of a child process
//   http        JSON POST to a local endpoint
//
// Request:  {"scorer_id": "aesthetic", "frames": ["/path/0.png", ...]}
// Response: {"scores": [0.53, ...]}

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "worldmark/common.hpp"
#include "worldmark/metrics.hpp"

namespace worldmark::scorer {

class FrameScorer {
public:
    virtual ~FrameScorer() = default;
    /// One score per frame, in order. Throws ContractError on transport
    /// failure, timeout, or a malformed response.
    virtual std::vector<double> score(const std::vector<fs::path>& frames) = 0;
};

/// Deterministic in-process scorer. With `fixed_value` set every frame
/// scores that constant; otherwise the score derives from the frame's
/// content hash (salted with the scorer id so different scorers disagree),
/// mapped into [0, 1).
class MockScorer : public FrameScorer {
public:
    explicit MockScorer(std::optional<double> fixed_value = std::nullopt,
                        std::string salt = "")
        : fixed_value_(fixed_value), salt_(std::move(salt)) {}
    std::vector<double> score(const std::vector<fs::path>& frames) override;

private:
    std::optional<double> fixed_value_;
    std::string salt_;
};

class SubprocessScorer : public FrameScorer {
public:
    SubprocessScorer(std::string scorer_id, std::vector<std::string> argv,
                     double timeout_seconds = 60.0)
        : scorer_id_(std::move(scorer_id)),
          argv_(std::move(argv)),
          timeout_seconds_(timeout_seconds) {}
    std::vector<double> score(const std::vector<fs::path>& frames) override;

private:
    std::string scorer_id_;
    std::vector<std::string> argv_;
    double timeout_seconds_;
};

class HttpScorer : public FrameScorer {
public:
    /// `endpoint` like "http://127.0.0.1:8089/score".
    HttpScorer(std::string scorer_id, std::string endpoint,
               double timeout_seconds = 60.0)
        : scorer_id_(std::move(scorer_id)),
          endpoint_(std::move(endpoint)),
          timeout_seconds_(timeout_seconds) {}
    std::vector<double> score(const std::vector<fs::path>& frames) override;

private:
    std::string scorer_id_;
    std::string endpoint_;
    double timeout_seconds_;
};

/// Builds the request JSON (shared by both transports and by the mock
/// scorer tool).
std::string build_score_request(const std::string& scorer_id,
                                const std::vector<fs::path>& frames);

/// Parses and validates a response body; throws ContractError.
std::vector<double> parse_score_response(const std::string& body,
                                         size_t expected_count);

/// Scorer configuration as it appears in the config file.
struct ScorerConfig {
    std::string id;          // "aesthetic" | "imaging"
    std::string kind = "mock";  // mock | subprocess | http
    std::optional<double> mock_value;
    std::vector<std::string> command;  // subprocess argv
    std::string endpoint;              // http endpoint
    metrics::ScoreScale scale = metrics::ScoreScale::Unit;
    double timeout_seconds = 60.0;
};

std::unique_ptr<FrameScorer> make_scorer(const ScorerConfig& config);

}  // namespace worldmark::scorer
