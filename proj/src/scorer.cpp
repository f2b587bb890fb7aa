#include "worldmark/scorer.hpp"

#include <cmath>

#include "httplib.h"
#include "json.hpp"
#include "worldmark/process.hpp"

namespace worldmark::scorer {

using nlohmann::json;

std::vector<double> MockScorer::score(const std::vector<fs::path>& frames) {
    std::vector<double> scores;
    scores.reserve(frames.size());
    for (const auto& frame : frames) {
        if (fixed_value_) {
            scores.push_back(*fixed_value_);
        } else {
            std::uint64_t h = fnv1a64(salt_, hash_file(frame));
            scores.push_back(static_cast<double>(h % 10000) / 10000.0);
        }
    }
    return scores;
}

std::string build_score_request(const std::string& scorer_id,
                                const std::vector<fs::path>& frames) {
    json doc;
    doc["scorer_id"] = scorer_id;
    json list = json::array();
    for (const auto& frame : frames) list.push_back(frame.string());
    doc["frames"] = list;
    return doc.dump();
}

std::vector<double> parse_score_response(const std::string& body,
                                         size_t expected_count) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception& e) {
        throw ContractError(std::string("scorer response is not JSON: ") +
                            e.what());
    }
    if (!doc.contains("scores") || !doc["scores"].is_array())
        throw ContractError("scorer response missing 'scores' array");
    std::vector<double> scores;
    for (const auto& v : doc["scores"]) {
        if (!v.is_number())
            throw ContractError("scorer response contains a non-number score");
        scores.push_back(v.get<double>());
    }
    if (scores.size() != expected_count)
        throw ContractError("scorer returned " + std::to_string(scores.size()) +
                            " scores, expected " + std::to_string(expected_count));
    return scores;
}

std::vector<double> SubprocessScorer::score(
    const std::vector<fs::path>& frames) {
    auto result = proc::run_capture(
        argv_, build_score_request(scorer_id_, frames), timeout_seconds_);
    if (result.timed_out)
        throw ContractError("scorer subprocess timed out");
    if (result.exit_code != 0)
        throw ContractError("scorer subprocess exited with code " +
                            std::to_string(result.exit_code));
    return parse_score_response(result.output, frames.size());
}

std::vector<double> HttpScorer::score(const std::vector<fs::path>& frames) {
    // Split "http://host:port/path".
    std::string url = endpoint_;
    const std::string scheme = "http://";
    if (url.rfind(scheme, 0) != 0)
        throw ValidationError("scorer endpoint must start with http://");
    url = url.substr(scheme.size());
    size_t slash = url.find('/');
    std::string host = slash == std::string::npos ? url : url.substr(0, slash);
    std::string path = slash == std::string::npos ? "/" : url.substr(slash);

    httplib::Client client(scheme + host);
    client.set_read_timeout(static_cast<time_t>(timeout_seconds_),
                            static_cast<time_t>(
                                (timeout_seconds_ - static_cast<time_t>(
                                                        timeout_seconds_)) *
                                1e6));
    auto res = client.Post(path, build_score_request(scorer_id_, frames),
                           "application/json");
    if (!res)
        throw ContractError("scorer endpoint unreachable: " + endpoint_);
    if (res->status != 200)
        throw ContractError("scorer endpoint returned HTTP " +
                            std::to_string(res->status));
    return parse_score_response(res->body, frames.size());
}

std::unique_ptr<FrameScorer> make_scorer(const ScorerConfig& config) {
    if (config.kind == "mock")
        return std::make_unique<MockScorer>(config.mock_value, config.id);
    if (config.kind == "subprocess") {
        if (config.command.empty())
            throw ValidationError("subprocess scorer '" + config.id +
                                  "' needs a command");
        return std::make_unique<SubprocessScorer>(config.id, config.command,
                                                  config.timeout_seconds);
    }
    if (config.kind == "http") {
        if (config.endpoint.empty())
            throw ValidationError("http scorer '" + config.id +
                                  "' needs an endpoint");
        return std::make_unique<HttpScorer>(config.id, config.endpoint,
                                            config.timeout_seconds);
    }
    throw LookupError("unknown scorer kind: " + config.kind);
}

}  // namespace worldmark::scorer
