#pragma once

// Leaderboard aggregation and emitters. One row per (split, model); the
// text table follows the fixed column order Aesthetic, Imaging, TransErr,
// RotErr, ReprojErr, State, Content, Style with the best value per column
// marked and incomplete counts footnoted. CSV and JSON carry the same
// values at full precision.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "worldmark/metrics.hpp"

namespace worldmark::report {

struct LeaderboardRow {
    std::string split;
    std::string model_id;
    size_t total_cases = 0;
    size_t incomplete_cases = 0;  // cases missing at least one metric
    std::array<std::optional<double>, 8> means;  // kMetricColumns order
    std::array<size_t, 8> counts{};              // complete cases per metric
};

/// Per-metric mean over complete slots only; incomplete slots are counted,
/// never imputed. Throws ValidationError on an empty report list.
LeaderboardRow aggregate(const std::string& split, const std::string& model_id,
                         const std::vector<metrics::MetricReport>& reports);

std::string render_table(const std::vector<LeaderboardRow>& rows);
std::string render_csv(const std::vector<LeaderboardRow>& rows);
std::string render_json(const std::vector<LeaderboardRow>& rows);

// ── Per-case report files ────────────────────────────────────────────────────

std::string report_to_json(const metrics::MetricReport& report);
metrics::MetricReport report_from_json(const std::string& json_text);

}  // namespace worldmark::report
