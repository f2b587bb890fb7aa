#include "worldmark/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace worldmark::report {

using metrics::kMetricColumns;
using metrics::MetricReport;
using nlohmann::json;

LeaderboardRow aggregate(const std::string& split, const std::string& model_id,
                         const std::vector<MetricReport>& reports) {
    if (reports.empty())
        throw ValidationError("cannot aggregate zero reports for " + model_id);
    LeaderboardRow row;
    row.split = split;
    row.model_id = model_id;
    row.total_cases = reports.size();

    std::array<double, 8> sums{};
    for (const auto& report : reports) {
        report.validate();
        if (!report.complete()) ++row.incomplete_cases;
        for (size_t c = 0; c < 8; ++c) {
            auto value = metrics::metric_value(report, kMetricColumns[c]);
            if (!value) continue;
            sums[c] += *value;
            ++row.counts[c];
        }
    }
    for (size_t c = 0; c < 8; ++c) {
        if (row.counts[c] > 0)
            row.means[c] = sums[c] / static_cast<double>(row.counts[c]);
    }
    return row;
}

namespace {

const char* kDisplayHeaders[8] = {
    "Aesthetic↑", "Imaging↑",  "TransErr↓",
    "RotErr↓",    "ReprojErr↓", "State↑",
    "Content↑",   "Style↑",
};

const char* kSplitOrder[4] = {"first_real", "first_stylized", "third_real",
                              "third_stylized"};

std::string split_title(const std::string& split) {
    if (split == "first_real") return "First-Person Real";
    if (split == "first_stylized") return "First-Person Stylized";
    if (split == "third_real") return "Third-Person Real";
    if (split == "third_stylized") return "Third-Person Stylized";
    return split;
}

std::string format_cell(const std::optional<double>& v, bool is_error) {
    if (!v) return "-";
    char buf[32];
    std::snprintf(buf, sizeof(buf), is_error ? "%.3f" : "%.2f", *v);
    return buf;
}

// Column indices with the best (lowest for errors, highest for scores)
// value among rows that have one.
std::array<int, 8> best_row_per_column(const std::vector<LeaderboardRow>& rows) {
    std::array<int, 8> best;
    best.fill(-1);
    for (size_t c = 0; c < 8; ++c) {
        const bool lower = metrics::metric_lower_is_better(kMetricColumns[c]);
        for (size_t r = 0; r < rows.size(); ++r) {
            if (!rows[r].means[c]) continue;
            if (best[c] < 0) {
                best[c] = static_cast<int>(r);
                continue;
            }
            double current = *rows[best[c]].means[c];
            double candidate = *rows[r].means[c];
            if (lower ? candidate < current : candidate > current)
                best[c] = static_cast<int>(r);
        }
    }
    return best;
}

std::vector<std::string> ordered_splits(const std::vector<LeaderboardRow>& rows) {
    std::vector<std::string> splits;
    for (const char* s : kSplitOrder) {
        for (const auto& row : rows) {
            if (row.split == s) {
                splits.push_back(s);
                break;
            }
        }
    }
    for (const auto& row : rows) {  // any non-standard splits, in order seen
        if (std::find(splits.begin(), splits.end(), row.split) == splits.end())
            splits.push_back(row.split);
    }
    return splits;
}

size_t display_width(const std::string& cell) {
    // The arrow characters are 3 UTF-8 bytes but one terminal column.
    size_t bytes = cell.size();
    size_t arrows = 0;
    for (size_t i = 0; i + 2 < cell.size(); ++i) {
        if (static_cast<unsigned char>(cell[i]) == 0xE2 &&
            static_cast<unsigned char>(cell[i + 1]) == 0x86)
            ++arrows;
    }
    return bytes - arrows * 2;
}

void append_padded(std::string& out, const std::string& cell, size_t width) {
    out += cell;
    size_t w = display_width(cell);
    for (size_t i = w; i < width + 2; ++i) out += ' ';
}

}  // namespace

std::string render_table(const std::vector<LeaderboardRow>& rows) {
    if (rows.empty()) throw ValidationError("no leaderboard rows to render");
    std::string out;
    for (const std::string& split : ordered_splits(rows)) {
        std::vector<LeaderboardRow> group;
        for (const auto& row : rows)
            if (row.split == split) group.push_back(row);
        auto best = best_row_per_column(group);

        std::vector<std::vector<std::string>> cells;
        std::vector<std::string> header = {"Model"};
        for (const char* h : kDisplayHeaders) header.push_back(h);
        header.push_back("Cases");
        cells.push_back(header);
        for (size_t r = 0; r < group.size(); ++r) {
            std::vector<std::string> line = {group[r].model_id};
            for (size_t c = 0; c < 8; ++c) {
                std::string cell = format_cell(
                    group[r].means[c],
                    metrics::metric_lower_is_better(kMetricColumns[c]));
                if (best[c] == static_cast<int>(r) && group.size() > 0)
                    cell += "*";
                line.push_back(cell);
            }
            line.push_back(std::to_string(group[r].counts[0] > 0 ||
                                                  group[r].total_cases > 0
                                              ? group[r].total_cases
                                              : 0));
            cells.push_back(line);
        }

        std::vector<size_t> widths(cells[0].size(), 0);
        for (const auto& line : cells)
            for (size_t c = 0; c < line.size(); ++c)
                widths[c] = std::max(widths[c], display_width(line[c]));

        out += "== " + split_title(split) + " ==\n";
        for (const auto& line : cells) {
            std::string rendered;
            for (size_t c = 0; c < line.size(); ++c)
                append_padded(rendered, line[c], widths[c]);
            while (!rendered.empty() && rendered.back() == ' ')
                rendered.pop_back();
            out += rendered + "\n";
        }
        size_t incomplete = 0;
        for (const auto& row : group) incomplete += row.incomplete_cases;
        out += "(* best per column; " + std::to_string(incomplete) +
               " case(s) with incomplete metrics in this split)\n\n";
    }
    return out;
}

std::string render_csv(const std::vector<LeaderboardRow>& rows) {
    std::string out = "split,model,total_cases,incomplete_cases";
    for (const char* c : kMetricColumns) {
        out += ",";
        out += c;
        out += ",";
        out += c;
        out += "_count";
    }
    out += "\n";
    for (const auto& row : rows) {
        out += row.split + "," + row.model_id + "," +
               std::to_string(row.total_cases) + "," +
               std::to_string(row.incomplete_cases);
        for (size_t c = 0; c < 8; ++c) {
            out += ",";
            out += row.means[c] ? format_double(*row.means[c]) : "";
            out += "," + std::to_string(row.counts[c]);
        }
        out += "\n";
    }
    return out;
}

std::string render_json(const std::vector<LeaderboardRow>& rows) {
    json doc = json::array();
    for (const auto& row : rows) {
        json entry;
        entry["split"] = row.split;
        entry["model"] = row.model_id;
        entry["total_cases"] = row.total_cases;
        entry["incomplete_cases"] = row.incomplete_cases;
        json values, counts;
        for (size_t c = 0; c < 8; ++c) {
            values[kMetricColumns[c]] =
                row.means[c] ? json(*row.means[c]) : json(nullptr);
            counts[kMetricColumns[c]] = row.counts[c];
        }
        entry["means"] = values;
        entry["counts"] = counts;
        doc.push_back(entry);
    }
    return doc.dump(2) + "\n";
}

// ── Per-case report files ────────────────────────────────────────────────────

std::string report_to_json(const MetricReport& report) {
    report.validate();
    json doc;
    doc["case_id"] = report.case_id;
    json values;
    for (const char* column : kMetricColumns) {
        auto v = metrics::metric_value(report, column);
        values[column] = v ? json(*v) : json(nullptr);
    }
    doc["metrics"] = values;
    json incomplete = json::object();
    for (const auto& [metric, reason] : report.incomplete)
        incomplete[metric] = reason;
    doc["incomplete"] = incomplete;
    return doc.dump(2) + "\n";
}

MetricReport report_from_json(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("case report: ") + e.what());
    }
    MetricReport report;
    report.case_id = doc.at("case_id").get<std::string>();
    const json& values = doc.at("metrics");
    auto get = [&](const char* name) -> std::optional<double> {
        if (!values.contains(name) || values[name].is_null())
            return std::nullopt;
        return values[name].get<double>();
    };
    report.aesthetic = get("aesthetic");
    report.imaging = get("imaging");
    report.translation_error = get("translation_error");
    report.rotation_error = get("rotation_error");
    report.reprojection_error = get("reprojection_error");
    report.state_consistency = get("state_consistency");
    report.content_consistency = get("content_consistency");
    report.style_consistency = get("style_consistency");
    if (doc.contains("incomplete")) {
        for (const auto& [metric, reason] : doc.at("incomplete").items())
            report.incomplete.emplace_back(metric, reason.get<std::string>());
    }
    report.validate();
    return report;
}

}  // namespace worldmark::report
