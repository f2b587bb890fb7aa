#include "worldmark/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"
#include "worldmark/scorer.hpp"

namespace worldmark::metrics {

namespace {

constexpr double kStaticEps = 1e-12;
// Below this size the OpenMP fork/join overhead dominates.
constexpr std::ptrdiff_t kParallelThreshold = 4096;

void check_pair(const geom::Trajectory& gt, const geom::Trajectory& est) {
    if (gt.size() != est.size())
        throw ValidationError("trajectory length mismatch: gt " +
                              std::to_string(gt.size()) + " vs est " +
                              std::to_string(est.size()));
    if (gt.size() < 2)
        throw ValidationError("metrics need trajectories of length >= 2");
}

}  // namespace

// ── Control alignment ────────────────────────────────────────────────────────

ScaleFit ls_scale(const geom::Trajectory& gt, const geom::Trajectory& est) {
    check_pair(gt, est);
    const auto n = static_cast<std::ptrdiff_t>(gt.size());
    double num = 0.0, den = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : num, den) \
    if (n > kParallelThreshold)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        num += geom::dot(est.poses[i].translation, gt.poses[i].translation);
        den += geom::dot(est.poses[i].translation, est.poses[i].translation);
    }
    if (den < kStaticEps) return {0.0, true};
    return {num / den, false};
}

double translation_error(const geom::Trajectory& gt,
                         const geom::Trajectory& est) {
    const ScaleFit fit = ls_scale(gt, est);
    const auto n = static_cast<std::ptrdiff_t>(gt.size());
    double sum = 0.0;
    if (fit.degenerate) {
        // Static estimate: maximal penalty, the full ground-truth excursion.
#pragma omp parallel for schedule(static) reduction(+ : sum) \
    if (n > kParallelThreshold)
        for (std::ptrdiff_t i = 0; i < n; ++i)
            sum += geom::norm(gt.poses[i].translation);
    } else {
#pragma omp parallel for schedule(static) reduction(+ : sum) \
    if (n > kParallelThreshold)
        for (std::ptrdiff_t i = 0; i < n; ++i)
            sum += geom::norm(geom::sub(
                gt.poses[i].translation,
                geom::scale(est.poses[i].translation, fit.scale)));
    }
    return sum / static_cast<double>(n);
}

double rotation_error(const geom::Trajectory& gt, const geom::Trajectory& est) {
    check_pair(gt, est);
    const auto n = static_cast<std::ptrdiff_t>(gt.size());
    double sum = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : sum) \
    if (n > kParallelThreshold)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        sum += geom::geodesic_deg(gt.poses[i].rotation, est.poses[i].rotation);
    return sum / static_cast<double>(n);
}

// ── Reprojection ─────────────────────────────────────────────────────────────

double reprojection_error(
    const std::vector<ReprojectionObservation>& observations,
    const geom::CameraIntrinsics& intrinsics) {
    intrinsics.validate();
    if (observations.empty())
        throw ValidationError("reprojection error needs at least one observation");

    const auto n = static_cast<std::ptrdiff_t>(observations.size());
    double sum = 0.0;
    bool bad_depth = false, bad_pixel = false;
#pragma omp parallel for schedule(static) \
    reduction(+ : sum) reduction(|| : bad_depth, bad_pixel) \
    if (n > kParallelThreshold)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto& obs = observations[i];
        if (!(obs.point[2] > 0.0)) {
            bad_depth = true;
            continue;
        }
        if (obs.px < 0.0 || obs.px > intrinsics.width || obs.py < 0.0 ||
            obs.py > intrinsics.height) {
            bad_pixel = true;
            continue;
        }
        auto proj = intrinsics.project(obs.point);
        double dx = obs.px - proj[0];
        double dy = obs.py - proj[1];
        sum += std::sqrt(dx * dx + dy * dy);
    }
    if (bad_depth)
        throw ValidationError("reprojection observation with depth <= 0");
    if (bad_pixel)
        throw ValidationError("reprojection observation outside image bounds");
    return sum / static_cast<double>(n);
}

std::vector<ReprojectionObservation> load_observations_jsonl(
    const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open observations file: " + path.string());
    std::vector<ReprojectionObservation> observations;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string body = trim(line);
        if (body.empty()) continue;
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(body);
            observations.push_back(
                {doc.at("i").get<int>(), doc.at("j").get<int>(),
                 doc.at("px").get<double>(), doc.at("py").get<double>(),
                 {doc.at("X").get<double>(), doc.at("Y").get<double>(),
                  doc.at("Z").get<double>()}});
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.filename().string() + ":" +
                             std::to_string(line_no) + ": " + e.what());
        }
    }
    return observations;
}

// ── Spearman ─────────────────────────────────────────────────────────────────

std::vector<double> average_ranks(const std::vector<double>& values) {
    const size_t n = values.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(n, 0.0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        // Positions i..j (0-based) share the average 1-based rank.
        double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double spearman_rho(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw ValidationError("spearman_rho: length mismatch");
    if (a.size() < 2)
        throw ValidationError("spearman_rho needs at least 2 entries");

    std::vector<double> ra = average_ranks(a);
    std::vector<double> rb = average_ranks(b);

    const auto n = static_cast<double>(a.size());
    double mean = (n + 1.0) / 2.0;  // mean of 1..n, unchanged by tie averaging
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double da = ra[i] - mean;
        double db = rb[i] - mean;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a <= 0.0 || var_b <= 0.0)
        throw ValidationError("spearman_rho undefined for a constant list");
    return cov / std::sqrt(var_a * var_b);
}

// ── Visual quality ───────────────────────────────────────────────────────────

double score_visual(const fs::path& frames_dir, scorer::FrameScorer& scorer,
                    ScoreScale scale, size_t sample_stride) {
    if (sample_stride == 0) sample_stride = 1;
    auto frames = list_files(frames_dir, ".png");
    if (frames.empty())
        throw ValidationError("no frames to score in " + frames_dir.string());

    std::vector<fs::path> sampled;
    for (size_t i = 0; i < frames.size(); i += sample_stride)
        sampled.push_back(frames[i]);

    std::vector<double> scores = scorer.score(sampled);
    if (scores.size() != sampled.size())
        throw ContractError("scorer returned " + std::to_string(scores.size()) +
                            " scores for " + std::to_string(sampled.size()) +
                            " frames");
    double factor = scale == ScoreScale::Unit    ? 100.0
                    : scale == ScoreScale::Laion ? 10.0
                                                 : 1.0;
    double sum = 0.0;
    for (double s : scores) {
        if (!std::isfinite(s))
            throw ContractError("scorer returned a non-finite score");
        sum += s * factor;
    }
    double mean = sum / static_cast<double>(scores.size());
    if (mean < 0.0 || mean > 100.0)
        throw ContractError("scorer mean " + format_double(mean) +
                            " outside the 0-100 scale");
    return mean;
}

// ── Report ───────────────────────────────────────────────────────────────────

const char* const kMetricColumns[8] = {
    "aesthetic",        "imaging",           "translation_error",
    "rotation_error",   "reprojection_error", "state_consistency",
    "content_consistency", "style_consistency",
};

std::optional<double> metric_value(const MetricReport& report,
                                   const std::string& column) {
    if (column == "aesthetic") return report.aesthetic;
    if (column == "imaging") return report.imaging;
    if (column == "translation_error") return report.translation_error;
    if (column == "rotation_error") return report.rotation_error;
    if (column == "reprojection_error") return report.reprojection_error;
    if (column == "state_consistency") return report.state_consistency;
    if (column == "content_consistency") return report.content_consistency;
    if (column == "style_consistency") return report.style_consistency;
    throw LookupError("unknown metric column: " + column);
}

bool metric_lower_is_better(const std::string& column) {
    return column == "translation_error" || column == "rotation_error" ||
           column == "reprojection_error";
}

void MetricReport::validate() const {
    auto check = [&](const std::optional<double>& v, const char* name,
                     bool is_error) {
        if (!v) return;
        if (!std::isfinite(*v))
            throw ValidationError(std::string(name) + " must be finite");
        if (is_error && *v < 0.0)
            throw ValidationError(std::string(name) + " must be >= 0");
        if (!is_error && (*v < 0.0 || *v > 100.0))
            throw ValidationError(std::string(name) + " must lie in [0, 100]");
    };
    check(aesthetic, "aesthetic", false);
    check(imaging, "imaging", false);
    check(translation_error, "translation_error", true);
    check(rotation_error, "rotation_error", true);
    check(reprojection_error, "reprojection_error", true);
    check(state_consistency, "state_consistency", false);
    check(content_consistency, "content_consistency", false);
    check(style_consistency, "style_consistency", false);
}

}  // namespace worldmark::metrics
