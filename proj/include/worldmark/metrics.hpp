#pragma once

// The quantitative metric suite: scale-invariant translation error, geodesic
// rotation error, reprojection error, Spearman rank correlation, and the
// external visual-quality scorer entry point.
//
// Geometric metrics expect both trajectories already aligned to their first
// frame (align_to_first); SLAM gauge freedom makes unaligned comparisons
// meaningless. The evaluation pipeline performs the alignment.

#include <optional>
#include <string>
#include <vector>

#include "worldmark/common.hpp"
#include "worldmark/geometry.hpp"

namespace worldmark::scorer {
class FrameScorer;
}

namespace worldmark::metrics {

// ── Control alignment ────────────────────────────────────────────────────────

struct ScaleFit {
    double scale = 0.0;
    /// True when the estimate is (numerically) static: sum |t_est|^2 below
    /// 1e-12, so no meaningful scale exists.
    bool degenerate = false;
};

/// Least-squares scale fitting the estimate onto the ground truth:
/// s = sum(t_est . t_gt) / sum(t_est . t_est), the global minimizer of
/// sum |t_gt - s t_est|^2. Throws ValidationError on length mismatch or
/// fewer than 2 poses.
ScaleFit ls_scale(const geom::Trajectory& gt, const geom::Trajectory& est);

/// Mean over frames of |t_gt - s t_est| with the single global scale from
/// ls_scale. A degenerate (static) estimate scores the maximal penalty
/// mean |t_gt|. Asymmetric by construction: the scale fits est onto gt.
double translation_error(const geom::Trajectory& gt,
                         const geom::Trajectory& est);

/// Mean over frames of the geodesic rotation distance in degrees.
double rotation_error(const geom::Trajectory& gt, const geom::Trajectory& est);

// ── World consistency (geometric) ────────────────────────────────────────────

/// One co-visible pixel pair: an observed pixel in frame j and the
/// reconstructed 3D point expressed in frame j's camera coordinates.
struct ReprojectionObservation {
    int frame_i = 0;
    int frame_j = 0;
    double px = 0.0, py = 0.0;  // observed pixel
    geom::Vec3 point{0.0, 0.0, 0.0};
};

/// Mean pixel distance between observed pixels and projected points.
/// Throws ValidationError on an empty set, a point with z <= 0, or an
/// observed pixel outside the image bounds.
double reprojection_error(const std::vector<ReprojectionObservation>& observations,
                          const geom::CameraIntrinsics& intrinsics);

/// JSON-lines ingestion, one observation per line:
///   {"i": 0, "j": 4, "px": 12.5, "py": 88.0, "X": .., "Y": .., "Z": ..}
std::vector<ReprojectionObservation> load_observations_jsonl(const fs::path& path);

// ── Rank correlation ─────────────────────────────────────────────────────────

/// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(const std::vector<double>& values);

/// Spearman's rho with average-rank tie handling. Throws ValidationError on
/// length mismatch, fewer than 2 entries, or a constant list.
double spearman_rho(const std::vector<double>& a, const std::vector<double>& b);

// ── Visual quality ───────────────────────────────────────────────────────────

/// How a scorer's native range maps onto the 0-100 report scale.
enum class ScoreScale {
    Unit,    // [0, 1]  -> x100
    Laion,   // [0, 10] -> x10
    Native,  // already 0-100
};

/// Mean per-frame score over every `sample_stride`-th frame of `frames_dir`,
/// rescaled to 0-100. Throws on an empty directory or a scorer whose
/// response violates the contract (count mismatch, non-finite, out of range
/// after scaling).
double score_visual(const fs::path& frames_dir, scorer::FrameScorer& scorer,
                    ScoreScale scale, size_t sample_stride = 8);

// ── Per-case report ──────────────────────────────────────────────────────────

/// The eight metric slots of one evaluated case. Missing values mean the
/// metric is incomplete for this case (never imputed, never zero-filled).
struct MetricReport {
    std::string case_id;
    std::optional<double> aesthetic;           // 0-100, higher better
    std::optional<double> imaging;             // 0-100, higher better
    std::optional<double> translation_error;   // scale-free, lower better
    std::optional<double> rotation_error;      // degrees, lower better
    std::optional<double> reprojection_error;  // pixels, lower better
    std::optional<double> state_consistency;   // 0-100, higher better
    std::optional<double> content_consistency; // 0-100, higher better
    std::optional<double> style_consistency;   // 0-100, higher better
    /// metric name -> reason, for every incomplete slot
    std::vector<std::pair<std::string, std::string>> incomplete;

    bool complete() const { return incomplete.empty(); }

    /// Enforces: finite values, errors >= 0, scores within [0, 100].
    void validate() const;
};

/// Canonical metric column order (the report tables follow it).
extern const char* const kMetricColumns[8];

std::optional<double> metric_value(const MetricReport& report,
                                   const std::string& column);

/// Errors rank ascending (lower is better); scores rank descending.
bool metric_lower_is_better(const std::string& column);

}  // namespace worldmark::metrics
