#pragma once

// Serial reference implementations of the metric and ray kernels, written
// independently of the production paths: quaternion-dot geodesics instead of
// matrix traces, numeric scale minimization instead of the closed form,
// O(n^2) ranking instead of sort-based, explicit quaternion sandwich
// products instead of the precomputed basis expansion.
//
// Tests use these as oracles; worldmark-bench compares their runtime against
// the OpenMP kernels. The core library never calls them.

#include <vector>

#include "worldmark/geometry.hpp"
#include "worldmark/metrics.hpp"
#include "worldmark/plucker.hpp"

namespace worldmark::ref {

/// Geodesic rotation distance in degrees via 2*acos(|<qa, qb>|).
double geodesic_deg(const geom::Rotation& a, const geom::Rotation& b);

/// Least-squares scale by golden-section search over the bracketed optimum
/// (0 when the estimate is static under the same 1e-12 rule).
double fit_scale(const geom::Trajectory& gt, const geom::Trajectory& est);

double translation_error(const geom::Trajectory& gt,
                         const geom::Trajectory& est);

double rotation_error(const geom::Trajectory& gt, const geom::Trajectory& est);

double reprojection_error(
    const std::vector<metrics::ReprojectionObservation>& observations,
    const geom::CameraIntrinsics& intrinsics);

/// Rank-then-Pearson with O(n^2) average ranks and raw-moment sums.
double spearman_rho(const std::vector<double>& a, const std::vector<double>& b);

plucker::Ray ray_for_pixel(const geom::Pose& pose,
                           const geom::CameraIntrinsics& intr, double u,
                           double v);

/// Serial frame expansion, same layout as plucker::expand_frame.
std::vector<double> expand_frame(const geom::Pose& pose,
                                 const geom::CameraIntrinsics& intr);

}  // namespace worldmark::ref
