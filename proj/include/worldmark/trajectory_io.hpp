#pragma once

// Trajectory text format ("timestamp tx ty tz qx qy qz qw" per line, TUM
// style). '#' lines are comments; fields are whitespace-separated decimals
// with '.' as the separator. This is the interchange format for ground-truth
// trajectories, SLAM estimates and PoseStream payloads.

#include <iosfwd>
#include <string>

#include "worldmark/common.hpp"
#include "worldmark/geometry.hpp"

namespace worldmark::geom {

/// Parse a trajectory from text. Throws ParseError naming the 1-based line
/// on malformed input, ValidationError on non-monotonic timestamps.
Trajectory parse_trajectory(std::istream& in, double frame_rate,
                            const std::string& origin = "<stream>");

Trajectory load_trajectory(const fs::path& path, double frame_rate);

/// Canonical serialization; save→load→save is byte-identical.
std::string serialize_trajectory(const Trajectory& traj);

void save_trajectory(const Trajectory& traj, const fs::path& path);

}  // namespace worldmark::geom
