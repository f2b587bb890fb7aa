#pragma once

// Ground-truth camera trajectory synthesis: frame-by-frame integration of an
// action sequence under a calibration profile. The result is the reference
// every geometric metric compares against, and the source for pose-based
// control payloads.

#include <optional>
#include <vector>

#include "worldmark/actions.hpp"
#include "worldmark/calibration.hpp"
#include "worldmark/geometry.hpp"

namespace worldmark::synth {

/// Explicit Euler at calib.frame_rate with piecewise-constant velocity.
/// Pose 0 is identity at t = 0 and the pose count is
/// round(total_duration * frame_rate) + 1. Each step is either a yaw update
/// (yaw_rate * dt on L/R) or a translation along the current heading's local
/// axis (W:+z, S:-z, D:+x, A:-x) by linear_speed * dt; never both.
geom::Trajectory synthesize(const actions::ActionSequence& seq,
                            const CalibrationProfile& calib);

/// Core integrator shared by synthesize and the mock payload interpreters:
/// one primitive (or a hold-still nullopt) per step at the profile frame
/// rate. Pose count is steps.size() + 1.
geom::Trajectory integrate_steps(
    const std::vector<std::optional<actions::Kind>>& steps,
    const CalibrationProfile& calib);

/// The primitive in effect at time `t` seconds (segment starts inclusive,
/// ends exclusive; times at or past the total map to the last segment).
actions::Kind active_kind(const actions::ActionSequence& seq, double t);

}  // namespace worldmark::synth
