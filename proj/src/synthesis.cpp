#include "worldmark/synthesis.hpp"

#include <cmath>
#include <optional>

namespace worldmark::synth {

using actions::Kind;
using geom::Pose;
using geom::Rotation;
using geom::Trajectory;
using geom::Vec3;

namespace {

Vec3 local_axis(Kind k) {
    switch (k) {
        case Kind::Forward: return {0.0, 0.0, 1.0};
        case Kind::Backward: return {0.0, 0.0, -1.0};
        case Kind::StrafeRight: return {1.0, 0.0, 0.0};
        case Kind::StrafeLeft: return {-1.0, 0.0, 0.0};
        default: throw ValidationError("rotation primitive has no axis");
    }
}

}  // namespace

Kind active_kind(const actions::ActionSequence& seq, double t) {
    if (seq.segments.empty()) throw ValidationError("empty action sequence");
    double cursor = 0.0;
    for (const auto& seg : seq.segments) {
        cursor += seg.duration;
        if (t < cursor) return seg.kind;
    }
    return seq.segments.back().kind;
}

Trajectory integrate_steps(const std::vector<std::optional<Kind>>& steps,
                           const CalibrationProfile& calib) {
    calib.validate();
    const double dt = 1.0 / calib.frame_rate;

    Trajectory traj;
    traj.frame_rate = calib.frame_rate;
    traj.poses.reserve(steps.size() + 1);

    Rotation heading;
    Vec3 position{0.0, 0.0, 0.0};
    traj.poses.push_back(Pose(heading, position, 0.0));

    for (size_t i = 0; i < steps.size(); ++i) {
        if (steps[i]) {
            const Kind kind = *steps[i];
            if (actions::is_rotation(kind)) {
                double step_deg = calib.yaw_rate * dt;
                if (kind == Kind::YawRight) step_deg = -step_deg;
                heading = compose(heading, Rotation::yaw_left_deg(step_deg));
            } else {
                Vec3 world_step = heading.rotate(local_axis(kind));
                position = geom::add(
                    position, geom::scale(world_step, calib.linear_speed * dt));
            }
        }
        traj.poses.push_back(
            Pose(heading, position, static_cast<double>(i + 1) * dt));
    }
    return traj;
}

Trajectory synthesize(const actions::ActionSequence& seq,
                      const CalibrationProfile& calib) {
    calib.validate();
    if (seq.segments.empty()) throw ValidationError("empty action sequence");

    const double fps = calib.frame_rate;
    const double dt = 1.0 / fps;
    const auto n_steps =
        static_cast<size_t>(std::llround(seq.total_duration() * fps));

    std::vector<std::optional<Kind>> steps;
    steps.reserve(n_steps);
    for (size_t i = 0; i < n_steps; ++i)
        steps.push_back(active_kind(seq, static_cast<double>(i) * dt));
    return integrate_steps(steps, calib);
}

}  // namespace worldmark::synth
