#pragma once

// SE(3) pose algebra and trajectory containers.
//
// Frame convention (fixed for the whole toolkit): right-handed camera frame,
// +x right, +y down, +z forward. Yaw-left is a rotation by +theta about -y.
// Angles are degrees at public boundaries and radians internally.
//
// All types are immutable value types; nothing here mutates shared state.

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace worldmark::geom {

constexpr double kPi = 3.14159265358979323846;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// ── Vectors ──────────────────────────────────────────────────────────────────

using Vec3 = std::array<double, 3>;

constexpr Vec3 add(const Vec3& a, const Vec3& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
constexpr Vec3 sub(const Vec3& a, const Vec3& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
constexpr Vec3 scale(const Vec3& v, double s) {
    return {v[0] * s, v[1] * s, v[2] * s};
}
constexpr double dot(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

Vec3 normalized(const Vec3& v);  // throws ValidationError on near-zero input

// ── Rotation ─────────────────────────────────────────────────────────────────

/// Unit quaternion, canonicalized so w >= 0 (double cover removed).
/// Every constructor and operation renormalizes, so the unit-norm invariant
/// holds to well below 1e-9 at all times.
struct Rotation {
    double w = 1.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Rotation() = default;
    Rotation(double w_, double x_, double y_, double z_);

    static Rotation identity() { return {}; }
    static Rotation from_axis_angle(const Vec3& axis, double angle_rad);
    /// Yaw-left by `deg` degrees: +deg about -y under the frame convention.
    static Rotation yaw_left_deg(double deg);

    Rotation inverse() const { return {w, -x, -y, -z}; }
    Vec3 rotate(const Vec3& v) const;

    /// Row-major 3x3 rotation matrix.
    std::array<double, 9> matrix() const;

    double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
};

/// Hamilton product a*b (apply b first, then a).
Rotation compose(const Rotation& a, const Rotation& b);

/// Geodesic distance on SO(3) in degrees: acos((tr(Ra*Rb^T) - 1) / 2), with
/// the acos argument clamped to [-1, 1] and the result clamped to [0, 180].
double geodesic_deg(const Rotation& a, const Rotation& b);

// ── Pose / Trajectory ────────────────────────────────────────────────────────

struct Pose {
    Rotation rotation;
    Vec3 translation{0.0, 0.0, 0.0};
    double timestamp = 0.0;  // seconds, finite and >= 0

    Pose() = default;
    Pose(Rotation r, Vec3 t, double ts);

    static Pose identity(double ts = 0.0) { return Pose({}, {0, 0, 0}, ts); }
};

/// a∘b: rotation = Ra*Rb, translation = Ra*tb + ta. Timestamp taken from b.
Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);

struct Trajectory {
    std::vector<Pose> poses;
    double frame_rate = 0.0;  // Hz, > 0

    size_t size() const { return poses.size(); }
    const Pose& operator[](size_t i) const { return poses[i]; }

    /// Throws ValidationError unless frame_rate > 0 and timestamps are
    /// strictly increasing.
    void validate() const;
};

/// Left-multiplies every pose by inverse(poses[0]) so the first pose becomes
/// identity. Timestamps are preserved. Idempotent.
Trajectory align_to_first(const Trajectory& traj);

/// For each reference timestamp picks the pose with the nearest timestamp
/// (earlier pose wins ties). Used to bring SLAM estimates onto the
/// ground-truth time base.
Trajectory resample_nearest(const Trajectory& traj,
                            const std::vector<double>& ref_timestamps);

// ── Camera intrinsics ────────────────────────────────────────────────────────

struct CameraIntrinsics {
    double fx = 0.0, fy = 0.0;  // pixels
    double cx = 0.0, cy = 0.0;  // pixels
    int width = 0, height = 0;  // pixels

    /// Throws ValidationError unless fx,fy > 0 and the principal point lies
    /// strictly inside the image.
    void validate() const;

    /// Pinhole projection of a camera-frame point with P.z > 0.
    std::array<double, 2> project(const Vec3& p) const {
        return {fx * p[0] / p[2] + cx, fy * p[1] / p[2] + cy};
    }

    /// Unit-depth ray through pixel (u, v): K^-1 [u, v, 1]^T.
    Vec3 unproject(double u, double v) const {
        return {(u - cx) / fx, (v - cy) / fy, 1.0};
    }
};

}  // namespace worldmark::geom
