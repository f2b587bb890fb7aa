#include "worldmark/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "worldmark/common.hpp"

namespace worldmark::geom {

Vec3 normalized(const Vec3& v) {
    double n = norm(v);
    if (n < 1e-15) throw ValidationError("cannot normalize near-zero vector");
    return scale(v, 1.0 / n);
}

// ── Rotation ─────────────────────────────────────────────────────────────────

namespace {

void normalize_canonical(double& w, double& x, double& y, double& z) {
    double n = std::sqrt(w * w + x * x + y * y + z * z);
    if (n < 1e-15) throw ValidationError("degenerate quaternion (near-zero norm)");
    // Skip the division when already unit: renormalizing must be an exact
    // no-op or serialize/parse cycles drift in the last bit.
    if (std::abs(n - 1.0) > 1e-12) {
        w /= n;
        x /= n;
        y /= n;
        z /= n;
    }
    if (w < 0.0) {  // double cover: pick the representative with w >= 0
        w = -w;
        x = -x;
        y = -y;
        z = -z;
    }
}

}  // namespace

Rotation::Rotation(double w_, double x_, double y_, double z_)
    : w(w_), x(x_), y(y_), z(z_) {
    normalize_canonical(w, x, y, z);
}

Rotation Rotation::from_axis_angle(const Vec3& axis, double angle_rad) {
    Vec3 n = normalized(axis);
    double half = 0.5 * angle_rad;
    double s = std::sin(half);
    return {std::cos(half), s * n[0], s * n[1], s * n[2]};
}

Rotation Rotation::yaw_left_deg(double deg) {
    return from_axis_angle({0.0, -1.0, 0.0}, deg_to_rad(deg));
}

Vec3 Rotation::rotate(const Vec3& v) const {
    // v' = v + 2w(u x v) + 2(u x (u x v)), u = (x, y, z)
    Vec3 u{x, y, z};
    Vec3 uv = cross(u, v);
    Vec3 uuv = cross(u, uv);
    return {v[0] + 2.0 * (w * uv[0] + uuv[0]),
            v[1] + 2.0 * (w * uv[1] + uuv[1]),
            v[2] + 2.0 * (w * uv[2] + uuv[2])};
}

std::array<double, 9> Rotation::matrix() const {
    double xx = x * x, yy = y * y, zz = z * z;
    double xy = x * y, xz = x * z, yz = y * z;
    double wx = w * x, wy = w * y, wz = w * z;
    return {1 - 2 * (yy + zz), 2 * (xy - wz),     2 * (xz + wy),
            2 * (xy + wz),     1 - 2 * (xx + zz), 2 * (yz - wx),
            2 * (xz - wy),     2 * (yz + wx),     1 - 2 * (xx + yy)};
}

Rotation compose(const Rotation& a, const Rotation& b) {
    return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

double geodesic_deg(const Rotation& a, const Rotation& b) {
    // tr(Ra*Rb^T) via the matrices, exactly the reported formula.
    auto ma = a.matrix();
    auto mb = b.matrix();
    double trace = 0.0;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) trace += ma[r * 3 + c] * mb[r * 3 + c];
    }
    double arg = std::clamp((trace - 1.0) / 2.0, -1.0, 1.0);
    return std::clamp(rad_to_deg(std::acos(arg)), 0.0, 180.0);
}

// ── Pose / Trajectory ────────────────────────────────────────────────────────

Pose::Pose(Rotation r, Vec3 t, double ts)
    : rotation(r), translation(t), timestamp(ts) {
    if (!std::isfinite(ts) || ts < 0.0)
        throw ValidationError("pose timestamp must be finite and >= 0");
}

Pose compose(const Pose& a, const Pose& b) {
    return Pose(compose(a.rotation, b.rotation),
                add(a.rotation.rotate(b.translation), a.translation),
                b.timestamp);
}

Pose inverse(const Pose& p) {
    Rotation rinv = p.rotation.inverse();
    return Pose(rinv, scale(rinv.rotate(p.translation), -1.0), p.timestamp);
}

void Trajectory::validate() const {
    if (!(frame_rate > 0.0) || !std::isfinite(frame_rate))
        throw ValidationError("trajectory frame_rate must be > 0");
    for (size_t i = 1; i < poses.size(); ++i) {
        if (!(poses[i].timestamp > poses[i - 1].timestamp))
            throw ValidationError("trajectory timestamps must be strictly increasing");
    }
}

Trajectory align_to_first(const Trajectory& traj) {
    if (traj.poses.empty())
        throw ValidationError("cannot align an empty trajectory");
    Trajectory out;
    out.frame_rate = traj.frame_rate;
    out.poses.reserve(traj.size());
    Pose origin_inv = inverse(traj.poses.front());
    for (const Pose& p : traj.poses) {
        Pose aligned = compose(origin_inv, p);
        aligned.timestamp = p.timestamp;
        out.poses.push_back(aligned);
    }
    return out;
}

Trajectory resample_nearest(const Trajectory& traj,
                            const std::vector<double>& ref_timestamps) {
    if (traj.poses.empty())
        throw ValidationError("cannot resample an empty trajectory");
    Trajectory out;
    out.frame_rate = traj.frame_rate;
    out.poses.reserve(ref_timestamps.size());
    for (double t : ref_timestamps) {
        size_t best = 0;
        double best_dt = std::abs(traj.poses[0].timestamp - t);
        for (size_t i = 1; i < traj.size(); ++i) {
            double dt = std::abs(traj.poses[i].timestamp - t);
            if (dt < best_dt) {
                best_dt = dt;
                best = i;
            }
        }
        Pose p = traj.poses[best];
        p.timestamp = t;
        out.poses.push_back(p);
    }
    return out;
}

// ── Camera intrinsics ────────────────────────────────────────────────────────

void CameraIntrinsics::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0))
        throw ValidationError("intrinsics: focal lengths must be > 0");
    if (!(cx > 0.0) || !(cx < width) || !(cy > 0.0) || !(cy < height))
        throw ValidationError("intrinsics: principal point outside image");
}

}  // namespace worldmark::geom
