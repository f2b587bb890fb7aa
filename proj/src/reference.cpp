#include "worldmark/reference.hpp"

#include <algorithm>
#include <cmath>

#include "worldmark/common.hpp"

namespace worldmark::ref {

using geom::Rotation;
using geom::Trajectory;
using geom::Vec3;

double geodesic_deg(const Rotation& a, const Rotation& b) {
    double d = std::abs(a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z);
    d = std::min(d, 1.0);
    return geom::rad_to_deg(2.0 * std::acos(d));
}

namespace {

void check_pair(const Trajectory& gt, const Trajectory& est) {
    if (gt.size() != est.size() || gt.size() < 2)
        throw ValidationError("reference metrics need equal lengths >= 2");
}

/// d/ds of sum |g - s e|^2, up to the constant factor 2: direct summation
/// of dot(s e - g, e) over frames.
double residual_derivative(const Trajectory& gt, const Trajectory& est,
                           double s) {
    double total = 0.0;
    for (size_t i = 0; i < gt.size(); ++i) {
        const Vec3& g = gt.poses[i].translation;
        const Vec3& e = est.poses[i].translation;
        total += (s * e[0] - g[0]) * e[0] + (s * e[1] - g[1]) * e[1] +
                 (s * e[2] - g[2]) * e[2];
    }
    return total;
}

}  // namespace

double fit_scale(const Trajectory& gt, const Trajectory& est) {
    check_pair(gt, est);
    double est_energy = 0.0, bound = 0.0;
    for (size_t i = 0; i < gt.size(); ++i) {
        const Vec3& g = gt.poses[i].translation;
        const Vec3& e = est.poses[i].translation;
        est_energy += e[0] * e[0] + e[1] * e[1] + e[2] * e[2];
        bound += std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]) *
                 std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
    }
    if (est_energy < 1e-12) return 0.0;

    // |s*| <= sum|g||e| / sum|e|^2 by Cauchy-Schwarz; the residual
    // derivative is monotone increasing, so bisect its sign change.
    double hi = bound / est_energy + 1.0;
    double lo = -hi;
    for (int iter = 0; iter < 200; ++iter) {
        double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (residual_derivative(gt, est, mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double translation_error(const Trajectory& gt, const Trajectory& est) {
    check_pair(gt, est);
    double est_energy = 0.0;
    for (const auto& p : est.poses)
        est_energy += geom::dot(p.translation, p.translation);

    double sum = 0.0;
    if (est_energy < 1e-12) {
        for (const auto& p : gt.poses) sum += geom::norm(p.translation);
        return sum / static_cast<double>(gt.size());
    }
    const double s = fit_scale(gt, est);
    for (size_t i = 0; i < gt.size(); ++i) {
        const Vec3& g = gt.poses[i].translation;
        const Vec3& e = est.poses[i].translation;
        double dx = g[0] - s * e[0];
        double dy = g[1] - s * e[1];
        double dz = g[2] - s * e[2];
        sum += std::sqrt(dx * dx + dy * dy + dz * dz);
    }
    return sum / static_cast<double>(gt.size());
}

double rotation_error(const Trajectory& gt, const Trajectory& est) {
    check_pair(gt, est);
    double sum = 0.0;
    for (size_t i = 0; i < gt.size(); ++i)
        sum += worldmark::ref::geodesic_deg(gt.poses[i].rotation,
                                            est.poses[i].rotation);
    return sum / static_cast<double>(gt.size());
}

double reprojection_error(
    const std::vector<metrics::ReprojectionObservation>& observations,
    const geom::CameraIntrinsics& intrinsics) {
    if (observations.empty())
        throw ValidationError("reference reprojection needs observations");
    double sum = 0.0;
    for (const auto& obs : observations) {
        if (!(obs.point[2] > 0.0))
            throw ValidationError("reference reprojection: depth <= 0");
        double u = intrinsics.fx * obs.point[0] / obs.point[2] + intrinsics.cx;
        double v = intrinsics.fy * obs.point[1] / obs.point[2] + intrinsics.cy;
        sum += std::hypot(obs.px - u, obs.py - v);
    }
    return sum / static_cast<double>(observations.size());
}

double spearman_rho(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw ValidationError("reference spearman needs equal lengths >= 2");
    const size_t n = a.size();

    auto ranks = [n](const std::vector<double>& v) {
        std::vector<double> r(n);
        for (size_t i = 0; i < n; ++i) {
            size_t less = 0, equal = 0;
            for (size_t j = 0; j < n; ++j) {
                if (v[j] < v[i]) ++less;
                if (v[j] == v[i]) ++equal;
            }
            r[i] = static_cast<double>(less) +
                   (static_cast<double>(equal) + 1.0) / 2.0;
        }
        return r;
    };

    std::vector<double> ra = ranks(a), rb = ranks(b);
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        sx += ra[i];
        sy += rb[i];
        sxx += ra[i] * ra[i];
        syy += rb[i] * rb[i];
        sxy += ra[i] * rb[i];
    }
    const double dn = static_cast<double>(n);
    double cov = dn * sxy - sx * sy;
    double var_a = dn * sxx - sx * sx;
    double var_b = dn * syy - sy * sy;
    if (var_a <= 0.0 || var_b <= 0.0)
        throw ValidationError("reference spearman undefined for constant list");
    return cov / std::sqrt(var_a * var_b);
}

namespace {

/// q (x,y,z,w fields) applied to v via the explicit sandwich product
/// q * [0, v] * q^-1.
Vec3 rotate_sandwich(const Rotation& q, const Vec3& v) {
    // p = q * (0, v)
    double pw = -q.x * v[0] - q.y * v[1] - q.z * v[2];
    double px = q.w * v[0] + q.y * v[2] - q.z * v[1];
    double py = q.w * v[1] + q.z * v[0] - q.x * v[2];
    double pz = q.w * v[2] + q.x * v[1] - q.y * v[0];
    // r = p * conj(q)
    return {-pw * q.x + px * q.w - py * q.z + pz * q.y,
            -pw * q.y + py * q.w - pz * q.x + px * q.z,
            -pw * q.z + pz * q.w - px * q.y + py * q.x};
}

}  // namespace

plucker::Ray ray_for_pixel(const geom::Pose& pose,
                           const geom::CameraIntrinsics& intr, double u,
                           double v) {
    Vec3 cam{(u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0};
    Vec3 world = rotate_sandwich(pose.rotation, cam);
    double len = std::sqrt(world[0] * world[0] + world[1] * world[1] +
                           world[2] * world[2]);
    Vec3 d{world[0] / len, world[1] / len, world[2] / len};
    const Vec3& o = pose.translation;
    Vec3 m{o[1] * d[2] - o[2] * d[1], o[2] * d[0] - o[0] * d[2],
           o[0] * d[1] - o[1] * d[0]};
    return {d, m};
}

std::vector<double> expand_frame(const geom::Pose& pose,
                                 const geom::CameraIntrinsics& intr) {
    std::vector<double> map(static_cast<size_t>(intr.width) * intr.height * 6);
    size_t idx = 0;
    for (int v = 0; v < intr.height; ++v) {
        for (int u = 0; u < intr.width; ++u) {
            plucker::Ray ray = ray_for_pixel(pose, intr, u, v);
            map[idx++] = ray.direction[0];
            map[idx++] = ray.direction[1];
            map[idx++] = ray.direction[2];
            map[idx++] = ray.moment[0];
            map[idx++] = ray.moment[1];
            map[idx++] = ray.moment[2];
        }
    }
    return map;
}

}  // namespace worldmark::ref
