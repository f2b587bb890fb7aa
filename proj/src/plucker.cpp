#include "worldmark/plucker.hpp"

#include <cmath>

namespace worldmark::plucker {

using geom::Vec3;

Ray ray_for_pixel(const geom::Pose& pose, const geom::CameraIntrinsics& intr,
                  double u, double v) {
    Vec3 cam_ray = intr.unproject(u, v);
    Vec3 world_ray = pose.rotation.rotate(cam_ray);
    Vec3 d = geom::scale(world_ray, 1.0 / geom::norm(world_ray));
    Vec3 m = geom::cross(pose.translation, d);
    return {d, m};
}

std::vector<double> expand_frame(const geom::Pose& pose,
                                 const geom::CameraIntrinsics& intr) {
    intr.validate();
    const int w = intr.width, h = intr.height;
    std::vector<double> map(static_cast<size_t>(w) * h * 6);

    // Precompute the rotated basis so the inner loop is pure arithmetic:
    // R * K^-1 * [u, v, 1]^T = u * col_u + v * col_v + col_w.
    const Vec3 col_u = pose.rotation.rotate({1.0 / intr.fx, 0.0, 0.0});
    const Vec3 col_v = pose.rotation.rotate({0.0, 1.0 / intr.fy, 0.0});
    const Vec3 col_w = pose.rotation.rotate(
        {-intr.cx / intr.fx, -intr.cy / intr.fy, 1.0});
    const Vec3 origin = pose.translation;

#pragma omp parallel for schedule(static)
    for (int v = 0; v < h; ++v) {
        double* row = map.data() + static_cast<size_t>(v) * w * 6;
        for (int u = 0; u < w; ++u) {
            Vec3 ray = {u * col_u[0] + v * col_v[0] + col_w[0],
                        u * col_u[1] + v * col_v[1] + col_w[1],
                        u * col_u[2] + v * col_v[2] + col_w[2]};
            double inv_len = 1.0 / std::sqrt(geom::dot(ray, ray));
            Vec3 d = geom::scale(ray, inv_len);
            Vec3 m = geom::cross(origin, d);
            double* px = row + static_cast<size_t>(u) * 6;
            px[0] = d[0];
            px[1] = d[1];
            px[2] = d[2];
            px[3] = m[0];
            px[4] = m[1];
            px[5] = m[2];
        }
    }
    return map;
}

}  // namespace worldmark::plucker
