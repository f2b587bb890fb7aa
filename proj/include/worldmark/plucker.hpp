#pragma once

// Plucker ray embeddings: per-pixel (direction, moment) 6-vectors derived
// from a camera pose and pinhole intrinsics. Directions are unit length and
// satisfy d . m = 0 by construction.
//
// Frame expansion is the hot path (H*W rays per frame) and runs under
// OpenMP; a serial reference lives in worldmark/reference.hpp.

#include <vector>

#include "worldmark/adapters.hpp"
#include "worldmark/geometry.hpp"

namespace worldmark::plucker {

struct Ray {
    geom::Vec3 direction;  // unit
    geom::Vec3 moment;     // origin x direction
};

/// Ray through pixel (u, v) of a camera at `pose` (camera-to-world):
/// d = normalize(R * K^-1 * [u, v, 1]^T), m = o x d with o the camera
/// center in world coordinates.
Ray ray_for_pixel(const geom::Pose& pose, const geom::CameraIntrinsics& intr,
                  double u, double v);

/// Dense H x W x 6 map for one frame, row-major over (v, u), 6 values per
/// pixel: (dx, dy, dz, mx, my, mz). Pixels are sampled at integer
/// coordinates. Parallel over image rows.
std::vector<double> expand_frame(const geom::Pose& pose,
                                 const geom::CameraIntrinsics& intr);

/// Expand a deferred stream frame by frame, invoking `sink` with each
/// frame's dense map. Avoids materializing all frames at once.
template <typename Sink>
void expand_stream(const adapters::PluckerStream& stream, Sink&& sink) {
    for (size_t i = 0; i < stream.poses.size(); ++i)
        sink(i, expand_frame(stream.poses[i], stream.intrinsics));
}

}  // namespace worldmark::plucker
