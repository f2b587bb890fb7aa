#pragma once

// Procedural media for headless runs: tiny deterministic video frames
// (frame index strip + projected grid pattern) and the synthetic 100-image
// placeholder suite with metadata sidecars. Real reference images drop into
// the same directory contract (image file + "<image>.json" sidecar).

#include <cstdint>
#include <string>
#include <vector>

#include "worldmark/common.hpp"
#include "worldmark/geometry.hpp"

namespace worldmark::media {

// ── Image metadata sidecars ──────────────────────────────────────────────────

struct ImageMeta {
    std::string viewpoint;  // "first" | "third"
    std::string style;      // "real" | "stylized"
    std::string scene;      // "nature" | "city" | "indoor"

    void validate() const;
    std::string split() const;  // e.g. "first_real"
};

ImageMeta load_image_meta(const fs::path& sidecar);
void save_image_meta(const ImageMeta& meta, const fs::path& sidecar);

/// Sidecar path for an image: "<image>.json" next to it.
fs::path sidecar_path(const fs::path& image);

// ── Procedural rendering ─────────────────────────────────────────────────────

/// One mock video frame: a flat background keyed off `seed`, a binary strip
/// encoding `frame_index`, and a grid of world points projected through
/// `pose`. Byte-deterministic for identical inputs.
std::vector<std::uint8_t> render_frame(int width, int height,
                                       std::uint64_t seed, size_t frame_index,
                                       const geom::Pose& pose,
                                       const geom::CameraIntrinsics& intr);

/// One placeholder reference image, visually distinct per (scene_id, meta).
std::vector<std::uint8_t> render_reference(int width, int height,
                                           std::uint64_t seed,
                                           const ImageMeta& meta);

// ── Synthetic image suite ────────────────────────────────────────────────────

/// Writes `scene_count` scenes x 2 viewpoints of tiny placeholder images
/// plus sidecars into `dir` (default 50 scenes -> 100 images: half real,
/// half stylized; scene categories cycle nature/city/indoor). Returns the
/// image paths in deterministic order.
std::vector<fs::path> generate_image_suite(const fs::path& dir,
                                           size_t scene_count = 50,
                                           int width = 128, int height = 128,
                                           std::uint64_t seed = 0);

}  // namespace worldmark::media
