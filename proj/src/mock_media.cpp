#include "worldmark/mock_media.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "worldmark/png_io.hpp"

namespace worldmark::media {

using nlohmann::json;

void ImageMeta::validate() const {
    if (viewpoint != "first" && viewpoint != "third")
        throw ValidationError("image viewpoint must be 'first' or 'third'");
    if (style != "real" && style != "stylized")
        throw ValidationError("image style must be 'real' or 'stylized'");
    if (scene != "nature" && scene != "city" && scene != "indoor")
        throw ValidationError("image scene must be nature, city or indoor");
}

std::string ImageMeta::split() const { return viewpoint + "_" + style; }

ImageMeta load_image_meta(const fs::path& sidecar) {
    json doc;
    try {
        doc = json::parse(read_file(sidecar));
    } catch (const json::exception& e) {
        throw ParseError(sidecar.string() + ": " + e.what());
    }
    ImageMeta meta{doc.at("viewpoint").get<std::string>(),
                   doc.at("style").get<std::string>(),
                   doc.at("scene").get<std::string>()};
    meta.validate();
    return meta;
}

void save_image_meta(const ImageMeta& meta, const fs::path& sidecar) {
    meta.validate();
    json doc = {{"viewpoint", meta.viewpoint},
                {"style", meta.style},
                {"scene", meta.scene}};
    write_file(sidecar, doc.dump(2) + "\n");
}

fs::path sidecar_path(const fs::path& image) {
    fs::path p = image;
    p += ".json";
    return p;
}

// ── Rendering ────────────────────────────────────────────────────────────────

namespace {

void put_pixel(std::vector<std::uint8_t>& rgb, int width, int height, int x,
               int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    size_t idx = (static_cast<size_t>(y) * width + x) * 3;
    rgb[idx] = r;
    rgb[idx + 1] = g;
    rgb[idx + 2] = b;
}

std::array<std::uint8_t, 3> seed_color(std::uint64_t seed) {
    return {static_cast<std::uint8_t>(40 + seed % 160),
            static_cast<std::uint8_t>(40 + (seed >> 8) % 160),
            static_cast<std::uint8_t>(40 + (seed >> 16) % 160)};
}

}  // namespace

std::vector<std::uint8_t> render_frame(int width, int height,
                                       std::uint64_t seed, size_t frame_index,
                                       const geom::Pose& pose,
                                       const geom::CameraIntrinsics& intr) {
    auto bg = seed_color(seed);
    std::vector<std::uint8_t> rgb(static_cast<size_t>(width) * height * 3);
    for (size_t i = 0; i < rgb.size(); i += 3) {
        rgb[i] = bg[0];
        rgb[i + 1] = bg[1];
        rgb[i + 2] = bg[2];
    }

    // Frame index as a 32-bit strip along the top edge.
    for (int bit = 0; bit < 32; ++bit) {
        bool on = (frame_index >> bit) & 1u;
        for (int dx = 0; dx < 3; ++dx)
            for (int dy = 0; dy < 3; ++dy)
                put_pixel(rgb, width, height, bit * 4 + dx + 1, dy + 1,
                          on ? 255 : 0, on ? 255 : 0, on ? 255 : 0);
    }

    // A world-anchored grid of points ahead of the start pose, projected
    // through the current camera. Gives the frames parallax that tracks the
    // trajectory.
    geom::Pose world_from_cam = pose;
    geom::Pose cam_from_world = geom::inverse(world_from_cam);
    for (int gx = -4; gx <= 4; ++gx) {
        for (int gy = -2; gy <= 2; ++gy) {
            for (int gz = 1; gz <= 5; ++gz) {
                geom::Vec3 world_point{static_cast<double>(gx) * 2.0,
                                       static_cast<double>(gy) * 2.0,
                                       static_cast<double>(gz) * 8.0};
                geom::Vec3 cam_point = geom::add(
                    cam_from_world.rotation.rotate(world_point),
                    cam_from_world.translation);
                if (cam_point[2] <= 0.5) continue;
                auto px = intr.project(cam_point);
                int x = static_cast<int>(std::lround(px[0]));
                int y = static_cast<int>(std::lround(px[1]));
                std::uint8_t shade = static_cast<std::uint8_t>(
                    255 - std::min(200.0, cam_point[2] * 8.0));
                for (int dx = 0; dx < 2; ++dx)
                    for (int dy = 0; dy < 2; ++dy)
                        put_pixel(rgb, width, height, x + dx, y + dy, shade,
                                  shade, 80);
            }
        }
    }
    return rgb;
}

std::vector<std::uint8_t> render_reference(int width, int height,
                                           std::uint64_t seed,
                                           const ImageMeta& meta) {
    auto bg = seed_color(seed * 2654435761u + 17);
    std::vector<std::uint8_t> rgb(static_cast<size_t>(width) * height * 3);
    // Scene category tints the background; style controls a stripe pattern;
    // viewpoint flips it, so every suite image is visually distinct.
    std::uint8_t tint_r = meta.scene == "city" ? 90 : 30;
    std::uint8_t tint_g = meta.scene == "nature" ? 110 : 40;
    std::uint8_t tint_b = meta.scene == "indoor" ? 100 : 50;
    const bool stripes = meta.style == "stylized";
    const bool flip = meta.viewpoint == "third";
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            size_t idx = (static_cast<size_t>(y) * width + x) * 3;
            int sx = flip ? (width - 1 - x) : x;
            std::uint8_t wave = stripes
                                    ? static_cast<std::uint8_t>((sx / 8) % 2 * 60)
                                    : static_cast<std::uint8_t>(sx / 4);
            rgb[idx] = static_cast<std::uint8_t>((bg[0] + tint_r + wave) / 2);
            rgb[idx + 1] = static_cast<std::uint8_t>((bg[1] + tint_g + y / 4) / 2);
            rgb[idx + 2] = static_cast<std::uint8_t>((bg[2] + tint_b) / 2);
        }
    }
    return rgb;
}

// ── Image suite ──────────────────────────────────────────────────────────────

std::vector<fs::path> generate_image_suite(const fs::path& dir,
                                           size_t scene_count, int width,
                                           int height, std::uint64_t seed) {
    fs::create_directories(dir);
    const char* scenes[] = {"nature", "city", "indoor"};
    std::vector<fs::path> images;
    for (size_t s = 0; s < scene_count; ++s) {
        ImageMeta meta;
        meta.scene = scenes[s % 3];
        meta.style = (s < (scene_count + 1) / 2) ? "real" : "stylized";
        for (const char* viewpoint : {"first", "third"}) {
            meta.viewpoint = viewpoint;
            char name[64];
            std::snprintf(name, sizeof(name), "scene_%03zu_%s.png", s, viewpoint);
            fs::path image = dir / name;
            png::write_rgb8(image, width, height,
                            render_reference(width, height, seed + s, meta));
            save_image_meta(meta, sidecar_path(image));
            images.push_back(image);
        }
    }
    return images;
}

}  // namespace worldmark::media
