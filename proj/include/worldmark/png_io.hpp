#pragma once

// Minimal PNG writing (8-bit RGB, zlib-compressed). Enough for the
// procedural mock frames and placeholder reference images; nothing here
// decodes.

#include <cstdint>
#include <vector>

#include "worldmark/common.hpp"

namespace worldmark::png {

/// `rgb` is row-major, 3 bytes per pixel, size = width * height * 3.
std::vector<std::uint8_t> encode_rgb8(int width, int height,
                                      const std::vector<std::uint8_t>& rgb);

void write_rgb8(const fs::path& path, int width, int height,
                const std::vector<std::uint8_t>& rgb);

}  // namespace worldmark::png
