#include "worldmark/png_io.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>

namespace worldmark::png {

namespace {

void push_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void push_chunk(std::vector<std::uint8_t>& out, const char type[4],
                const std::vector<std::uint8_t>& payload) {
    push_u32(out, static_cast<std::uint32_t>(payload.size()));
    size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    uLong crc = ::crc32(0L, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start));
    push_u32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

std::vector<std::uint8_t> encode_rgb8(int width, int height,
                                      const std::vector<std::uint8_t>& rgb) {
    if (width <= 0 || height <= 0)
        throw ValidationError("png: dimensions must be positive");
    const size_t expected = static_cast<size_t>(width) * height * 3;
    if (rgb.size() != expected)
        throw ValidationError("png: pixel buffer size mismatch");

    // Filter byte 0 at the start of every scanline.
    std::vector<std::uint8_t> raw;
    raw.reserve(expected + static_cast<size_t>(height));
    const size_t stride = static_cast<size_t>(width) * 3;
    for (int y = 0; y < height; ++y) {
        raw.push_back(0);
        const std::uint8_t* row = rgb.data() + static_cast<size_t>(y) * stride;
        raw.insert(raw.end(), row, row + stride);
    }

    uLongf compressed_size = ::compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> compressed(compressed_size);
    if (::compress2(compressed.data(), &compressed_size, raw.data(),
                    static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw IoError("png: zlib compression failed");
    compressed.resize(compressed_size);

    std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    std::vector<std::uint8_t> ihdr;
    push_u32(ihdr, static_cast<std::uint32_t>(width));
    push_u32(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(8);   // bit depth
    ihdr.push_back(2);   // color type: truecolor
    ihdr.push_back(0);   // compression
    ihdr.push_back(0);   // filter
    ihdr.push_back(0);   // interlace
    push_chunk(out, "IHDR", ihdr);
    push_chunk(out, "IDAT", compressed);
    push_chunk(out, "IEND", {});
    return out;
}

void write_rgb8(const fs::path& path, int width, int height,
                const std::vector<std::uint8_t>& rgb) {
    auto bytes = encode_rgb8(width, height, rgb);
    write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                      bytes.size()));
}

}  // namespace worldmark::png
