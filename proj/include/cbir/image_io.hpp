#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cbir {

/// Decoded 8-bit RGB raster, row-major, 3 bytes per pixel in R,G,B order.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;
};

/// Grayscale raster with intensities in [0,1], row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Decodes PNG or JPEG bytes; alpha is discarded. Throws DecodeError.
RgbImage decode_image(std::span<const std::uint8_t> encoded);

/// ITU-R 601 luminance scaled to [0,1].
GrayImage to_grayscale(const RgbImage& image);

std::vector<std::uint8_t> encode_png(const RgbImage& image);
std::vector<std::uint8_t> encode_png(const GrayImage& image);
std::vector<std::uint8_t> encode_jpeg(const RgbImage& image, int quality = 95);

} // namespace cbir
