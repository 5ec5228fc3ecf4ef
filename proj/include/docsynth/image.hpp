#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "docsynth/rng.hpp"

namespace docsynth {

/// Dense 8-bit RGB raster, row-major, interleaved channels.
struct ImageRGB {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels; // size = width * height * 3

    ImageRGB() = default;
    ImageRGB(int w, int h, uint8_t fill = 255)
        : width(w), height(h), pixels(static_cast<size_t>(w) * h * 3, fill) {}

    uint8_t* at(int x, int y) { return pixels.data() + (static_cast<size_t>(y) * width + x) * 3; }
    const uint8_t* at(int x, int y) const {
        return pixels.data() + (static_cast<size_t>(y) * width + x) * 3;
    }
    bool empty() const { return width <= 0 || height <= 0; }
    bool operator==(const ImageRGB&) const = default;
};

// raster ops
ImageRGB flip_horizontal(const ImageRGB& img);
ImageRGB flip_vertical(const ImageRGB& img);
ImageRGB adjust_brightness_contrast(const ImageRGB& img, double brightness, double contrast);
ImageRGB crop(const ImageRGB& img, int x0, int y0, int w, int h);
ImageRGB sobel_edges(const ImageRGB& img);
ImageRGB elastic_transform(const ImageRGB& img, double alpha, double sigma, Rng& rng);
ImageRGB add_gaussian_noise(const ImageRGB& img, double stddev, Rng& rng);

// Box-average resize; each destination pixel averages the source pixels its
// footprint covers (integer pixel granularity, so output is platform-stable).
ImageRGB resize_area(const ImageRGB& img, int new_w, int new_h);

void paste(ImageRGB& dst, const ImageRGB& src, int x, int y);

// codecs (PNG via libpng, JPEG via libjpeg); throw std::runtime_error naming the file
ImageRGB load_image(const std::string& path);
void save_png(const ImageRGB& img, const std::string& path);

} // namespace docsynth
