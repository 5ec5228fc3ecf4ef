#include "docsynth/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace docsynth {

namespace {

uint8_t clamp_u8(double v) {
    return static_cast<uint8_t>(std::clamp(std::llround(v), 0LL, 255LL));
}

} // namespace

ImageRGB flip_horizontal(const ImageRGB& img) {
    ImageRGB out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const uint8_t* s = img.at(img.width - 1 - x, y);
            std::copy(s, s + 3, out.at(x, y));
        }
    return out;
}

ImageRGB flip_vertical(const ImageRGB& img) {
    ImageRGB out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        const uint8_t* s = img.at(0, img.height - 1 - y);
        std::copy(s, s + static_cast<size_t>(img.width) * 3, out.at(0, y));
    }
    return out;
}

// brightness is an additive shift on [0,1] intensity, contrast scales about 0.5
ImageRGB adjust_brightness_contrast(const ImageRGB& img, double brightness, double contrast) {
    ImageRGB out(img.width, img.height);
    for (size_t i = 0; i < img.pixels.size(); ++i) {
        double v = img.pixels[i] / 255.0;
        v = (v - 0.5) * contrast + 0.5 + brightness;
        out.pixels[i] = clamp_u8(v * 255.0);
    }
    return out;
}

ImageRGB crop(const ImageRGB& img, int x0, int y0, int w, int h) {
    if (x0 < 0 || y0 < 0 || w < 1 || h < 1 || x0 + w > img.width || y0 + h > img.height)
        throw std::runtime_error("crop: window outside image");
    ImageRGB out(w, h);
    for (int y = 0; y < h; ++y) {
        const uint8_t* s = img.at(x0, y0 + y);
        std::copy(s, s + static_cast<size_t>(w) * 3, out.at(0, y));
    }
    return out;
}

ImageRGB sobel_edges(const ImageRGB& img) {
    const int w = img.width, h = img.height;
    std::vector<double> gray(static_cast<size_t>(w) * h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const uint8_t* p = img.at(x, y);
            gray[static_cast<size_t>(y) * w + x] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
        }
    auto g = [&](int x, int y) {
        x = std::clamp(x, 0, w - 1); // replicate border
        y = std::clamp(y, 0, h - 1);
        return gray[static_cast<size_t>(y) * w + x];
    };
    std::vector<double> mag(static_cast<size_t>(w) * h);
    double max_mag = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double gx = -g(x - 1, y - 1) - 2 * g(x - 1, y) - g(x - 1, y + 1)
                        + g(x + 1, y - 1) + 2 * g(x + 1, y) + g(x + 1, y + 1);
            double gy = -g(x - 1, y - 1) - 2 * g(x, y - 1) - g(x + 1, y - 1)
                        + g(x - 1, y + 1) + 2 * g(x, y + 1) + g(x + 1, y + 1);
            double m = std::sqrt(gx * gx + gy * gy);
            mag[static_cast<size_t>(y) * w + x] = m;
            max_mag = std::max(max_mag, m);
        }
    ImageRGB out(w, h);
    double scale = max_mag > 0.0 ? 255.0 / max_mag : 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            uint8_t v = clamp_u8(mag[static_cast<size_t>(y) * w + x] * scale);
            uint8_t* p = out.at(x, y);
            p[0] = p[1] = p[2] = v;
        }
    return out;
}

namespace {

// separable Gaussian blur on a scalar field
void gaussian_blur(std::vector<double>& field, int w, int h, double sigma) {
    if (sigma <= 0.0) return;
    int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += kernel[i + radius];
    }
    for (double& k : kernel) k /= sum;

    std::vector<double> tmp(field.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                int xx = std::clamp(x + i, 0, w - 1);
                acc += kernel[i + radius] * field[static_cast<size_t>(y) * w + xx];
            }
            tmp[static_cast<size_t>(y) * w + x] = acc;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                int yy = std::clamp(y + i, 0, h - 1);
                acc += kernel[i + radius] * tmp[static_cast<size_t>(yy) * w + x];
            }
            field[static_cast<size_t>(y) * w + x] = acc;
        }
}

} // namespace

ImageRGB elastic_transform(const ImageRGB& img, double alpha, double sigma, Rng& rng) {
    const int w = img.width, h = img.height;
    if (alpha <= 0.0) return img;
    std::vector<double> dx(static_cast<size_t>(w) * h), dy(dx.size());
    for (size_t i = 0; i < dx.size(); ++i) dx[i] = rng.uniform(-1.0, 1.0);
    for (size_t i = 0; i < dy.size(); ++i) dy[i] = rng.uniform(-1.0, 1.0);
    gaussian_blur(dx, w, h, sigma);
    gaussian_blur(dy, w, h, sigma);

    ImageRGB out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double sx = x + alpha * dx[static_cast<size_t>(y) * w + x];
            double sy = y + alpha * dy[static_cast<size_t>(y) * w + x];
            sx = std::clamp(sx, 0.0, static_cast<double>(w - 1));
            sy = std::clamp(sy, 0.0, static_cast<double>(h - 1));
            int x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
            int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
            double fx = sx - x0, fy = sy - y0;
            uint8_t* d = out.at(x, y);
            for (int c = 0; c < 3; ++c) {
                double v = (1 - fx) * (1 - fy) * img.at(x0, y0)[c]
                         + fx * (1 - fy) * img.at(x1, y0)[c]
                         + (1 - fx) * fy * img.at(x0, y1)[c]
                         + fx * fy * img.at(x1, y1)[c];
                d[c] = clamp_u8(v);
            }
        }
    return out;
}

ImageRGB add_gaussian_noise(const ImageRGB& img, double stddev, Rng& rng) {
    if (stddev <= 0.0) return img;
    ImageRGB out(img.width, img.height);
    for (size_t i = 0; i < img.pixels.size(); ++i)
        out.pixels[i] = clamp_u8(img.pixels[i] + rng.normal(0.0, stddev) * 255.0);
    return out;
}

ImageRGB resize_area(const ImageRGB& img, int new_w, int new_h) {
    if (new_w < 1 || new_h < 1) throw std::runtime_error("resize: target must be >= 1x1");
    if (new_w == img.width && new_h == img.height) return img;
    ImageRGB out(new_w, new_h);
    for (int y = 0; y < new_h; ++y) {
        int sy0 = static_cast<int>(static_cast<int64_t>(y) * img.height / new_h);
        int sy1 = static_cast<int>((static_cast<int64_t>(y) + 1) * img.height / new_h);
        if (sy1 <= sy0) sy1 = sy0 + 1;
        sy1 = std::min(sy1, img.height);
        for (int x = 0; x < new_w; ++x) {
            int sx0 = static_cast<int>(static_cast<int64_t>(x) * img.width / new_w);
            int sx1 = static_cast<int>((static_cast<int64_t>(x) + 1) * img.width / new_w);
            if (sx1 <= sx0) sx1 = sx0 + 1;
            sx1 = std::min(sx1, img.width);
            int64_t acc[3] = {0, 0, 0};
            int64_t n = 0;
            for (int sy = sy0; sy < sy1; ++sy)
                for (int sx = sx0; sx < sx1; ++sx) {
                    const uint8_t* p = img.at(sx, sy);
                    acc[0] += p[0];
                    acc[1] += p[1];
                    acc[2] += p[2];
                    ++n;
                }
            uint8_t* d = out.at(x, y);
            for (int c = 0; c < 3; ++c)
                d[c] = static_cast<uint8_t>((acc[c] + n / 2) / n);
        }
    }
    return out;
}

void paste(ImageRGB& dst, const ImageRGB& src, int x, int y) {
    int x0 = std::max(0, x), y0 = std::max(0, y);
    int x1 = std::min(dst.width, x + src.width);
    int y1 = std::min(dst.height, y + src.height);
    for (int yy = y0; yy < y1; ++yy) {
        const uint8_t* s = src.at(x0 - x, yy - y);
        std::copy(s, s + static_cast<size_t>(x1 - x0) * 3, dst.at(x0, yy));
    }
}

} // namespace docsynth
