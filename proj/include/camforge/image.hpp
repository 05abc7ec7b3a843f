#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace camforge {

// Planar-interleaved RGB frame, channel values nominally in [0,1].
// Accumulation buffers may exceed the range transiently; clamp() before export.
struct FrameBuffer {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;  // height * width * 3, row-major, RGB

    FrameBuffer() = default;
    FrameBuffer(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0.0) {}

    double* at(int x, int y) { return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3; }
    const double* at(int x, int y) const {
        return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
    }

    void fill(double r, double g, double b);
    void clamp();
    bool same_shape(const FrameBuffer& other) const {
        return width == other.width && height == other.height;
    }
};

// Rec.709 luma weights.
double luminance(double r, double g, double b);
double mean_luminance(const FrameBuffer& frame);

// Sum over pixels of Gx^2 + Gy^2 with 3x3 Sobel kernels on luma.
double gradient_energy(const FrameBuffer& frame);

double mean_abs_diff(const FrameBuffer& a, const FrameBuffer& b);
bool bit_equal(const FrameBuffer& a, const FrameBuffer& b);

// Luma-weighted centroid of |frame - background| in pixel coordinates.
struct Centroid {
    double x = 0.0;
    double y = 0.0;
};
Centroid weighted_centroid(const FrameBuffer& frame, const double background[3]);

// 8-bit PNG export/import; quantization is round(v*255) on clamped values.
void write_png(const FrameBuffer& frame, const std::string& path);
FrameBuffer read_png(const std::string& path);

}  // namespace camforge
