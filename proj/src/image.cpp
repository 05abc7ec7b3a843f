#include "camforge/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

#include <png.h>

#include "camforge/errors.hpp"

namespace camforge {

void FrameBuffer::fill(double r, double g, double b) {
    for (std::size_t i = 0; i + 2 < pixels.size(); i += 3) {
        pixels[i] = r;
        pixels[i + 1] = g;
        pixels[i + 2] = b;
    }
}

void FrameBuffer::clamp() {
    for (double& v : pixels) v = std::clamp(v, 0.0, 1.0);
}

double luminance(double r, double g, double b) {
    return 0.2126 * r + 0.7152 * g + 0.0722 * b;
}

double mean_luminance(const FrameBuffer& frame) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 2 < frame.pixels.size(); i += 3) {
        sum += luminance(frame.pixels[i], frame.pixels[i + 1], frame.pixels[i + 2]);
    }
    return sum / (static_cast<double>(frame.width) * frame.height);
}

double gradient_energy(const FrameBuffer& frame) {
    const int w = frame.width;
    const int h = frame.height;
    std::vector<double> luma(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double* p = frame.at(x, y);
            luma[static_cast<std::size_t>(y) * w + x] = luminance(p[0], p[1], p[2]);
        }
    }
    auto L = [&](int x, int y) { return luma[static_cast<std::size_t>(y) * w + x]; };
    double energy = 0.0;
    for (int y = 1; y + 1 < h; ++y) {
        for (int x = 1; x + 1 < w; ++x) {
            const double gx = (L(x + 1, y - 1) + 2.0 * L(x + 1, y) + L(x + 1, y + 1)) -
                              (L(x - 1, y - 1) + 2.0 * L(x - 1, y) + L(x - 1, y + 1));
            const double gy = (L(x - 1, y + 1) + 2.0 * L(x, y + 1) + L(x + 1, y + 1)) -
                              (L(x - 1, y - 1) + 2.0 * L(x, y - 1) + L(x + 1, y - 1));
            energy += gx * gx + gy * gy;
        }
    }
    return energy;
}

double mean_abs_diff(const FrameBuffer& a, const FrameBuffer& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("mean_abs_diff: shape mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) sum += std::fabs(a.pixels[i] - b.pixels[i]);
    return sum / static_cast<double>(a.pixels.size());
}

bool bit_equal(const FrameBuffer& a, const FrameBuffer& b) {
    return a.same_shape(b) &&
           std::memcmp(a.pixels.data(), b.pixels.data(), a.pixels.size() * sizeof(double)) == 0;
}

Centroid weighted_centroid(const FrameBuffer& frame, const double background[3]) {
    double wsum = 0.0, xsum = 0.0, ysum = 0.0;
    for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x < frame.width; ++x) {
            const double* p = frame.at(x, y);
            const double w = std::fabs(p[0] - background[0]) + std::fabs(p[1] - background[1]) +
                             std::fabs(p[2] - background[2]);
            wsum += w;
            xsum += w * x;
            ysum += w * y;
        }
    }
    if (wsum == 0.0) return {frame.width / 2.0, frame.height / 2.0};
    return {xsum / wsum, ysum / wsum};
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void write_png(const FrameBuffer& frame, const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot open for writing: " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng init failed for " + path);
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng write failed for " + path);
    }

    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(frame.width),
                 static_cast<png_uint_32>(frame.height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<unsigned char> row(static_cast<std::size_t>(frame.width) * 3);
    for (int y = 0; y < frame.height; ++y) {
        for (int x = 0; x < frame.width; ++x) {
            const double* p = frame.at(x, y);
            for (int c = 0; c < 3; ++c) {
                const double v = std::clamp(p[c], 0.0, 1.0);
                row[static_cast<std::size_t>(x) * 3 + c] =
                    static_cast<unsigned char>(std::lround(v * 255.0));
            }
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

FrameBuffer read_png(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open for reading: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng init failed for " + path);
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng read failed for " + path);
    }

    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));

    FrameBuffer frame(w, h);
    std::vector<unsigned char> row(static_cast<std::size_t>(w) * 3);
    for (int y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < w; ++x) {
            double* p = frame.at(x, y);
            for (int c = 0; c < 3; ++c) {
                p[c] = row[static_cast<std::size_t>(x) * 3 + c] / 255.0;
            }
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return frame;
}

}  // namespace camforge
