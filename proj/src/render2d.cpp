#include "camforge/render2d.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace camforge::forge {

std::string to_string(Effect effect) {
    switch (effect) {
        case Effect::shutter: return "shutter";
        case Effect::aperture: return "aperture";
        case Effect::temperature: return "temperature";
    }
    return "shutter";
}

Effect effect_from_string(const std::string& name) {
    if (name == "shutter") return Effect::shutter;
    if (name == "aperture") return Effect::aperture;
    if (name == "temperature") return Effect::temperature;
    throw std::invalid_argument("unknown effect: " + name);
}

namespace {

struct Rect {
    int x0, y0, x1, y1;  // half-open
    bool empty() const { return x0 >= x1 || y0 >= y1; }
};

Rect shape_bbox(const ShapeSpec& s, int w, int h) {
    const double e = half_extent(s) + 1.0;
    Rect r;
    r.x0 = std::max(0, static_cast<int>(std::floor(s.cx - e)));
    r.y0 = std::max(0, static_cast<int>(std::floor(s.cy - e)));
    r.x1 = std::min(w, static_cast<int>(std::ceil(s.cx + e)) + 1);
    r.y1 = std::min(h, static_cast<int>(std::ceil(s.cy + e)) + 1);
    return r;
}

// 2x2 subpixel grid, box filter.
constexpr double kOffsets[4][2] = {{0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}, {0.75, 0.75}};

// Scratch buffers reused across renders; rasterization touches only pixels
// inside shape bounding boxes, everything else stays at the background color.
struct Raster {
    std::vector<double> samples;   // w*h*4*3
    std::vector<std::uint32_t> stamp;  // w*h
    std::vector<int> dirty;        // pixel indices
    std::uint32_t generation = 0;

    void prepare(int w, int h) {
        const std::size_t n = static_cast<std::size_t>(w) * h;
        if (stamp.size() != n) {
            stamp.assign(n, 0);
            samples.resize(n * 12);
            generation = 0;
        }
        ++generation;
        dirty.clear();
    }
};

thread_local Raster tl_raster;

}  // namespace

FrameBuffer render_sharp(const SceneSpec2D& scene, double t) {
    const SceneSpec2D current = (t == 0.0) ? scene : advance(scene, t);
    const int w = current.width;
    const int h = current.height;

    FrameBuffer out(w, h);
    out.fill(current.background[0], current.background[1], current.background[2]);
    if (current.shapes.empty()) return out;

    Raster& rs = tl_raster;
    rs.prepare(w, h);

    for (const ShapeSpec& s : current.shapes) {
        const Rect r = shape_bbox(s, w, h);
        if (r.empty()) continue;
        for (int y = r.y0; y < r.y1; ++y) {
            for (int x = r.x0; x < r.x1; ++x) {
                const std::size_t idx = static_cast<std::size_t>(y) * w + x;
                double* smp = rs.samples.data() + idx * 12;
                if (rs.stamp[idx] != rs.generation) {
                    rs.stamp[idx] = rs.generation;
                    rs.dirty.push_back(static_cast<int>(idx));
                    for (int k = 0; k < 4; ++k) {
                        smp[k * 3 + 0] = current.background[0];
                        smp[k * 3 + 1] = current.background[1];
                        smp[k * 3 + 2] = current.background[2];
                    }
                }
                for (int k = 0; k < 4; ++k) {
                    const double sx = x + kOffsets[k][0];
                    const double sy = y + kOffsets[k][1];
                    if (contains(s, sx, sy)) {
                        smp[k * 3 + 0] = s.color[0];
                        smp[k * 3 + 1] = s.color[1];
                        smp[k * 3 + 2] = s.color[2];
                    }
                }
            }
        }
    }

    for (int idx : rs.dirty) {
        const double* smp = rs.samples.data() + static_cast<std::size_t>(idx) * 12;
        double* px = out.pixels.data() + static_cast<std::size_t>(idx) * 3;
        for (int c = 0; c < 3; ++c) {
            px[c] = (smp[c] + smp[3 + c] + smp[6 + c] + smp[9 + c]) * 0.25;
        }
    }
    return out;
}

FrameBuffer render_motion_blur(const SceneSpec2D& scene, double t, double exposure, int subframes) {
    if (exposure < 0.0) throw std::invalid_argument("render_motion_blur: exposure must be >= 0");
    if (subframes < 1) throw std::invalid_argument("render_motion_blur: subframes must be >= 1");
    if (exposure == 0.0) return render_sharp(scene, t);

    const double step = exposure / subframes;
    FrameBuffer acc = render_sharp(scene, t);
    for (int i = 1; i < subframes; ++i) {
        const FrameBuffer sub = render_sharp(scene, t + i * step);
        for (std::size_t j = 0; j < acc.pixels.size(); ++j) acc.pixels[j] += sub.pixels[j];
    }
    const double inv = 1.0 / subframes;
    for (double& v : acc.pixels) v *= inv;
    return acc;
}

ClipSample render_shutter_clip(const SceneSpec2D& scene, const control::SampledCondition& cond,
                               int n_frames, const control::LogRange& fps_range,
                               const ShutterOpts& opts) {
    if (n_frames < 1) throw std::invalid_argument("render_shutter_clip: n_frames must be >= 1");
    const double exposure = control::map_exposure(cond.c, fps_range);

    ClipSample clip;
    clip.condition = cond;
    clip.physical_value = exposure;
    clip.unit = "s";
    clip.effect = Effect::shutter;
    clip.frames.reserve(static_cast<std::size_t>(n_frames));
    // Exposure windows are centered on the frame timestamps: the mean of the
    // sub-frame times equals t_i for every exposure, so shape centroids stay
    // aligned across the whole control axis.
    const double lead = exposure * (opts.subframes - 1) / (2.0 * opts.subframes);
    for (int i = 0; i < n_frames; ++i) {
        const double t = static_cast<double>(i) / opts.output_fps;
        clip.frames.push_back(render_motion_blur(scene, t - lead, exposure, opts.subframes));
    }
    return clip;
}

}  // namespace camforge::forge
