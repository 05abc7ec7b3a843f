#include "camforge/scene3d.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "camforge/rng.hpp"

namespace camforge::forge {

namespace {

constexpr double kPi = 3.14159265358979323846;

constexpr std::array<std::array<double, 3>, 8> kPalette{{
    {0.85, 0.25, 0.20},
    {0.20, 0.50, 0.85},
    {0.25, 0.70, 0.30},
    {0.90, 0.75, 0.15},
    {0.70, 0.30, 0.75},
    {0.90, 0.50, 0.20},
    {0.20, 0.75, 0.70},
    {0.88, 0.88, 0.88},
}};

// Silhouette coverage test in object-local units (dx, dy in [-1,1] at size 1).
bool silhouette_contains(ObjectKind kind, double nx, double ny) {
    switch (kind) {
        case ObjectKind::cube:
            return std::fabs(nx) <= 0.9 && std::fabs(ny) <= 0.9;
        case ObjectKind::sphere:
            return nx * nx + ny * ny <= 1.0;
        case ObjectKind::cylinder:
            return std::fabs(nx) <= 0.55 && std::fabs(ny) <= 1.0;
        case ObjectKind::cone:
            // apex up, narrow flank
            return ny >= -1.0 && ny <= 1.0 && std::fabs(nx) <= 0.35 * (ny + 1.0);
        case ObjectKind::pyramid:
            // apex up, wide base
            return ny >= -1.0 && ny <= 1.0 && std::fabs(nx) <= 0.48 * (ny + 1.0);
    }
    return false;
}

struct Sprite {
    int x0, y0, x1, y1;            // half-open bbox
    std::vector<double> rgba;      // premultiplied RGB + alpha per pixel

    int w() const { return x1 - x0; }
    int h() const { return y1 - y0; }
};

constexpr double kOffsets[4][2] = {{0.25, 0.25}, {0.75, 0.25}, {0.25, 0.75}, {0.75, 0.75}};

Sprite rasterize_object(const Object3D& obj, const SceneSpec3D& scene) {
    Sprite sp;
    const double e = obj.size + 1.0;
    sp.x0 = std::max(0, static_cast<int>(std::floor(obj.cx - e)));
    sp.y0 = std::max(0, static_cast<int>(std::floor(obj.cy - e)));
    sp.x1 = std::min(scene.width, static_cast<int>(std::ceil(obj.cx + e)) + 1);
    sp.y1 = std::min(scene.height, static_cast<int>(std::ceil(obj.cy + e)) + 1);
    if (sp.x1 < sp.x0) sp.x1 = sp.x0;
    if (sp.y1 < sp.y0) sp.y1 = sp.y0;
    sp.rgba.assign(static_cast<std::size_t>(sp.w()) * sp.h() * 4, 0.0);

    const double lx = std::cos(scene.light_azimuth);
    const double ly = std::sin(scene.light_azimuth);
    for (int y = sp.y0; y < sp.y1; ++y) {
        for (int x = sp.x0; x < sp.x1; ++x) {
            double alpha = 0.0;
            double shade_sum = 0.0;
            for (const auto& off : kOffsets) {
                const double nx = (x + off[0] - obj.cx) / obj.size;
                const double ny = (y + off[1] - obj.cy) / obj.size;
                if (silhouette_contains(obj.kind, nx, ny)) {
                    alpha += 0.25;
                    double shade = 1.0;
                    if (scene.has_light) {
                        shade = 0.8 + 0.2 * (nx * lx + ny * ly);
                    }
                    shade_sum += 0.25 * shade;
                }
            }
            if (alpha > 0.0) {
                double* px = sp.rgba.data() +
                             (static_cast<std::size_t>(y - sp.y0) * sp.w() + (x - sp.x0)) * 4;
                px[0] = obj.color[0] * shade_sum;
                px[1] = obj.color[1] * shade_sum;
                px[2] = obj.color[2] * shade_sum;
                px[3] = alpha;
            }
        }
    }
    return sp;
}

// Disk kernel taps with anti-aliased rim; weights normalized to 1.
struct DiskKernel {
    int radius;                 // integer tap reach
    std::vector<double> weights;  // (2r+1)^2

    explicit DiskKernel(double r) {
        radius = static_cast<int>(std::ceil(r));
        const int n = 2 * radius + 1;
        weights.assign(static_cast<std::size_t>(n) * n, 0.0);
        double sum = 0.0;
        for (int j = -radius; j <= radius; ++j) {
            for (int i = -radius; i <= radius; ++i) {
                const double dist = std::sqrt(static_cast<double>(i * i + j * j));
                const double w = std::clamp(r + 0.5 - dist, 0.0, 1.0);
                weights[static_cast<std::size_t>(j + radius) * n + (i + radius)] = w;
                sum += w;
            }
        }
        for (double& w : weights) w /= sum;
    }
};

void composite_sprite(FrameBuffer& out, const Sprite& sp, double blur_radius) {
    if (sp.w() == 0 || sp.h() == 0) return;
    const DiskKernel kernel(blur_radius);
    const int r = kernel.radius;
    const int n = 2 * r + 1;

    const int ox0 = std::max(0, sp.x0 - r);
    const int oy0 = std::max(0, sp.y0 - r);
    const int ox1 = std::min(out.width, sp.x1 + r);
    const int oy1 = std::min(out.height, sp.y1 + r);

    for (int y = oy0; y < oy1; ++y) {
        for (int x = ox0; x < ox1; ++x) {
            double acc[4] = {0.0, 0.0, 0.0, 0.0};
            for (int j = -r; j <= r; ++j) {
                const int sy = y + j;
                if (sy < sp.y0 || sy >= sp.y1) continue;
                const double* row = sp.rgba.data() +
                                    static_cast<std::size_t>(sy - sp.y0) * sp.w() * 4;
                const double* wrow =
                    kernel.weights.data() + static_cast<std::size_t>(j + r) * n;
                for (int i = -r; i <= r; ++i) {
                    const int sx = x + i;
                    if (sx < sp.x0 || sx >= sp.x1) continue;
                    const double w = wrow[i + r];
                    if (w == 0.0) continue;
                    const double* px = row + static_cast<std::size_t>(sx - sp.x0) * 4;
                    acc[0] += w * px[0];
                    acc[1] += w * px[1];
                    acc[2] += w * px[2];
                    acc[3] += w * px[3];
                }
            }
            if (acc[3] > 0.0) {
                double* dst = out.at(x, y);
                dst[0] = acc[0] + dst[0] * (1.0 - acc[3]);
                dst[1] = acc[1] + dst[1] * (1.0 - acc[3]);
                dst[2] = acc[2] + dst[2] * (1.0 - acc[3]);
            }
        }
    }
}

// Backdrop: wall band above the horizon, ground below. Blur only needs to
// touch the rows within kernel reach of the color boundary.
void paint_background(FrameBuffer& out, const SceneSpec3D& scene, double blur_radius) {
    for (int y = 0; y < out.height; ++y) {
        const auto& c = (y < scene.horizon_y) ? scene.wall_color : scene.ground_color;
        for (int x = 0; x < out.width; ++x) {
            double* px = out.at(x, y);
            px[0] = c[0];
            px[1] = c[1];
            px[2] = c[2];
        }
    }
    if (blur_radius <= 0.0) return;

    const DiskKernel kernel(blur_radius);
    const int r = kernel.radius;
    const int n = 2 * r + 1;
    const int y0 = std::max(0, scene.horizon_y - r - 1);
    const int y1 = std::min(out.height, scene.horizon_y + r + 1);
    auto row_color = [&](int y) -> const std::array<double, 3>& {
        const int yy = std::clamp(y, 0, out.height - 1);
        return (yy < scene.horizon_y) ? scene.wall_color : scene.ground_color;
    };
    for (int y = y0; y < y1; ++y) {
        double acc[3] = {0.0, 0.0, 0.0};
        for (int j = -r; j <= r; ++j) {
            double wsum = 0.0;
            const double* wrow = kernel.weights.data() + static_cast<std::size_t>(j + r) * n;
            for (int i = -r; i <= r; ++i) wsum += wrow[i + r];
            const auto& c = row_color(y + j);
            acc[0] += wsum * c[0];
            acc[1] += wsum * c[1];
            acc[2] += wsum * c[2];
        }
        for (int x = 0; x < out.width; ++x) {
            double* px = out.at(x, y);
            px[0] = acc[0];
            px[1] = acc[1];
            px[2] = acc[2];
        }
    }
}

}  // namespace

void Scene3DParams::validate() const {
    if (width < 16 || height < 16) throw std::invalid_argument("Scene3DParams: canvas too small");
    if (min_objects < 2 || max_objects < min_objects || max_objects > 4) {
        throw std::invalid_argument("Scene3DParams: object count must lie in [2,4]");
    }
    if (!(d_min > 0.0 && d_max > d_min && wall_depth >= d_max)) {
        throw std::invalid_argument("Scene3DParams: need 0 < d_min < d_max <= wall_depth");
    }
}

double coc_radius(double depth, double focus_depth, double f_number, const DofParams& params) {
    const double f = params.focal_length;
    if (depth <= f || focus_depth <= f) {
        throw std::domain_error("coc_radius: depth must exceed the focal length");
    }
    if (f_number <= 0.0) throw std::domain_error("coc_radius: f-number must be positive");
    return params.kappa * (f * f / f_number) * std::fabs(depth - focus_depth) /
           (depth * (focus_depth - f));
}

SceneSpec3D random_scene_3d(std::uint64_t seed, const Scene3DParams& params) {
    params.validate();
    Rng rng(key2(seed, 0x5ce3dULL));

    SceneSpec3D scene;
    scene.width = params.width;
    scene.height = params.height;
    scene.seed = seed;
    scene.wall_depth = params.wall_depth;
    scene.horizon_y = static_cast<int>(0.55 * params.height);
    const double wall_shade = rng.uniform(0.55, 0.7);
    scene.wall_color = {wall_shade, wall_shade, wall_shade + rng.uniform(0.0, 0.04)};
    const double ground_shade = rng.uniform(0.38, 0.5);
    scene.ground_color = {ground_shade + rng.uniform(0.0, 0.04), ground_shade,
                          ground_shade - rng.uniform(0.0, 0.04)};
    scene.has_light = rng.uniform() < 0.5;
    scene.light_azimuth = rng.uniform(0.0, 2.0 * kPi);

    const int count = rng.uniform_int(params.min_objects, params.max_objects);
    const double seg = (params.d_max - params.d_min) / count;
    scene.objects.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        Object3D obj;
        obj.kind = static_cast<ObjectKind>(rng.uniform_int(0, 4));
        obj.color = kPalette[rng.uniform_u64(kPalette.size())];
        // One object per depth segment keeps depths pairwise distinct.
        obj.depth = params.d_min + seg * (i + rng.uniform(0.15, 0.85));
        const double apparent = rng.uniform(0.18, 0.3) * std::min(params.width, params.height);
        obj.size = apparent * params.d_min / obj.depth;
        const double margin = obj.size + 2.0;
        const double slot = params.width / static_cast<double>(count);
        obj.cx = std::clamp(slot * (i + 0.5) + rng.uniform(-0.3, 0.3) * slot, margin,
                            params.width - margin);
        const double ground_line =
            scene.horizon_y + (params.height - scene.horizon_y) * 0.8 * (params.d_min / obj.depth);
        obj.cy = std::clamp(ground_line - obj.size * 0.4, margin, params.height - margin);
        scene.objects.push_back(obj);
    }
    scene.focus_depth = scene.objects.front().depth;
    for (const auto& obj : scene.objects) {
        scene.focus_depth = std::min(scene.focus_depth, obj.depth);
    }
    return scene;
}

FrameBuffer render_dof(const SceneSpec3D& scene, double c, const control::LogRange& fstop_range,
                       const DofParams& params) {
    if (scene.objects.size() < 2 || scene.objects.size() > 4) {
        throw std::invalid_argument("render_dof: scene needs 2..4 objects");
    }
    const double f_number = control::map_log_centered(c, fstop_range);

    FrameBuffer out(scene.width, scene.height);
    paint_background(out, scene, coc_radius(scene.wall_depth, scene.focus_depth, f_number, params));

    std::vector<const Object3D*> order;
    order.reserve(scene.objects.size());
    for (const auto& obj : scene.objects) order.push_back(&obj);
    std::sort(order.begin(), order.end(),
              [](const Object3D* a, const Object3D* b) { return a->depth > b->depth; });

    for (const Object3D* obj : order) {
        const Sprite sp = rasterize_object(*obj, scene);
        composite_sprite(out, sp, coc_radius(obj->depth, scene.focus_depth, f_number, params));
    }
    return out;
}

std::vector<std::uint8_t> focus_mask(const SceneSpec3D& scene) {
    const Object3D* focus = nullptr;
    for (const auto& obj : scene.objects) {
        if (obj.depth == scene.focus_depth) focus = &obj;
    }
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(scene.width) * scene.height, 0);
    if (!focus) return mask;
    const Sprite sp = rasterize_object(*focus, scene);
    for (int y = sp.y0; y < sp.y1; ++y) {
        for (int x = sp.x0; x < sp.x1; ++x) {
            const double a =
                sp.rgba[(static_cast<std::size_t>(y - sp.y0) * sp.w() + (x - sp.x0)) * 4 + 3];
            if (a >= 1.0) mask[static_cast<std::size_t>(y) * scene.width + x] = 1;
        }
    }
    return mask;
}

}  // namespace camforge::forge
