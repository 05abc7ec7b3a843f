#include "camforge/scene2d.hpp"

#include <cmath>
#include <stdexcept>

#include "camforge/rng.hpp"

namespace camforge::forge {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Vivid palette; scenes draw colors from it so shapes stay distinguishable
// from the muted backgrounds.
constexpr std::array<std::array<double, 3>, 8> kPalette{{
    {0.90, 0.15, 0.15},
    {0.15, 0.60, 0.90},
    {0.20, 0.75, 0.25},
    {0.95, 0.80, 0.10},
    {0.80, 0.25, 0.80},
    {0.95, 0.50, 0.10},
    {0.10, 0.80, 0.75},
    {0.95, 0.95, 0.95},
}};

// Reflect an unfolded coordinate into [lo, hi]; flips `dir` once per fold.
double fold(double u, double lo, double hi, double& dir) {
    const double span = hi - lo;
    if (span <= 0.0) return lo;  // degenerate: shape as wide as canvas
    double y = u - lo;
    double m = std::floor(y / span);
    double frac = y - m * span;
    const long long parity = static_cast<long long>(m);
    if (parity % 2 == 0) {
        return lo + frac;
    }
    dir = -dir;
    return hi - frac;
}

bool point_in_polygon(const std::vector<std::array<double, 2>>& poly, double px, double py) {
    bool inside = false;
    std::size_t j = poly.size() - 1;
    for (std::size_t i = 0; i < poly.size(); j = i++) {
        const bool crosses = (poly[i][1] > py) != (poly[j][1] > py);
        if (crosses) {
            const double t = (py - poly[i][1]) / (poly[j][1] - poly[i][1]);
            const double xint = poly[i][0] + t * (poly[j][0] - poly[i][0]);
            if (px < xint) inside = !inside;
        }
    }
    return inside;
}

std::vector<std::array<double, 2>> triangle_points(const ShapeSpec& s) {
    std::vector<std::array<double, 2>> pts(3);
    for (int i = 0; i < 3; ++i) {
        const double a = -kPi / 2.0 + 2.0 * kPi * i / 3.0;
        pts[static_cast<std::size_t>(i)] = {s.cx + s.size * std::cos(a), s.cy + s.size * std::sin(a)};
    }
    return pts;
}

std::vector<std::array<double, 2>> star_points(const ShapeSpec& s) {
    std::vector<std::array<double, 2>> pts(10);
    const double inner = 0.4 * s.size;
    for (int i = 0; i < 10; ++i) {
        const double r = (i % 2 == 0) ? s.size : inner;
        const double a = -kPi / 2.0 + kPi * i / 5.0;
        pts[static_cast<std::size_t>(i)] = {s.cx + r * std::cos(a), s.cy + r * std::sin(a)};
    }
    return pts;
}

}  // namespace

void Scene2DParams::validate() const {
    if (width < 8 || height < 8) throw std::invalid_argument("Scene2DParams: canvas too small");
    if (min_shapes < 1 || max_shapes < min_shapes) {
        throw std::invalid_argument("Scene2DParams: bad shape count range");
    }
    if (!(min_size > 0.0 && max_size >= min_size)) {
        throw std::invalid_argument("Scene2DParams: bad size range");
    }
    if (!(min_speed >= 0.0 && max_speed >= min_speed)) {
        throw std::invalid_argument("Scene2DParams: bad speed range");
    }
    if (max_size * 2.0 >= std::min(width, height)) {
        throw std::invalid_argument("Scene2DParams: max_size does not fit the canvas");
    }
}

double half_extent(const ShapeSpec& shape) {
    // square's size is the half side already; the other kinds use a radius.
    return shape.size;
}

bool contains(const ShapeSpec& shape, double px, double py) {
    const double dx = px - shape.cx;
    const double dy = py - shape.cy;
    switch (shape.kind) {
        case ShapeKind::circle:
            return dx * dx + dy * dy <= shape.size * shape.size;
        case ShapeKind::square:
            return std::fabs(dx) <= shape.size && std::fabs(dy) <= shape.size;
        case ShapeKind::triangle:
            return point_in_polygon(triangle_points(shape), px, py);
        case ShapeKind::star:
            return point_in_polygon(star_points(shape), px, py);
    }
    return false;
}

SceneSpec2D random_scene_2d(std::uint64_t seed, const Scene2DParams& params) {
    params.validate();
    Rng rng(key2(seed, 0x5ce2eULL));

    SceneSpec2D scene;
    scene.width = params.width;
    scene.height = params.height;
    scene.seed = seed;
    const double bg = rng.uniform(0.25, 0.75);
    const double tint = rng.uniform(-0.05, 0.05);
    scene.background = {bg + tint, bg, bg - tint};

    const int count = rng.uniform_int(params.min_shapes, params.max_shapes);
    scene.shapes.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        ShapeSpec s;
        s.kind = static_cast<ShapeKind>(rng.uniform_int(0, 3));
        s.color = kPalette[rng.uniform_u64(kPalette.size())];
        s.size = rng.uniform(params.min_size, params.max_size);
        const double h = half_extent(s);
        s.cx = rng.uniform(h, params.width - h);
        s.cy = rng.uniform(h, params.height - h);
        if (params.moving) {
            const double speed = rng.uniform(params.min_speed, params.max_speed);
            const double angle = rng.uniform(0.0, 2.0 * kPi);
            s.vx = speed * std::cos(angle);
            s.vy = speed * std::sin(angle);
        }
        scene.shapes.push_back(s);
    }
    return scene;
}

SceneSpec2D advance(const SceneSpec2D& scene, double dt) {
    SceneSpec2D out = scene;
    for (ShapeSpec& s : out.shapes) {
        const double h = half_extent(s);
        const double ux = s.cx + s.vx * dt;
        const double uy = s.cy + s.vy * dt;
        // Fast path: no edge crossed, exact linear update.
        if (ux >= h && ux <= scene.width - h) {
            s.cx = ux;
        } else {
            double dir = 1.0;
            s.cx = fold(ux, h, scene.width - h, dir);
            s.vx *= dir;
        }
        if (uy >= h && uy <= scene.height - h) {
            s.cy = uy;
        } else {
            double dir = 1.0;
            s.cy = fold(uy, h, scene.height - h, dir);
            s.vy *= dir;
        }
    }
    return out;
}

}  // namespace camforge::forge
