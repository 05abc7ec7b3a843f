#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace camforge::forge {

enum class ShapeKind { circle, square, triangle, star };

struct ShapeSpec {
    ShapeKind kind = ShapeKind::circle;
    std::array<double, 3> color{1.0, 1.0, 1.0};
    double cx = 0.0;  // pixels
    double cy = 0.0;
    double size = 0.0;  // circle: radius; square: half side; triangle/star: outer radius
    double vx = 0.0;    // pixels / second
    double vy = 0.0;
};

struct SceneSpec2D {
    int width = 512;
    int height = 512;
    std::array<double, 3> background{0.5, 0.5, 0.5};
    std::vector<ShapeSpec> shapes;
    std::uint64_t seed = 0;
};

struct Scene2DParams {
    int width = 512;
    int height = 512;
    int min_shapes = 1;
    int max_shapes = 3;
    double min_size = 24.0;
    double max_size = 64.0;
    double min_speed = 40.0;   // pixels / second
    double max_speed = 220.0;
    bool moving = true;        // temperature scenes set false

    void validate() const;
};

// Per-axis half extent used for boundary reflection and bbox rasterization.
double half_extent(const ShapeSpec& shape);

// Point-in-shape test in canvas coordinates, shape at (cx, cy).
bool contains(const ShapeSpec& shape, double px, double py);

// Deterministic scene from seed; shapes start fully inside the canvas.
SceneSpec2D random_scene_2d(std::uint64_t seed, const Scene2DParams& params);

// Constant-velocity motion with elastic reflection off canvas edges; handles
// any dt (negative included) and multiple bounces via a triangle-wave fold.
// Speed magnitude is preserved.
SceneSpec2D advance(const SceneSpec2D& scene, double dt);

}  // namespace camforge::forge
