#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "camforge/control.hpp"
#include "camforge/image.hpp"

namespace camforge::forge {

enum class ObjectKind { cube, sphere, cylinder, cone, pyramid };

struct Object3D {
    ObjectKind kind = ObjectKind::cube;
    std::array<double, 3> color{1.0, 1.0, 1.0};
    double depth = 1.0;  // meters from the camera
    double cx = 0.0;     // screen position, pixels
    double cy = 0.0;
    double size = 0.0;   // screen half extent, pixels
};

struct SceneSpec3D {
    int width = 512;
    int height = 512;
    std::vector<Object3D> objects;  // 2..4, pairwise distinct depths
    double focus_depth = 0.0;       // defaults to the nearest object
    double wall_depth = 0.0;        // backdrop plane behind every object
    std::array<double, 3> wall_color{0.62, 0.62, 0.64};
    std::array<double, 3> ground_color{0.45, 0.44, 0.42};
    int horizon_y = 0;
    bool has_light = false;
    double light_azimuth = 0.0;  // radians
    std::uint64_t seed = 0;
};

struct Scene3DParams {
    int width = 512;
    int height = 512;
    int min_objects = 2;
    int max_objects = 4;
    double d_min = 1.5;   // meters
    double d_max = 10.0;
    double wall_depth = 12.0;

    void validate() const;
};

struct DofParams {
    double focal_length = 0.05;  // meters (50 mm equivalent)
    double kappa = 9000.0;       // pixels of blur radius per meter of CoC diameter proxy
};

// Thin-lens circle-of-confusion radius in pixels:
//   r = kappa * (f^2 / N) * |d - d_f| / (d * (d_f - f))
// Zero exactly at d == d_f. Throws std::domain_error when d <= f or d_f <= f.
double coc_radius(double depth, double focus_depth, double f_number, const DofParams& params);

SceneSpec3D random_scene_3d(std::uint64_t seed, const Scene3DParams& params);

// Back-to-front composite of depth layers, each blurred with a disk kernel of
// its CoC radius. Geometry, colors and light are independent of c; only the
// f-number N = map_log_centered(c, fstop_range) varies.
FrameBuffer render_dof(const SceneSpec3D& scene, double c, const control::LogRange& fstop_range,
                       const DofParams& params = {});

// 1 where the focus object fully covers the pixel at zero blur; the region
// whose pixels are aperture-invariant.
std::vector<std::uint8_t> focus_mask(const SceneSpec3D& scene);

}  // namespace camforge::forge
