#pragma once

#include <string>
#include <vector>

#include "camforge/control.hpp"
#include "camforge/image.hpp"
#include "camforge/scene2d.hpp"

namespace camforge::forge {

enum class Effect { shutter, aperture, temperature };

std::string to_string(Effect effect);
Effect effect_from_string(const std::string& name);

// One condition-aligned training sample: a frame sequence plus the control
// value and the physical quantity it maps to.
struct ClipSample {
    std::vector<FrameBuffer> frames;
    control::SampledCondition condition;
    double physical_value = 0.0;
    std::string unit;
    std::string scene_id;
    std::uint64_t scene_seed = 0;
    Effect effect = Effect::shutter;
};

struct ShutterOpts {
    int subframes = 32;
    double output_fps = 8.0;  // frame timestamps are i / output_fps, independent of c
};

// Rasterize the scene advanced to time t. 4x supersampled, box filtered.
FrameBuffer render_sharp(const SceneSpec2D& scene, double t);

// Mean of `subframes` sharp renders at t + i*exposure/subframes (left
// endpoints). exposure == 0 returns the sharp frame bit-exactly.
FrameBuffer render_motion_blur(const SceneSpec2D& scene, double t, double exposure,
                               int subframes = 32);

// Clip whose only control-dependent factor is the blur strength.
ClipSample render_shutter_clip(const SceneSpec2D& scene, const control::SampledCondition& cond,
                               int n_frames, const control::LogRange& fps_range,
                               const ShutterOpts& opts = {});

}  // namespace camforge::forge
