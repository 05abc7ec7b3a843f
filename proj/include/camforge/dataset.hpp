#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "camforge/control.hpp"
#include "camforge/render2d.hpp"
#include "camforge/scene2d.hpp"
#include "camforge/scene3d.hpp"

namespace camforge::forge {

struct ForgeParams {
    int canvas = 512;
    int frames_per_clip = 16;     // shutter clips; aperture/temperature are single-frame
    ShutterOpts shutter;
    control::LogRange fps_range{4.0, 256.0};
    control::LogRange fstop_range{1.2, 16.0};
    control::KelvinRange kelvin_range{2000.0, 12000.0, 6500.0};
    bool preserve_luma = true;
    bool warm_at_minus_one = true;  // c = -1 maps to the low-Kelvin (warm) end
    DofParams dof;
    bool write_raw = false;  // additionally persist float frames per entry
};

struct ManifestEntry {
    std::string scene_id;
    int layer = 0;
    int bin = 0;
    double c = 0.0;
    double physical_value = 0.0;
    std::string unit;
    std::vector<std::string> paths;  // relative to the manifest directory
    int n_frames = 0;
    std::uint64_t seed = 0;
};

struct DatasetManifest {
    Effect effect = Effect::shutter;
    std::string generator_version;
    std::vector<std::uint64_t> scenes;
    std::vector<ManifestEntry> entries;

    std::string to_json() const;
    static DatasetManifest from_json(const std::string& text);
    void write(const std::string& path) const;
    static DatasetManifest read(const std::string& path);
};

// Deterministic scene seed for (plan seed, effect, layer, scene slot).
std::uint64_t scene_seed(std::uint64_t plan_seed, Effect effect, int layer, int scene_index);

// Generates every (scene, condition) sample of the pyramid schedule and hands
// each finished clip to `sink`. Scenes are fresh per layer; within a layer all
// of its conditions share the scene geometry. Streaming keeps memory flat.
void forge_each(Effect effect, const control::PyramidPlan& plan, int scenes_per_layer,
                const ForgeParams& params, const std::function<void(ClipSample&&)>& sink);

// Convenience collector for desk-scale configs.
std::vector<ClipSample> forge_clips(Effect effect, const control::PyramidPlan& plan,
                                    int scenes_per_layer, const ForgeParams& params);

// Renders the full dataset under out_dir (PNG sequences per entry) and writes
// out_dir/manifest.json. Default plan with 6 scenes per layer yields 150 entries.
DatasetManifest build_dataset(Effect effect, const control::PyramidPlan& plan,
                              int scenes_per_layer, const std::string& out_dir,
                              const ForgeParams& params);

// Reload the frames of one manifest entry.
std::vector<FrameBuffer> load_entry_frames(const std::string& manifest_path,
                                           const ManifestEntry& entry);

// High-entropy multi-scale value-noise clip; the "complex data" stand-in for
// the photorealistic ablation at desk scale. A tinted static noise field is
// shared by all conditions; `temporal_mix` controls the share of per-window
// independent structure (content entangled with the condition axis).
ClipSample noise_texture_clip(std::uint64_t seed, const control::SampledCondition& cond,
                              int n_frames, int width, int height, double temporal_mix = 0.35);

}  // namespace camforge::forge
