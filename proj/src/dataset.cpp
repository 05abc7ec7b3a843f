#include "camforge/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "camforge/errors.hpp"
#include "camforge/rng.hpp"
#include "camforge/white_balance.hpp"

namespace fs = std::filesystem;

namespace camforge::forge {

namespace {

constexpr const char* kGeneratorVersion = "1.0.0";

std::string scene_label(int layer, int scene_index) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "layer%d_scene%d", layer, scene_index);
    return buf;
}

Scene2DParams shutter_scene_params(const ForgeParams& p) {
    Scene2DParams sp;
    sp.width = sp.height = p.canvas;
    const double scale = p.canvas / 512.0;
    sp.min_size = 24.0 * scale;
    sp.max_size = 64.0 * scale;
    sp.min_speed = 40.0 * scale;
    sp.max_speed = 220.0 * scale;
    return sp;
}

Scene2DParams temperature_scene_params(const ForgeParams& p) {
    Scene2DParams sp = shutter_scene_params(p);
    sp.min_shapes = 2;
    sp.max_shapes = 3;
    sp.moving = false;
    return sp;
}

Scene3DParams aperture_scene_params(const ForgeParams& p) {
    Scene3DParams sp;
    sp.width = sp.height = p.canvas;
    return sp;
}

}  // namespace

std::uint64_t scene_seed(std::uint64_t plan_seed, Effect effect, int layer, int scene_index) {
    return key3(plan_seed, static_cast<std::uint64_t>(effect) + 0x0e11ec7ULL,
                key2(static_cast<std::uint64_t>(layer), static_cast<std::uint64_t>(scene_index)));
}

void forge_each(Effect effect, const control::PyramidPlan& plan, int scenes_per_layer,
                const ForgeParams& params, const std::function<void(ClipSample&&)>& sink) {
    if (scenes_per_layer < 1) throw std::invalid_argument("forge_each: scenes_per_layer >= 1");
    const auto samples = control::pyramid_sample(plan);

    std::map<int, std::vector<control::SampledCondition>> by_layer;
    for (const auto& s : samples) by_layer[s.layer_index].push_back(s);

    for (const auto& [layer, conditions] : by_layer) {
        for (int si = 0; si < scenes_per_layer; ++si) {
            const std::uint64_t seed = scene_seed(plan.rng_seed, effect, layer, si);
            const std::string label = scene_label(layer, si);

            if (effect == Effect::shutter) {
                const SceneSpec2D scene = random_scene_2d(seed, shutter_scene_params(params));
                for (const auto& cond : conditions) {
                    ClipSample clip = render_shutter_clip(scene, cond, params.frames_per_clip,
                                                          params.fps_range, params.shutter);
                    clip.scene_id = label;
                    clip.scene_seed = seed;
                    sink(std::move(clip));
                }
            } else if (effect == Effect::aperture) {
                const SceneSpec3D scene = random_scene_3d(seed, aperture_scene_params(params));
                for (const auto& cond : conditions) {
                    ClipSample clip;
                    clip.condition = cond;
                    clip.effect = Effect::aperture;
                    clip.scene_id = label;
                    clip.scene_seed = seed;
                    clip.physical_value = control::map_log_centered(cond.c, params.fstop_range);
                    clip.unit = "f-number";
                    clip.frames.push_back(
                        render_dof(scene, cond.c, params.fstop_range, params.dof));
                    sink(std::move(clip));
                }
            } else {
                const SceneSpec2D scene = random_scene_2d(seed, temperature_scene_params(params));
                const FrameBuffer base = render_sharp(scene, 0.0);
                for (const auto& cond : conditions) {
                    const double c_eff = params.warm_at_minus_one ? cond.c : -cond.c;
                    const double kelvin = control::map_kelvin(c_eff, params.kelvin_range);
                    ClipSample clip;
                    clip.condition = cond;
                    clip.effect = Effect::temperature;
                    clip.scene_id = label;
                    clip.scene_seed = seed;
                    clip.physical_value = kelvin;
                    clip.unit = "K";
                    clip.frames.push_back(apply_white_balance(base, kelvin, params.kelvin_range,
                                                              params.preserve_luma));
                    sink(std::move(clip));
                }
            }
        }
    }
}

std::vector<ClipSample> forge_clips(Effect effect, const control::PyramidPlan& plan,
                                    int scenes_per_layer, const ForgeParams& params) {
    std::vector<ClipSample> clips;
    forge_each(effect, plan, scenes_per_layer, params,
               [&](ClipSample&& clip) { clips.push_back(std::move(clip)); });
    return clips;
}

std::string DatasetManifest::to_json() const {
    nlohmann::json j;
    j["effect"] = to_string(effect);
    j["generator_version"] = generator_version;
    j["scenes"] = scenes;
    nlohmann::json entries_json = nlohmann::json::array();
    for (const auto& e : entries) {
        nlohmann::json ej;
        ej["scene_id"] = e.scene_id;
        ej["layer"] = e.layer;
        ej["bin"] = e.bin;
        ej["c"] = e.c;
        ej["physical_value"] = e.physical_value;
        ej["unit"] = e.unit;
        ej["paths"] = e.paths;
        ej["n_frames"] = e.n_frames;
        ej["seed"] = e.seed;
        entries_json.push_back(ej);
    }
    j["entries"] = entries_json;
    return j.dump(2) + "\n";
}

DatasetManifest DatasetManifest::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    DatasetManifest m;
    m.effect = effect_from_string(j.at("effect").get<std::string>());
    m.generator_version = j.at("generator_version").get<std::string>();
    m.scenes = j.at("scenes").get<std::vector<std::uint64_t>>();
    for (const auto& ej : j.at("entries")) {
        ManifestEntry e;
        e.scene_id = ej.at("scene_id").get<std::string>();
        e.layer = ej.at("layer").get<int>();
        e.bin = ej.value("bin", 0);
        e.c = ej.at("c").get<double>();
        e.physical_value = ej.at("physical_value").get<double>();
        e.unit = ej.at("unit").get<std::string>();
        e.paths = ej.at("paths").get<std::vector<std::string>>();
        e.n_frames = ej.at("n_frames").get<int>();
        e.seed = ej.at("seed").get<std::uint64_t>();
        m.entries.push_back(std::move(e));
    }
    return m;
}

void DatasetManifest::write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write manifest: " + path);
    out << to_json();
    if (!out) throw IoError("manifest write failed: " + path);
}

DatasetManifest DatasetManifest::read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read manifest: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json(text);
}

DatasetManifest build_dataset(Effect effect, const control::PyramidPlan& plan,
                              int scenes_per_layer, const std::string& out_dir,
                              const ForgeParams& params) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + out_dir);

    DatasetManifest manifest;
    manifest.effect = effect;
    manifest.generator_version = kGeneratorVersion;
    for (std::size_t layer = 0; layer < plan.layer_counts.size(); ++layer) {
        for (int si = 0; si < scenes_per_layer; ++si) {
            manifest.scenes.push_back(
                scene_seed(plan.rng_seed, effect, static_cast<int>(layer), si));
        }
    }

    forge_each(effect, plan, scenes_per_layer, params, [&](ClipSample&& clip) {
        char bin_label[32];
        std::snprintf(bin_label, sizeof(bin_label), "bin%02d", clip.condition.bin_index);
        const fs::path entry_rel = fs::path(clip.scene_id) / bin_label;
        const fs::path entry_dir = fs::path(out_dir) / entry_rel;
        fs::create_directories(entry_dir, ec);
        if (ec) throw IoError("cannot create entry directory: " + entry_dir.string());

        ManifestEntry entry;
        entry.scene_id = clip.scene_id;
        entry.layer = clip.condition.layer_index;
        entry.bin = clip.condition.bin_index;
        entry.c = clip.condition.c;
        entry.physical_value = clip.physical_value;
        entry.unit = clip.unit;
        entry.n_frames = static_cast<int>(clip.frames.size());
        entry.seed = clip.scene_seed;

        for (std::size_t fi = 0; fi < clip.frames.size(); ++fi) {
            char name[32];
            std::snprintf(name, sizeof(name), "frame_%04d.png", static_cast<int>(fi));
            const fs::path rel = entry_rel / name;
            write_png(clip.frames[fi], (fs::path(out_dir) / rel).string());
            entry.paths.push_back(rel.generic_string());
        }
        manifest.entries.push_back(std::move(entry));
    });

    manifest.write((fs::path(out_dir) / "manifest.json").string());
    return manifest;
}

std::vector<FrameBuffer> load_entry_frames(const std::string& manifest_path,
                                           const ManifestEntry& entry) {
    const fs::path base = fs::path(manifest_path).parent_path();
    std::vector<FrameBuffer> frames;
    frames.reserve(entry.paths.size());
    for (const auto& rel : entry.paths) {
        frames.push_back(read_png((base / rel).string()));
    }
    return frames;
}

ClipSample noise_texture_clip(std::uint64_t seed, const control::SampledCondition& cond,
                              int n_frames, int width, int height, double temporal_mix) {
    ClipSample clip;
    clip.condition = cond;
    clip.effect = Effect::shutter;
    clip.physical_value = 0.0;
    clip.unit = "";
    clip.scene_id = "noise" + std::to_string(seed);
    clip.scene_seed = seed;

    // One high-entropy "scene": a static multi-scale colored noise field (tint
    // + coarse and mid blocks + grain) shared by every condition, with a small
    // per-frame deviation. Appearance stays coherent across the control axis,
    // the way consecutive accumulation windows of one real clip would.
    Rng tint_rng(key2(seed, 0x7117ULL));
    const double tint[3] = {tint_rng.uniform(0.15, 0.85), tint_rng.uniform(0.15, 0.85),
                            tint_rng.uniform(0.15, 0.85)};
    constexpr int kCoarse = 4;
    constexpr int kMid = 16;
    Rng base_rng(key2(seed, 0xba5eULL));
    std::vector<double> coarse(static_cast<std::size_t>(kCoarse) * kCoarse * 3);
    for (double& v : coarse) v = base_rng.uniform();
    std::vector<double> mid(static_cast<std::size_t>(kMid) * kMid * 3);
    for (double& v : mid) v = base_rng.uniform();

    for (int fi = 0; fi < n_frames; ++fi) {
        const std::uint64_t stream_frame =
            static_cast<std::uint64_t>(cond.bin_index) * static_cast<std::uint64_t>(n_frames) +
            static_cast<std::uint64_t>(fi);
        FrameBuffer frame(width, height);
        Rng drift_rng(key3(seed, 0x401feULL, stream_frame));
        std::vector<double> dev(static_cast<std::size_t>(kMid) * kMid * 3);
        for (double& v : dev) v = drift_rng.uniform();

        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                const int cx = x * kCoarse / width;
                const int cy = y * kCoarse / height;
                const int mx = x * kMid / width;
                const int my = y * kMid / height;
                const std::size_t mi = (static_cast<std::size_t>(my) * kMid + mx) * 3;
                const double* cc =
                    coarse.data() + (static_cast<std::size_t>(cy) * kCoarse + cx) * 3;
                double* px = frame.at(x, y);
                const std::uint64_t bits = key3(key2(seed, 0xf19eULL),
                                                key2(stream_frame,
                                                     static_cast<std::uint64_t>(y)),
                                                static_cast<std::uint64_t>(x));
                for (int c = 0; c < 3; ++c) {
                    const double fine = unit_open(mix64(bits + static_cast<std::uint64_t>(c)));
                    const double station = 0.4 * tint[c] + 0.3 * cc[c] + 0.3 * mid[mi + c];
                    const double moving = 0.6 * dev[mi + c] + 0.4 * fine;
                    px[c] = std::clamp((1.0 - temporal_mix) * station + temporal_mix * moving,
                                       0.0, 1.0);
                }
            }
        }
        clip.frames.push_back(std::move(frame));
    }
    return clip;
}

}  // namespace camforge::forge
