#include "camforge/run_config.hpp"

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "camforge/errors.hpp"

namespace camforge::cli {

void RunConfig::validate() const {
    plan.validate();
    model.validate();
    if (scenes_per_layer < 1) throw std::invalid_argument("config: scenes_per_layer >= 1");
    if (train.batch_size < 1) throw std::invalid_argument("config: batch_size >= 1");
    if (train.steps < 0) throw std::invalid_argument("config: steps >= 0");
    if (train.fep_cadence < 0) throw std::invalid_argument("config: fep_cadence >= 0");
    if (!train.fep_prompts_file.empty() && !std::filesystem::exists(train.fep_prompts_file)) {
        throw IoError("config: prompts file not found: " + train.fep_prompts_file);
    }
    if (!dataset_dir.empty() &&
        !std::filesystem::exists(std::filesystem::path(dataset_dir) / "manifest.json")) {
        throw IoError("config: no manifest.json under dataset_dir: " + dataset_dir);
    }
}

std::string RunConfig::to_json() const {
    nlohmann::json j;
    j["run_name"] = run_name;
    j["seed"] = seed;
    j["effect"] = forge::to_string(effect);
    j["plan"] = {{"layer_counts", plan.layer_counts}, {"seed", plan.rng_seed}};
    j["scenes_per_layer"] = scenes_per_layer;

    nlohmann::json f;
    f["canvas"] = forge_params.canvas;
    f["frames_per_clip"] = forge_params.frames_per_clip;
    f["subframes"] = forge_params.shutter.subframes;
    f["output_fps"] = forge_params.shutter.output_fps;
    f["fps_range"] = {forge_params.fps_range.lo, forge_params.fps_range.hi};
    f["fstop_range"] = {forge_params.fstop_range.lo, forge_params.fstop_range.hi};
    f["kelvin_range"] = {forge_params.kelvin_range.k_lo, forge_params.kelvin_range.k_hi};
    f["kelvin_ref"] = forge_params.kelvin_range.k_ref;
    f["preserve_luma"] = forge_params.preserve_luma;
    f["warm_at_minus_one"] = forge_params.warm_at_minus_one;
    f["focal_length"] = forge_params.dof.focal_length;
    f["kappa"] = forge_params.dof.kappa;
    j["forge"] = f;

    j["model"] = nlohmann::json::parse(model.to_json());

    nlohmann::json t;
    t["steps"] = train.steps;
    t["batch_size"] = train.batch_size;
    t["lr"] = train.lr;
    t["warmup"] = train.warmup;
    t["betas"] = {train.beta1, train.beta2};
    t["weight_decay"] = train.weight_decay;
    t["eps"] = train.eps;
    t["train_lora"] = train.train_lora;
    t["fep_cadence"] = train.fep_cadence;
    t["fep_prompts_file"] = train.fep_prompts_file;
    t["fep_prompt_count"] = train.fep_prompt_count;
    t["fep_latent_seed"] = train.fep_latent_seed;
    t["fep_baseline_seeds"] = train.fep_baseline_seeds;
    t["probe_condition"] = train.probe_condition;
    t["latent_frames"] = train.latent_frames;
    t["checkpoint_cadence"] = train.checkpoint_cadence;
    t["pretrain_steps"] = train.pretrain_steps;
    t["pretrain_lr"] = train.pretrain_lr;
    t["pretrain_scenes"] = train.pretrain_scenes;
    j["train"] = t;

    j["dataset_dir"] = dataset_dir;
    j["runs_dir"] = runs_dir;
    return j.dump(2) + "\n";
}

RunConfig RunConfig::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    RunConfig cfg;
    cfg.run_name = j.value("run_name", cfg.run_name);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.effect = forge::effect_from_string(j.value("effect", std::string("shutter")));
    if (j.contains("plan")) {
        cfg.plan.layer_counts = j["plan"].value("layer_counts", cfg.plan.layer_counts);
        cfg.plan.rng_seed = j["plan"].value("seed", cfg.seed);
    } else {
        cfg.plan.rng_seed = cfg.seed;
    }
    cfg.scenes_per_layer = j.value("scenes_per_layer", cfg.scenes_per_layer);

    if (j.contains("forge")) {
        const auto& f = j["forge"];
        auto& fp = cfg.forge_params;
        fp.canvas = f.value("canvas", fp.canvas);
        fp.frames_per_clip = f.value("frames_per_clip", fp.frames_per_clip);
        fp.shutter.subframes = f.value("subframes", fp.shutter.subframes);
        fp.shutter.output_fps = f.value("output_fps", fp.shutter.output_fps);
        if (f.contains("fps_range")) {
            fp.fps_range = {f["fps_range"][0].get<double>(), f["fps_range"][1].get<double>()};
        }
        if (f.contains("fstop_range")) {
            fp.fstop_range = {f["fstop_range"][0].get<double>(),
                              f["fstop_range"][1].get<double>()};
        }
        if (f.contains("kelvin_range")) {
            fp.kelvin_range.k_lo = f["kelvin_range"][0].get<double>();
            fp.kelvin_range.k_hi = f["kelvin_range"][1].get<double>();
        }
        fp.kelvin_range.k_ref = f.value("kelvin_ref", fp.kelvin_range.k_ref);
        fp.preserve_luma = f.value("preserve_luma", fp.preserve_luma);
        fp.warm_at_minus_one = f.value("warm_at_minus_one", fp.warm_at_minus_one);
        fp.dof.focal_length = f.value("focal_length", fp.dof.focal_length);
        fp.dof.kappa = f.value("kappa", fp.dof.kappa);
    }

    if (j.contains("model")) cfg.model = model::ModelConfig::from_json(j["model"].dump());

    if (j.contains("train")) {
        const auto& t = j["train"];
        auto& tr = cfg.train;
        tr.steps = t.value("steps", tr.steps);
        tr.batch_size = t.value("batch_size", tr.batch_size);
        tr.lr = t.value("lr", tr.lr);
        tr.warmup = t.value("warmup", tr.warmup);
        if (t.contains("betas")) {
            tr.beta1 = t["betas"][0].get<double>();
            tr.beta2 = t["betas"][1].get<double>();
        }
        tr.weight_decay = t.value("weight_decay", tr.weight_decay);
        tr.eps = t.value("eps", tr.eps);
        tr.train_lora = t.value("train_lora", tr.train_lora);
        tr.fep_cadence = t.value("fep_cadence", tr.fep_cadence);
        tr.fep_prompts_file = t.value("fep_prompts_file", tr.fep_prompts_file);
        tr.fep_prompt_count = t.value("fep_prompt_count", tr.fep_prompt_count);
        tr.fep_latent_seed = t.value("fep_latent_seed", tr.fep_latent_seed);
        tr.fep_baseline_seeds = t.value("fep_baseline_seeds", tr.fep_baseline_seeds);
        tr.probe_condition = t.value("probe_condition", tr.probe_condition);
        tr.latent_frames = t.value("latent_frames", tr.latent_frames);
        tr.checkpoint_cadence = t.value("checkpoint_cadence", tr.checkpoint_cadence);
        tr.pretrain_steps = t.value("pretrain_steps", tr.pretrain_steps);
        tr.pretrain_lr = t.value("pretrain_lr", tr.pretrain_lr);
        tr.pretrain_scenes = t.value("pretrain_scenes", tr.pretrain_scenes);
    }

    cfg.dataset_dir = j.value("dataset_dir", cfg.dataset_dir);
    cfg.runs_dir = j.value("runs_dir", cfg.runs_dir);
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json(text);
}

void RunConfig::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write config: " + path);
    out << to_json();
}

}  // namespace camforge::cli
