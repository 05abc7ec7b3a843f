#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "camforge/control.hpp"
#include "camforge/dataset.hpp"
#include "camforge/model.hpp"

namespace camforge::cli {

struct TrainSettings {
    std::int64_t steps = 200;
    int batch_size = 4;
    double lr = 2e-5;
    int warmup = 100;
    double beta1 = 0.9;
    double beta2 = 0.99;
    double weight_decay = 0.01;
    double eps = 1e-8;
    bool train_lora = true;  // false: adapter-only ablation
    int fep_cadence = 50;    // steps between probes; 0 disables
    std::string fep_prompts_file;  // empty: bundled prompt set
    int fep_prompt_count = 16;     // prompts used per probe (head of the list)
    std::uint64_t fep_latent_seed = 7;
    std::vector<std::uint64_t> fep_baseline_seeds{7, 11};
    double probe_condition = 0.0;
    int latent_frames = 4;
    int checkpoint_cadence = 0;  // 0: only the final checkpoint
    int pretrain_steps = 0;      // 0: adapt the randomly initialized backbone
    double pretrain_lr = 2e-3;
    int pretrain_scenes = 16;
};

struct RunConfig {
    std::string run_name = "run";
    std::uint64_t seed = 1;
    forge::Effect effect = forge::Effect::shutter;
    control::PyramidPlan plan;
    int scenes_per_layer = 6;
    forge::ForgeParams forge_params;
    model::ModelConfig model;
    TrainSettings train;
    std::string dataset_dir;  // when set, training loads this manifest instead of forging
    std::string runs_dir = "runs";

    void validate() const;
    std::string to_json() const;
    static RunConfig from_json(const std::string& text);
    static RunConfig load(const std::string& path);
    void save(const std::string& path) const;
};

}  // namespace camforge::cli
