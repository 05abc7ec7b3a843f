#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "camforge/latent.hpp"
#include "camforge/linalg.hpp"
#include "camforge/model.hpp"
#include "camforge/render2d.hpp"

namespace camforge::model {

struct TrainSample {
    Mat latent;  // clean clip latent x0
    Mat text;
    double c = 0.0;
};

struct OptimizerConfig {
    double lr = 2e-5;
    int warmup_steps = 100;  // linear ramp to lr
    double beta1 = 0.9;
    double beta2 = 0.99;
    double weight_decay = 0.01;
    double eps = 1e-8;
    std::uint64_t noise_seed = 0;  // drives flow time + noise draws per step
    bool train_lora = true;        // false = adapter-only training
};

TrainSample make_sample(const forge::ClipSample& clip, const LatentSpec& spec,
                        const ModelConfig& cfg);

// One velocity-regression step: x_t = (1-t) x0 + t*eps, target eps - x0,
// mean-squared error over the batch, one decoupled-weight-decay adaptive
// update over the trainables. Frozen backbone weights never change.
// Throws NumericalError when the loss is not finite.
double train_step(const std::vector<TrainSample>& batch, Checkpoint& ckpt,
                  const OptimizerConfig& opt);

// Deterministic batch-index schedule for a step.
std::vector<std::size_t> batch_indices(std::size_t dataset_size, int batch_size,
                                       std::int64_t step, std::uint64_t seed);

// Velocity-objective pretraining of the backbone projections themselves,
// giving the toy stack genuine priors before any adaptation freezes them.
// Runs in pristine mode (no LoRA, no adapters); optimizer state is local and
// the checkpoint returns with a zero step counter.
void pretrain_backbone(Checkpoint& ckpt, const std::vector<TrainSample>& data, int steps,
                       double lr, int batch_size, std::uint64_t seed);

}  // namespace camforge::model
