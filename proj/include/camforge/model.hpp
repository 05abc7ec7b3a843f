#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "camforge/linalg.hpp"

namespace camforge::model {

enum class GateMode { fixed, learned };

struct ModelConfig {
    int n_blocks = 12;
    int model_dim = 64;
    int n_heads = 4;
    int text_dim = 64;
    int text_tokens = 8;
    std::vector<int> adapter_blocks;  // empty => deepest third, indices >= ceil(2n/3)
    int n_cond_tokens = 4;
    int adapter_dim = 256;
    int lora_rank = 32;
    double lora_alpha = 32.0;
    double gate = 0.5;
    GateMode gate_mode = GateMode::fixed;

    void validate() const;
    std::vector<int> resolved_adapter_blocks() const;
    bool is_adapter_block(int index) const;
    int head_dim() const { return model_dim / n_heads; }
    double lora_scale() const { return lora_alpha / lora_rank; }

    std::string to_json() const;
    static ModelConfig from_json(const std::string& text);
};

// Frozen pre-trained cross-attention projections of one block. Weights are
// stored out_dim x in_dim; projections apply as y = x * W^T.
struct BlockWeights {
    Mat wq;  // model_dim x model_dim
    Mat wk;  // model_dim x text_dim
    Mat wv;  // model_dim x text_dim
    Mat wo;  // model_dim x model_dim
    Vec qnorm;  // per-channel scale after RMS normalization
    Vec knorm;
};

// Low-rank update dW = (alpha/rank) * B * A; B starts at zero so dW = 0.
struct LoraPair {
    Mat A;  // rank x in_dim
    Mat B;  // out_dim x rank
};

struct BlockLora {
    LoraPair q, k, v, o;
};

// Scalar condition -> MLP embedding -> affine key/value token banks.
struct CondAdapter {
    Mat mlp0_w;  // adapter_dim x 1
    Vec mlp0_b;
    Mat mlp1_w;  // adapter_dim x adapter_dim
    Vec mlp1_b;
    Mat kproj_w;  // (n_cond_tokens * model_dim) x adapter_dim
    Vec kproj_b;
    Mat vproj_w;  // zero-initialized: fresh checkpoints reproduce the backbone
    Vec vproj_b;
    double gate = 0.5;
};

struct Checkpoint {
    ModelConfig config;
    std::vector<BlockWeights> blocks;
    std::vector<BlockLora> lora;
    std::map<int, CondAdapter> adapters;  // adapter blocks only
    std::map<std::string, std::vector<double>> opt_m;  // AdamW first moments, by param name
    std::map<std::string, std::vector<double>> opt_v;
    std::int64_t step = 0;
};

// Mutable view over one trainable tensor.
struct ParamView {
    std::string name;
    double* data;
    std::int64_t size;
};

Checkpoint init_checkpoint(const ModelConfig& config, std::uint64_t seed);

// LoRA deltas, adapter parameters, and gates when gate_mode == learned, in a
// fixed enumeration order shared by the optimizer and the gradient buffers.
std::vector<ParamView> trainable_params(Checkpoint& ckpt);

// W + (alpha/rank) * B * A.
Mat merged_weight(const Mat& w, const LoraPair& lora, double scale);

// Gradient buffers shaped exactly like the trainables.
struct ModelGrads {
    std::vector<BlockLora> lora;
    std::map<int, CondAdapter> adapters;

    void zero();
};
ModelGrads make_grads(const Checkpoint& ckpt);
std::vector<ParamView> grad_params(ModelGrads& grads, Checkpoint& ckpt);

// Raw projection-weight gradients, used only while pretraining the toy
// backbone itself (adaptation never touches these).
struct BlockWeightGrads {
    Mat wq, wk, wv, wo;
};
std::vector<BlockWeightGrads> make_weight_grads(const Checkpoint& ckpt);

}  // namespace camforge::model
