#pragma once

#include <vector>

#include "camforge/linalg.hpp"
#include "camforge/model.hpp"

namespace camforge::model {

// Which LoRA deltas participate in a forward pass.
//   joint:     deltas merged in every block
//   decoupled: deltas merged only in adapter blocks (surgery semantics)
//   pristine:  no deltas, no adapters — the untouched backbone
enum class ForwardMode { joint, decoupled, pristine };

// Single-head softmax(q K^T / sqrt(d)) V. Head splitting lives in block_forward.
Mat scaled_attention(const Mat& q, const Mat& k, const Mat& v);

// e_cond = mlp1(tanh(mlp0(c))). Throws std::domain_error for |c| > 1.
Vec embed_condition(double c, const CondAdapter& adapter);

// Affine projections of e_cond into n_cond_tokens key/value rows.
void adapter_kv(const Vec& e_cond, const CondAdapter& adapter, int n_tokens, int model_dim,
                Mat* k_cond, Mat* v_cond);

// Everything the backward pass needs from one block's forward evaluation.
struct BlockCache {
    Mat x;
    Mat wq, wk, wv, wo;  // merged weights actually used
    Mat q0, q, k0, k, v;
    std::vector<Mat> p_text;  // per-head attention weights
    Mat y_text;

    bool has_adapter = false;
    double c = 0.0;
    Vec e0, h1, e;
    Mat k_cond, v_cond;
    std::vector<Mat> p_cond;
    Mat y_cond;

    Mat y;  // combined signal entering the output projection
};

// Algorithm: merge LoRA into the projections, run normed cross-attention on
// the text stream, optionally add the gated conditional stream, project out.
Mat block_forward(const Mat& x, const Mat& c_text, double c, const BlockWeights& weights,
                  const BlockLora* lora, double lora_scale, const CondAdapter* adapter,
                  int n_heads, BlockCache* cache = nullptr);

// Returns dL/dx; accumulates parameter gradients into dlora / dadapter when
// the corresponding module was active. dgate accumulation requires learn_gate.
// dweights (optional) collects raw projection gradients for pretraining.
Mat block_backward(const Mat& d_out, const Mat& c_text, const BlockWeights& weights,
                   const BlockLora* lora, double lora_scale, const CondAdapter* adapter,
                   int n_heads, const BlockCache& cache, BlockLora* dlora, CondAdapter* dadapter,
                   bool learn_gate, BlockWeightGrads* dweights = nullptr);

Mat model_forward(const Mat& latent, const Mat& text, double c, const Checkpoint& ckpt,
                  ForwardMode mode, std::vector<BlockCache>* caches = nullptr);

// Backward through the whole stack; caches must come from the matching
// forward call. Returns dL/dlatent.
Mat model_backward(const Mat& d_out, const Mat& text, const Checkpoint& ckpt, ForwardMode mode,
                   const std::vector<BlockCache>& caches, ModelGrads& grads,
                   std::vector<BlockWeightGrads>* weight_grads = nullptr);

}  // namespace camforge::model
