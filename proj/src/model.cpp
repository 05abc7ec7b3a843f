#include "camforge/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "camforge/rng.hpp"

namespace camforge::model {

void ModelConfig::validate() const {
    if (n_blocks < 1) throw std::invalid_argument("ModelConfig: n_blocks >= 1");
    if (model_dim < 1 || text_dim < 1) throw std::invalid_argument("ModelConfig: bad dims");
    if (n_heads < 1 || model_dim % n_heads != 0) {
        throw std::invalid_argument("ModelConfig: model_dim must be divisible by n_heads");
    }
    if (lora_rank < 1 || lora_rank >= std::min(model_dim, text_dim)) {
        throw std::invalid_argument("ModelConfig: lora_rank must satisfy 0 < rank < min(dims)");
    }
    if (n_cond_tokens < 1 || adapter_dim < 1) {
        throw std::invalid_argument("ModelConfig: bad adapter dims");
    }
    if (text_tokens < 1) throw std::invalid_argument("ModelConfig: text_tokens >= 1");
    for (int b : adapter_blocks) {
        if (b < 0 || b >= n_blocks) {
            throw std::invalid_argument("ModelConfig: adapter block index out of range");
        }
    }
}

std::vector<int> ModelConfig::resolved_adapter_blocks() const {
    if (!adapter_blocks.empty()) {
        std::vector<int> sorted = adapter_blocks;
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        return sorted;
    }
    // deepest third of the stack
    const int first = static_cast<int>(std::ceil(2.0 * n_blocks / 3.0));
    std::vector<int> blocks;
    for (int i = first; i < n_blocks; ++i) blocks.push_back(i);
    return blocks;
}

bool ModelConfig::is_adapter_block(int index) const {
    const auto blocks = resolved_adapter_blocks();
    return std::binary_search(blocks.begin(), blocks.end(), index);
}

std::string ModelConfig::to_json() const {
    nlohmann::json j;
    j["n_blocks"] = n_blocks;
    j["model_dim"] = model_dim;
    j["n_heads"] = n_heads;
    j["text_dim"] = text_dim;
    j["text_tokens"] = text_tokens;
    j["adapter_blocks"] = resolved_adapter_blocks();
    j["n_cond_tokens"] = n_cond_tokens;
    j["adapter_dim"] = adapter_dim;
    j["lora_rank"] = lora_rank;
    j["lora_alpha"] = lora_alpha;
    j["gate"] = gate;
    j["gate_mode"] = (gate_mode == GateMode::fixed) ? "fixed" : "learned";
    return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    ModelConfig cfg;
    cfg.n_blocks = j.value("n_blocks", cfg.n_blocks);
    cfg.model_dim = j.value("model_dim", cfg.model_dim);
    cfg.n_heads = j.value("n_heads", cfg.n_heads);
    cfg.text_dim = j.value("text_dim", cfg.text_dim);
    cfg.text_tokens = j.value("text_tokens", cfg.text_tokens);
    cfg.adapter_blocks = j.value("adapter_blocks", cfg.adapter_blocks);
    cfg.n_cond_tokens = j.value("n_cond_tokens", cfg.n_cond_tokens);
    cfg.adapter_dim = j.value("adapter_dim", cfg.adapter_dim);
    cfg.lora_rank = j.value("lora_rank", cfg.lora_rank);
    cfg.lora_alpha = j.value("lora_alpha", cfg.lora_alpha);
    cfg.gate = j.value("gate", cfg.gate);
    cfg.gate_mode = (j.value("gate_mode", std::string("fixed")) == "learned") ? GateMode::learned
                                                                              : GateMode::fixed;
    cfg.validate();
    return cfg;
}

namespace {

Mat random_matrix(std::uint64_t seed, const std::string& name, std::int64_t rows,
                  std::int64_t cols, double scale) {
    Rng rng(key2(seed, hash_str(name)));
    Mat m(rows, cols);
    for (std::int64_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal() * scale;
    return m;
}

}  // namespace

Checkpoint init_checkpoint(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    Checkpoint ckpt;
    ckpt.config = config;

    const double wscale_model = 1.0 / std::sqrt(static_cast<double>(config.model_dim));
    const double wscale_text = 1.0 / std::sqrt(static_cast<double>(config.text_dim));
    const double ascale = 1.0 / std::sqrt(static_cast<double>(config.adapter_dim));

    for (int i = 0; i < config.n_blocks; ++i) {
        const std::string prefix = "blocks." + std::to_string(i) + ".";
        BlockWeights bw;
        bw.wq = random_matrix(seed, prefix + "wq", config.model_dim, config.model_dim, wscale_model);
        bw.wk = random_matrix(seed, prefix + "wk", config.model_dim, config.text_dim, wscale_text);
        bw.wv = random_matrix(seed, prefix + "wv", config.model_dim, config.text_dim, wscale_text);
        bw.wo = random_matrix(seed, prefix + "wo", config.model_dim, config.model_dim, wscale_model);
        bw.qnorm = Vec::Ones(config.model_dim);
        bw.knorm = Vec::Ones(config.model_dim);
        ckpt.blocks.push_back(std::move(bw));

        const std::string lprefix = "lora." + std::to_string(i) + ".";
        BlockLora bl;
        auto make_pair = [&](const std::string& target, std::int64_t out_dim,
                             std::int64_t in_dim) {
            LoraPair p;
            p.A = random_matrix(seed, lprefix + target + ".A", config.lora_rank, in_dim,
                                1.0 / std::sqrt(static_cast<double>(in_dim)));
            p.B = Mat::Zero(out_dim, config.lora_rank);
            return p;
        };
        bl.q = make_pair("q", config.model_dim, config.model_dim);
        bl.k = make_pair("k", config.model_dim, config.text_dim);
        bl.v = make_pair("v", config.model_dim, config.text_dim);
        bl.o = make_pair("o", config.model_dim, config.model_dim);
        ckpt.lora.push_back(std::move(bl));
    }

    for (int i : config.resolved_adapter_blocks()) {
        const std::string aprefix = "adapter." + std::to_string(i) + ".";
        CondAdapter ad;
        ad.mlp0_w = random_matrix(seed, aprefix + "mlp0", config.adapter_dim, 1, 1.0);
        ad.mlp0_b = Vec::Zero(config.adapter_dim);
        ad.mlp1_w =
            random_matrix(seed, aprefix + "mlp1", config.adapter_dim, config.adapter_dim, ascale);
        ad.mlp1_b = Vec::Zero(config.adapter_dim);
        const std::int64_t bank = static_cast<std::int64_t>(config.n_cond_tokens) * config.model_dim;
        ad.kproj_w = random_matrix(seed, aprefix + "kproj", bank, config.adapter_dim, ascale);
        ad.kproj_b = Vec::Zero(bank);
        ad.vproj_w = Mat::Zero(bank, config.adapter_dim);
        ad.vproj_b = Vec::Zero(bank);
        ad.gate = config.gate;
        ckpt.adapters[i] = std::move(ad);
    }

    return ckpt;
}

Mat merged_weight(const Mat& w, const LoraPair& lora, double scale) {
    return w + scale * (lora.B * lora.A);
}

namespace {

template <typename LoraVec, typename AdapterMap>
void enumerate_params(const ModelConfig& config, LoraVec& lora, AdapterMap& adapters,
                      std::vector<ParamView>& out) {
    auto add = [&out](const std::string& name, double* data, std::int64_t size) {
        out.push_back({name, data, size});
    };
    for (std::size_t i = 0; i < lora.size(); ++i) {
        const std::string p = "lora." + std::to_string(i) + ".";
        auto add_pair = [&](const std::string& t, auto& pair) {
            add(p + t + ".A", pair.A.data(), pair.A.size());
            add(p + t + ".B", pair.B.data(), pair.B.size());
        };
        add_pair("q", lora[i].q);
        add_pair("k", lora[i].k);
        add_pair("v", lora[i].v);
        add_pair("o", lora[i].o);
    }
    for (auto& [idx, ad] : adapters) {
        const std::string p = "adapter." + std::to_string(idx) + ".";
        add(p + "mlp0.weight", ad.mlp0_w.data(), ad.mlp0_w.size());
        add(p + "mlp0.bias", ad.mlp0_b.data(), ad.mlp0_b.size());
        add(p + "mlp1.weight", ad.mlp1_w.data(), ad.mlp1_w.size());
        add(p + "mlp1.bias", ad.mlp1_b.data(), ad.mlp1_b.size());
        add(p + "kproj.weight", ad.kproj_w.data(), ad.kproj_w.size());
        add(p + "kproj.bias", ad.kproj_b.data(), ad.kproj_b.size());
        add(p + "vproj.weight", ad.vproj_w.data(), ad.vproj_w.size());
        add(p + "vproj.bias", ad.vproj_b.data(), ad.vproj_b.size());
        if (config.gate_mode == GateMode::learned) {
            add(p + "gate", &ad.gate, 1);
        }
    }
}

}  // namespace

std::vector<ParamView> trainable_params(Checkpoint& ckpt) {
    std::vector<ParamView> out;
    enumerate_params(ckpt.config, ckpt.lora, ckpt.adapters, out);
    return out;
}

void ModelGrads::zero() {
    for (auto& bl : lora) {
        for (auto* p : {&bl.q, &bl.k, &bl.v, &bl.o}) {
            p->A.setZero();
            p->B.setZero();
        }
    }
    for (auto& [idx, ad] : adapters) {
        ad.mlp0_w.setZero();
        ad.mlp0_b.setZero();
        ad.mlp1_w.setZero();
        ad.mlp1_b.setZero();
        ad.kproj_w.setZero();
        ad.kproj_b.setZero();
        ad.vproj_w.setZero();
        ad.vproj_b.setZero();
        ad.gate = 0.0;
    }
}

ModelGrads make_grads(const Checkpoint& ckpt) {
    ModelGrads g;
    for (const auto& bl : ckpt.lora) {
        BlockLora zb;
        auto zero_like = [](const LoraPair& p) {
            LoraPair z;
            z.A = Mat::Zero(p.A.rows(), p.A.cols());
            z.B = Mat::Zero(p.B.rows(), p.B.cols());
            return z;
        };
        zb.q = zero_like(bl.q);
        zb.k = zero_like(bl.k);
        zb.v = zero_like(bl.v);
        zb.o = zero_like(bl.o);
        g.lora.push_back(std::move(zb));
    }
    for (const auto& [idx, ad] : ckpt.adapters) {
        CondAdapter z;
        z.mlp0_w = Mat::Zero(ad.mlp0_w.rows(), ad.mlp0_w.cols());
        z.mlp0_b = Vec::Zero(ad.mlp0_b.size());
        z.mlp1_w = Mat::Zero(ad.mlp1_w.rows(), ad.mlp1_w.cols());
        z.mlp1_b = Vec::Zero(ad.mlp1_b.size());
        z.kproj_w = Mat::Zero(ad.kproj_w.rows(), ad.kproj_w.cols());
        z.kproj_b = Vec::Zero(ad.kproj_b.size());
        z.vproj_w = Mat::Zero(ad.vproj_w.rows(), ad.vproj_w.cols());
        z.vproj_b = Vec::Zero(ad.vproj_b.size());
        z.gate = 0.0;
        g.adapters[idx] = std::move(z);
    }
    return g;
}

std::vector<ParamView> grad_params(ModelGrads& grads, Checkpoint& ckpt) {
    std::vector<ParamView> out;
    enumerate_params(ckpt.config, grads.lora, grads.adapters, out);
    return out;
}

std::vector<BlockWeightGrads> make_weight_grads(const Checkpoint& ckpt) {
    std::vector<BlockWeightGrads> grads;
    grads.reserve(ckpt.blocks.size());
    for (const auto& bw : ckpt.blocks) {
        BlockWeightGrads g;
        g.wq = Mat::Zero(bw.wq.rows(), bw.wq.cols());
        g.wk = Mat::Zero(bw.wk.rows(), bw.wk.cols());
        g.wv = Mat::Zero(bw.wv.rows(), bw.wv.cols());
        g.wo = Mat::Zero(bw.wo.rows(), bw.wo.cols());
        grads.push_back(std::move(g));
    }
    return grads;
}

}  // namespace camforge::model
