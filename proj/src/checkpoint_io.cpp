#include "camforge/checkpoint_io.hpp"

#include <nlohmann/json.hpp>

#include "camforge/errors.hpp"

namespace camforge::io {

using model::Checkpoint;
using model::ModelConfig;

TensorStore checkpoint_to_store(const Checkpoint& ckpt) {
    TensorStore store;
    store.meta["format"] = "camforge-checkpoint-v1";
    store.meta["config"] = nlohmann::json::parse(ckpt.config.to_json());
    store.meta["step"] = ckpt.step;

    for (std::size_t i = 0; i < ckpt.blocks.size(); ++i) {
        const std::string p = "blocks." + std::to_string(i) + ".";
        const auto& bw = ckpt.blocks[i];
        store.set_matrix(p + "wq", bw.wq);
        store.set_matrix(p + "wk", bw.wk);
        store.set_matrix(p + "wv", bw.wv);
        store.set_matrix(p + "wo", bw.wo);
        store.set_vector(p + "qnorm", bw.qnorm);
        store.set_vector(p + "knorm", bw.knorm);

        const std::string lp = "lora." + std::to_string(i) + ".";
        const auto& bl = ckpt.lora[i];
        store.set_matrix(lp + "q.A", bl.q.A);
        store.set_matrix(lp + "q.B", bl.q.B);
        store.set_matrix(lp + "k.A", bl.k.A);
        store.set_matrix(lp + "k.B", bl.k.B);
        store.set_matrix(lp + "v.A", bl.v.A);
        store.set_matrix(lp + "v.B", bl.v.B);
        store.set_matrix(lp + "o.A", bl.o.A);
        store.set_matrix(lp + "o.B", bl.o.B);
    }

    for (const auto& [idx, ad] : ckpt.adapters) {
        const std::string p = "adapter." + std::to_string(idx) + ".";
        store.set_matrix(p + "mlp0.weight", ad.mlp0_w);
        store.set_vector(p + "mlp0.bias", ad.mlp0_b);
        store.set_matrix(p + "mlp1.weight", ad.mlp1_w);
        store.set_vector(p + "mlp1.bias", ad.mlp1_b);
        store.set_matrix(p + "kproj.weight", ad.kproj_w);
        store.set_vector(p + "kproj.bias", ad.kproj_b);
        store.set_matrix(p + "vproj.weight", ad.vproj_w);
        store.set_vector(p + "vproj.bias", ad.vproj_b);
        store.set_scalar(p + "gate", ad.gate);
    }

    auto put_moments = [&store](const char* prefix,
                                const std::map<std::string, std::vector<double>>& moments) {
        for (const auto& [name, values] : moments) {
            Vec v(static_cast<Eigen::Index>(values.size()));
            for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
            store.set_vector(std::string(prefix) + name, v);
        }
    };
    put_moments("opt.m.", ckpt.opt_m);
    put_moments("opt.v.", ckpt.opt_v);
    return store;
}

Checkpoint checkpoint_from_store(const TensorStore& store) {
    if (store.meta.value("format", std::string()) != "camforge-checkpoint-v1") {
        throw IoError("not a checkpoint container");
    }
    Checkpoint ckpt;
    ckpt.config = ModelConfig::from_json(store.meta.at("config").dump());
    ckpt.step = store.meta.value("step", 0);

    for (int i = 0; i < ckpt.config.n_blocks; ++i) {
        const std::string p = "blocks." + std::to_string(i) + ".";
        model::BlockWeights bw;
        bw.wq = store.matrix(p + "wq");
        bw.wk = store.matrix(p + "wk");
        bw.wv = store.matrix(p + "wv");
        bw.wo = store.matrix(p + "wo");
        bw.qnorm = store.vector(p + "qnorm");
        bw.knorm = store.vector(p + "knorm");
        ckpt.blocks.push_back(std::move(bw));

        const std::string lp = "lora." + std::to_string(i) + ".";
        model::BlockLora bl;
        bl.q = {store.matrix(lp + "q.A"), store.matrix(lp + "q.B")};
        bl.k = {store.matrix(lp + "k.A"), store.matrix(lp + "k.B")};
        bl.v = {store.matrix(lp + "v.A"), store.matrix(lp + "v.B")};
        bl.o = {store.matrix(lp + "o.A"), store.matrix(lp + "o.B")};
        ckpt.lora.push_back(std::move(bl));
    }

    for (int i : ckpt.config.resolved_adapter_blocks()) {
        const std::string p = "adapter." + std::to_string(i) + ".";
        model::CondAdapter ad;
        ad.mlp0_w = store.matrix(p + "mlp0.weight");
        ad.mlp0_b = store.vector(p + "mlp0.bias");
        ad.mlp1_w = store.matrix(p + "mlp1.weight");
        ad.mlp1_b = store.vector(p + "mlp1.bias");
        ad.kproj_w = store.matrix(p + "kproj.weight");
        ad.kproj_b = store.vector(p + "kproj.bias");
        ad.vproj_w = store.matrix(p + "vproj.weight");
        ad.vproj_b = store.vector(p + "vproj.bias");
        ad.gate = store.scalar(p + "gate");
        ckpt.adapters[i] = std::move(ad);
    }

    for (const auto& [name, tensor] : store.tensors) {
        const bool is_m = name.rfind("opt.m.", 0) == 0;
        const bool is_v = name.rfind("opt.v.", 0) == 0;
        if (!is_m && !is_v) continue;
        std::vector<double> values(tensor.data.begin(), tensor.data.end());
        (is_m ? ckpt.opt_m : ckpt.opt_v)[name.substr(6)] = std::move(values);
    }
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    checkpoint_to_store(ckpt).save(path);
}

Checkpoint load_checkpoint(const std::string& path) {
    return checkpoint_from_store(TensorStore::load(path));
}

}  // namespace camforge::io
