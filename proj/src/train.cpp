#include "camforge/train.hpp"

#include <cmath>
#include <stdexcept>

#include "camforge/attention.hpp"
#include "camforge/errors.hpp"
#include "camforge/rng.hpp"

namespace camforge::model {

TrainSample make_sample(const forge::ClipSample& clip, const LatentSpec& spec,
                        const ModelConfig& cfg) {
    TrainSample s;
    s.latent = encode_frames(clip.frames, spec, cfg.model_dim);
    s.text = text_embedding(clip.scene_id, cfg.text_tokens, cfg.text_dim);
    s.c = clip.condition.c;
    return s;
}

std::vector<std::size_t> batch_indices(std::size_t dataset_size, int batch_size,
                                       std::int64_t step, std::uint64_t seed) {
    Rng rng(key3(seed, 0xba7c4ULL, static_cast<std::uint64_t>(step)));
    std::vector<std::size_t> idx(static_cast<std::size_t>(batch_size));
    for (auto& i : idx) i = static_cast<std::size_t>(rng.uniform_u64(dataset_size));
    return idx;
}

void pretrain_backbone(Checkpoint& ckpt, const std::vector<TrainSample>& data, int steps,
                       double lr, int batch_size, std::uint64_t seed) {
    if (data.empty()) throw std::invalid_argument("pretrain_backbone: no data");
    const double beta1 = 0.9, beta2 = 0.99, eps = 1e-8;

    auto wgrads = make_weight_grads(ckpt);
    std::vector<BlockWeightGrads> m = make_weight_grads(ckpt);
    std::vector<BlockWeightGrads> v = make_weight_grads(ckpt);

    for (int step = 0; step < steps; ++step) {
        for (auto& g : wgrads) {
            g.wq.setZero();
            g.wk.setZero();
            g.wv.setZero();
            g.wo.setZero();
        }
        ModelGrads unused = make_grads(ckpt);

        const auto idx = batch_indices(data.size(), batch_size,
                                       static_cast<std::int64_t>(step), key2(seed, 0x9e7ULL));
        double loss = 0.0;
        const double inv_batch = 1.0 / static_cast<double>(idx.size());
        for (std::size_t bi = 0; bi < idx.size(); ++bi) {
            const TrainSample& sample = data[idx[bi]];
            Rng rng(key3(key2(seed, 0x93eULL), static_cast<std::uint64_t>(step),
                         static_cast<std::uint64_t>(bi)));
            const double t = 0.05 + 0.9 * rng.uniform();
            Mat noise(sample.latent.rows(), sample.latent.cols());
            for (std::int64_t i = 0; i < noise.size(); ++i) noise.data()[i] = rng.normal();
            const Mat x_t = (1.0 - t) * sample.latent + t * noise;
            const Mat target = noise - sample.latent;

            std::vector<BlockCache> caches;
            const Mat pred =
                model_forward(x_t, sample.text, 0.0, ckpt, ForwardMode::pristine, &caches);
            const Mat err = pred - target;
            loss += err.squaredNorm() / static_cast<double>(err.size()) * inv_batch;
            const Mat d_pred = (2.0 * inv_batch / static_cast<double>(err.size())) * err;
            model_backward(d_pred, sample.text, ckpt, ForwardMode::pristine, caches, unused,
                           &wgrads);
        }
        if (!std::isfinite(loss)) {
            throw NumericalError("non-finite pretraining loss at step " + std::to_string(step));
        }

        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step + 1));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step + 1));
        for (std::size_t b = 0; b < ckpt.blocks.size(); ++b) {
            auto update = [&](Mat& w, Mat& gm, Mat& gv, const Mat& g) {
                for (std::int64_t i = 0; i < w.size(); ++i) {
                    const double gi = g.data()[i];
                    gm.data()[i] = beta1 * gm.data()[i] + (1.0 - beta1) * gi;
                    gv.data()[i] = beta2 * gv.data()[i] + (1.0 - beta2) * gi * gi;
                    const double mhat = gm.data()[i] / bc1;
                    const double vhat = gv.data()[i] / bc2;
                    w.data()[i] -= lr * mhat / (std::sqrt(vhat) + eps);
                }
            };
            update(ckpt.blocks[b].wq, m[b].wq, v[b].wq, wgrads[b].wq);
            update(ckpt.blocks[b].wk, m[b].wk, v[b].wk, wgrads[b].wk);
            update(ckpt.blocks[b].wv, m[b].wv, v[b].wv, wgrads[b].wv);
            update(ckpt.blocks[b].wo, m[b].wo, v[b].wo, wgrads[b].wo);
        }
    }
    ckpt.step = 0;
}

double train_step(const std::vector<TrainSample>& batch, Checkpoint& ckpt,
                  const OptimizerConfig& opt) {
    if (batch.empty()) throw std::invalid_argument("train_step: empty batch");

    ModelGrads grads = make_grads(ckpt);
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;

    for (std::size_t bi = 0; bi < batch.size(); ++bi) {
        const TrainSample& sample = batch[bi];
        Rng rng(key3(opt.noise_seed, static_cast<std::uint64_t>(ckpt.step),
                     static_cast<std::uint64_t>(bi)));
        const double t = 0.05 + 0.9 * rng.uniform();
        Mat noise(sample.latent.rows(), sample.latent.cols());
        for (std::int64_t i = 0; i < noise.size(); ++i) noise.data()[i] = rng.normal();

        const Mat x_t = (1.0 - t) * sample.latent + t * noise;
        const Mat target = noise - sample.latent;

        std::vector<BlockCache> caches;
        const Mat pred = model_forward(x_t, sample.text, sample.c, ckpt, ForwardMode::joint,
                                       &caches);
        const Mat err = pred - target;
        loss += err.squaredNorm() / static_cast<double>(err.size()) * inv_batch;

        const Mat d_pred = (2.0 * inv_batch / static_cast<double>(err.size())) * err;
        model_backward(d_pred, sample.text, ckpt, ForwardMode::joint, caches, grads);
    }

    if (!std::isfinite(loss)) {
        throw NumericalError("non-finite training loss at step " + std::to_string(ckpt.step));
    }

    const std::int64_t t_step = ckpt.step + 1;
    const double warm =
        (opt.warmup_steps > 0)
            ? std::min(1.0, static_cast<double>(t_step) / static_cast<double>(opt.warmup_steps))
            : 1.0;
    const double lr = opt.lr * warm;
    const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(t_step));
    const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(t_step));

    auto params = trainable_params(ckpt);
    auto gviews = grad_params(grads, ckpt);
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        const ParamView& p = params[pi];
        const ParamView& g = gviews[pi];
        if (!opt.train_lora && p.name.rfind("lora.", 0) == 0) continue;

        auto& m = ckpt.opt_m[p.name];
        auto& v = ckpt.opt_v[p.name];
        if (m.size() != static_cast<std::size_t>(p.size)) m.assign(static_cast<std::size_t>(p.size), 0.0);
        if (v.size() != static_cast<std::size_t>(p.size)) v.assign(static_cast<std::size_t>(p.size), 0.0);

        for (std::int64_t i = 0; i < p.size; ++i) {
            const double gi = g.data[i];
            m[static_cast<std::size_t>(i)] = opt.beta1 * m[static_cast<std::size_t>(i)] + (1.0 - opt.beta1) * gi;
            v[static_cast<std::size_t>(i)] = opt.beta2 * v[static_cast<std::size_t>(i)] + (1.0 - opt.beta2) * gi * gi;
            const double mhat = m[static_cast<std::size_t>(i)] / bc1;
            const double vhat = v[static_cast<std::size_t>(i)] / bc2;
            p.data[i] -= lr * (mhat / (std::sqrt(vhat) + opt.eps) + opt.weight_decay * p.data[i]);
        }
    }

    ckpt.step = t_step;
    return loss;
}

}  // namespace camforge::model
