#include "camforge/attention.hpp"

#include <cmath>
#include <stdexcept>

#include "camforge/control.hpp"

namespace camforge::model {

namespace {

constexpr double kNormEps = 1e-6;

// RMS normalization over each head's channel slice, then per-channel scale.
Mat rms_head_norm(const Mat& x, const Vec& scale, int n_heads) {
    const auto dh = x.cols() / n_heads;
    Mat out(x.rows(), x.cols());
    for (Eigen::Index row = 0; row < x.rows(); ++row) {
        for (int h = 0; h < n_heads; ++h) {
            const auto seg = x.row(row).segment(h * dh, dh);
            const double r = std::sqrt(seg.squaredNorm() / static_cast<double>(dh) + kNormEps);
            out.row(row).segment(h * dh, dh) = seg / r;
        }
    }
    for (Eigen::Index col = 0; col < x.cols(); ++col) out.col(col) *= scale[col];
    return out;
}

Mat rms_head_norm_backward(const Mat& dy, const Mat& x, const Vec& scale, int n_heads) {
    const auto dh = x.cols() / n_heads;
    Mat dx(x.rows(), x.cols());
    for (Eigen::Index row = 0; row < x.rows(); ++row) {
        for (int h = 0; h < n_heads; ++h) {
            const auto xs = x.row(row).segment(h * dh, dh);
            const auto dys = dy.row(row).segment(h * dh, dh);
            const auto gs = scale.segment(h * dh, dh).transpose();
            const double r2 = xs.squaredNorm() / static_cast<double>(dh) + kNormEps;
            const double r = std::sqrt(r2);
            // y = g .* x / r with r = sqrt(mean(x^2) + eps)
            const double dot = (dys.cwiseProduct(gs).cwiseProduct(xs)).sum();
            dx.row(row).segment(h * dh, dh) =
                dys.cwiseProduct(gs) / r - xs * (dot / (static_cast<double>(dh) * r2 * r));
        }
    }
    return dx;
}

Mat softmax_rows(const Mat& s) {
    Mat p(s.rows(), s.cols());
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        const double m = s.row(i).maxCoeff();
        p.row(i) = (s.row(i).array() - m).exp();
        p.row(i) /= p.row(i).sum();
    }
    return p;
}

Mat attention_head(const Mat& q, const Mat& k, const Mat& v, Mat* p_out) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
    const Mat p = softmax_rows(scale * (q * k.transpose()));
    if (p_out) *p_out = p;
    return p * v;
}

// Given dY for one head, accumulate dq / dk / dv.
void attention_head_backward(const Mat& dy, const Mat& q, const Mat& k, const Mat& v, const Mat& p,
                             Mat& dq, Mat& dk, Mat& dv) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
    dv.noalias() += p.transpose() * dy;
    const Mat dp = dy * v.transpose();
    Mat ds = p.cwiseProduct(dp);
    const Vec rowsum = ds.rowwise().sum();
    ds = p.cwiseProduct(dp.colwise() - rowsum);
    dq.noalias() += scale * (ds * k);
    dk.noalias() += scale * (ds.transpose() * q);
}

void accumulate_lora_grad(const Mat& dw, const LoraPair& lora, double scale, LoraPair& grad) {
    grad.B.noalias() += scale * (dw * lora.A.transpose());
    grad.A.noalias() += scale * (lora.B.transpose() * dw);
}

}  // namespace

Mat scaled_attention(const Mat& q, const Mat& k, const Mat& v) {
    if (q.cols() != k.cols() || k.rows() != v.rows()) {
        throw std::invalid_argument("scaled_attention: shape mismatch");
    }
    return attention_head(q, k, v, nullptr);
}

Vec embed_condition(double c, const CondAdapter& adapter) {
    control::check_control(c);
    const Vec e0 = adapter.mlp0_w.col(0) * c + adapter.mlp0_b;
    const Vec h1 = e0.array().tanh();
    return adapter.mlp1_w * h1 + adapter.mlp1_b;
}

void adapter_kv(const Vec& e_cond, const CondAdapter& adapter, int n_tokens, int model_dim,
                Mat* k_cond, Mat* v_cond) {
    if (e_cond.size() != adapter.kproj_w.cols()) {
        throw std::invalid_argument("adapter_kv: embedding dimension mismatch");
    }
    if (adapter.kproj_w.rows() != static_cast<Eigen::Index>(n_tokens) * model_dim) {
        throw std::invalid_argument("adapter_kv: projector shape mismatch");
    }
    const Vec kc = adapter.kproj_w * e_cond + adapter.kproj_b;
    const Vec vc = adapter.vproj_w * e_cond + adapter.vproj_b;
    *k_cond = Eigen::Map<const Mat>(kc.data(), n_tokens, model_dim);
    *v_cond = Eigen::Map<const Mat>(vc.data(), n_tokens, model_dim);
}

Mat block_forward(const Mat& x, const Mat& c_text, double c, const BlockWeights& weights,
                  const BlockLora* lora, double lora_scale, const CondAdapter* adapter,
                  int n_heads, BlockCache* cache) {
    if (x.cols() != weights.wq.cols()) {
        throw std::invalid_argument("block_forward: latent width does not match W_q");
    }
    if (c_text.cols() != weights.wk.cols()) {
        throw std::invalid_argument("block_forward: text width does not match W_k");
    }

    const Mat wq = lora ? merged_weight(weights.wq, lora->q, lora_scale) : weights.wq;
    const Mat wk = lora ? merged_weight(weights.wk, lora->k, lora_scale) : weights.wk;
    const Mat wv = lora ? merged_weight(weights.wv, lora->v, lora_scale) : weights.wv;
    const Mat wo = lora ? merged_weight(weights.wo, lora->o, lora_scale) : weights.wo;

    const Mat q0 = x * wq.transpose();
    const Mat q = rms_head_norm(q0, weights.qnorm, n_heads);
    const Mat k0 = c_text * wk.transpose();
    const Mat k = rms_head_norm(k0, weights.knorm, n_heads);
    const Mat v = c_text * wv.transpose();

    const auto dh = q.cols() / n_heads;
    Mat y_text(q.rows(), q.cols());
    std::vector<Mat> p_text(static_cast<std::size_t>(n_heads));
    for (int h = 0; h < n_heads; ++h) {
        y_text.middleCols(h * dh, dh) =
            attention_head(q.middleCols(h * dh, dh), k.middleCols(h * dh, dh),
                           v.middleCols(h * dh, dh), &p_text[static_cast<std::size_t>(h)]);
    }

    Mat y = y_text;
    Vec e0, h1, e;
    Mat k_cond, v_cond, y_cond;
    std::vector<Mat> p_cond;
    if (adapter) {
        control::check_control(c);
        e0 = adapter->mlp0_w.col(0) * c + adapter->mlp0_b;
        h1 = e0.array().tanh();
        e = adapter->mlp1_w * h1 + adapter->mlp1_b;
        adapter_kv(e, *adapter, static_cast<int>(adapter->kproj_w.rows() / x.cols()),
                   static_cast<int>(x.cols()), &k_cond, &v_cond);

        y_cond.resize(q.rows(), q.cols());
        p_cond.resize(static_cast<std::size_t>(n_heads));
        for (int h = 0; h < n_heads; ++h) {
            y_cond.middleCols(h * dh, dh) =
                attention_head(q.middleCols(h * dh, dh), k_cond.middleCols(h * dh, dh),
                               v_cond.middleCols(h * dh, dh), &p_cond[static_cast<std::size_t>(h)]);
        }
        y = y_text + adapter->gate * y_cond;
    }

    const Mat out = x + y * wo.transpose();

    if (cache) {
        cache->x = x;
        cache->wq = wq;
        cache->wk = wk;
        cache->wv = wv;
        cache->wo = wo;
        cache->q0 = q0;
        cache->q = q;
        cache->k0 = k0;
        cache->k = k;
        cache->v = v;
        cache->p_text = std::move(p_text);
        cache->y_text = y_text;
        cache->has_adapter = (adapter != nullptr);
        cache->c = c;
        cache->e0 = e0;
        cache->h1 = h1;
        cache->e = e;
        cache->k_cond = k_cond;
        cache->v_cond = v_cond;
        cache->p_cond = std::move(p_cond);
        cache->y_cond = y_cond;
        cache->y = y;
    }
    return out;
}

Mat block_backward(const Mat& d_out, const Mat& c_text, const BlockWeights& weights,
                   const BlockLora* lora, double lora_scale, const CondAdapter* adapter,
                   int n_heads, const BlockCache& cache, BlockLora* dlora, CondAdapter* dadapter,
                   bool learn_gate, BlockWeightGrads* dweights) {
    const auto dh = cache.q.cols() / n_heads;

    // out = x + y * wo^T
    Mat dx = d_out;
    const Mat dy = d_out * cache.wo;
    const Mat dwo = d_out.transpose() * cache.y;

    Mat dy_text = dy;
    Mat dq = Mat::Zero(cache.q.rows(), cache.q.cols());
    Mat dk = Mat::Zero(cache.k.rows(), cache.k.cols());
    Mat dv = Mat::Zero(cache.v.rows(), cache.v.cols());

    if (cache.has_adapter && adapter) {
        const Mat dy_cond = adapter->gate * dy;
        if (dadapter && learn_gate) {
            dadapter->gate += (dy.cwiseProduct(cache.y_cond)).sum();
        }
        Mat dkc = Mat::Zero(cache.k_cond.rows(), cache.k_cond.cols());
        Mat dvc = Mat::Zero(cache.v_cond.rows(), cache.v_cond.cols());
        for (int h = 0; h < n_heads; ++h) {
            Mat dq_h = Mat::Zero(cache.q.rows(), dh);
            Mat dkc_h = Mat::Zero(dkc.rows(), dh);
            Mat dvc_h = Mat::Zero(dvc.rows(), dh);
            attention_head_backward(dy_cond.middleCols(h * dh, dh), cache.q.middleCols(h * dh, dh),
                                    cache.k_cond.middleCols(h * dh, dh),
                                    cache.v_cond.middleCols(h * dh, dh),
                                    cache.p_cond[static_cast<std::size_t>(h)], dq_h, dkc_h, dvc_h);
            dq.middleCols(h * dh, dh) += dq_h;
            dkc.middleCols(h * dh, dh) += dkc_h;
            dvc.middleCols(h * dh, dh) += dvc_h;
        }
        if (dadapter) {
            // flatten token banks back to projector outputs (row-major)
            const Eigen::Map<const Vec> dkc_flat(dkc.data(), dkc.size());
            const Eigen::Map<const Vec> dvc_flat(dvc.data(), dvc.size());
            dadapter->kproj_w.noalias() += dkc_flat * cache.e.transpose();
            dadapter->kproj_b += dkc_flat;
            dadapter->vproj_w.noalias() += dvc_flat * cache.e.transpose();
            dadapter->vproj_b += dvc_flat;
            const Vec de = adapter->kproj_w.transpose() * dkc_flat +
                           adapter->vproj_w.transpose() * dvc_flat;
            dadapter->mlp1_w.noalias() += de * cache.h1.transpose();
            dadapter->mlp1_b += de;
            const Vec dh1 = adapter->mlp1_w.transpose() * de;
            const Vec de0 = dh1.cwiseProduct(Vec::Ones(dh1.size()) - cache.h1.cwiseProduct(cache.h1));
            dadapter->mlp0_w.col(0) += de0 * cache.c;
            dadapter->mlp0_b += de0;
        }
    }

    for (int h = 0; h < n_heads; ++h) {
        Mat dq_h = Mat::Zero(cache.q.rows(), dh);
        Mat dk_h = Mat::Zero(cache.k.rows(), dh);
        Mat dv_h = Mat::Zero(cache.v.rows(), dh);
        attention_head_backward(dy_text.middleCols(h * dh, dh), cache.q.middleCols(h * dh, dh),
                                cache.k.middleCols(h * dh, dh), cache.v.middleCols(h * dh, dh),
                                cache.p_text[static_cast<std::size_t>(h)], dq_h, dk_h, dv_h);
        dq.middleCols(h * dh, dh) += dq_h;
        dk.middleCols(h * dh, dh) += dk_h;
        dv.middleCols(h * dh, dh) += dv_h;
    }

    const Mat dq0 = rms_head_norm_backward(dq, cache.q0, weights.qnorm, n_heads);
    const Mat dk0 = rms_head_norm_backward(dk, cache.k0, weights.knorm, n_heads);

    const Mat dwq = dq0.transpose() * cache.x;
    const Mat dwk = dk0.transpose() * c_text;
    const Mat dwv = dv.transpose() * c_text;
    dx.noalias() += dq0 * cache.wq;

    if (lora && dlora) {
        accumulate_lora_grad(dwq, lora->q, lora_scale, dlora->q);
        accumulate_lora_grad(dwk, lora->k, lora_scale, dlora->k);
        accumulate_lora_grad(dwv, lora->v, lora_scale, dlora->v);
        accumulate_lora_grad(dwo, lora->o, lora_scale, dlora->o);
    }
    if (dweights) {
        dweights->wq += dwq;
        dweights->wk += dwk;
        dweights->wv += dwv;
        dweights->wo += dwo;
    }
    return dx;
}

Mat model_forward(const Mat& latent, const Mat& text, double c, const Checkpoint& ckpt,
                  ForwardMode mode, std::vector<BlockCache>* caches) {
    const ModelConfig& cfg = ckpt.config;
    if (caches) caches->resize(static_cast<std::size_t>(cfg.n_blocks));

    Mat x = latent;
    for (int i = 0; i < cfg.n_blocks; ++i) {
        const bool adapter_here = (mode != ForwardMode::pristine) && ckpt.adapters.count(i) > 0;
        const bool lora_here =
            (mode == ForwardMode::joint) ? true
            : (mode == ForwardMode::decoupled) ? ckpt.config.is_adapter_block(i)
                                               : false;
        x = block_forward(x, text, c, ckpt.blocks[static_cast<std::size_t>(i)],
                          lora_here ? &ckpt.lora[static_cast<std::size_t>(i)] : nullptr,
                          cfg.lora_scale(), adapter_here ? &ckpt.adapters.at(i) : nullptr,
                          cfg.n_heads, caches ? &(*caches)[static_cast<std::size_t>(i)] : nullptr);
    }
    return x;
}

Mat model_backward(const Mat& d_out, const Mat& text, const Checkpoint& ckpt, ForwardMode mode,
                   const std::vector<BlockCache>& caches, ModelGrads& grads,
                   std::vector<BlockWeightGrads>* weight_grads) {
    const ModelConfig& cfg = ckpt.config;
    Mat dx = d_out;
    for (int i = cfg.n_blocks - 1; i >= 0; --i) {
        const bool adapter_here = (mode != ForwardMode::pristine) && ckpt.adapters.count(i) > 0;
        const bool lora_here =
            (mode == ForwardMode::joint) ? true
            : (mode == ForwardMode::decoupled) ? ckpt.config.is_adapter_block(i)
                                               : false;
        dx = block_backward(
            dx, text, ckpt.blocks[static_cast<std::size_t>(i)],
            lora_here ? &ckpt.lora[static_cast<std::size_t>(i)] : nullptr, cfg.lora_scale(),
            adapter_here ? &ckpt.adapters.at(i) : nullptr, cfg.n_heads,
            caches[static_cast<std::size_t>(i)],
            (lora_here && i < static_cast<int>(grads.lora.size()))
                ? &grads.lora[static_cast<std::size_t>(i)]
                : nullptr,
            (adapter_here && grads.adapters.count(i)) ? &grads.adapters.at(i) : nullptr,
            cfg.gate_mode == GateMode::learned,
            weight_grads ? &(*weight_grads)[static_cast<std::size_t>(i)] : nullptr);
    }
    return dx;
}

}  // namespace camforge::model
