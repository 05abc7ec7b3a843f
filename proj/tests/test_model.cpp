#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>

#include "camforge/attention.hpp"
#include "camforge/checkpoint_io.hpp"
#include "camforge/rng.hpp"
#include "camforge/surgery.hpp"
#include "camforge/train.hpp"
#include "test_util.hpp"

using namespace camforge;
using namespace camforge::model;

namespace {

ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.n_blocks = 3;
    cfg.model_dim = 8;
    cfg.n_heads = 2;
    cfg.text_dim = 8;
    cfg.text_tokens = 2;
    cfg.adapter_blocks = {2};
    cfg.n_cond_tokens = 2;
    cfg.adapter_dim = 6;
    cfg.lora_rank = 2;
    cfg.lora_alpha = 2.0;
    cfg.gate = 0.5;
    return cfg;
}

Mat random_mat(std::uint64_t seed, int rows, int cols) {
    Rng rng(seed);
    Mat m(rows, cols);
    for (std::int64_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
}

bool bytes_equal(const Mat& a, const Mat& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) ==
               0;
}

}  // namespace

TEST_CASE("scaled_attention degenerate cases and oracle") {
    // one key/value pair: output is that value row for any query
    const Mat q = random_mat(1, 3, 4);
    const Mat k1 = random_mat(2, 1, 4);
    const Mat v1 = random_mat(3, 1, 4);
    const Mat y1 = scaled_attention(q, k1, v1);
    for (int i = 0; i < 3; ++i) {
        for (int d = 0; d < 4; ++d) CHECK(y1(i, d) == doctest::Approx(v1(0, d)).epsilon(1e-15));
    }

    // identical rows: softmax collapses to the shared value
    Mat k_same(3, 4), v_same(3, 4);
    for (int i = 0; i < 3; ++i) {
        k_same.row(i) = k1.row(0);
        v_same.row(i) = v1.row(0);
    }
    const Mat y_same = scaled_attention(q, k_same, v_same);
    for (int i = 0; i < 3; ++i) {
        for (int d = 0; d < 4; ++d) {
            CHECK(y_same(i, d) == doctest::Approx(v1(0, d)).epsilon(1e-12));
        }
    }

    // random case against the independent oracle
    const Mat kk = random_mat(5, 6, 4);
    const Mat vv = random_mat(6, 6, 4);
    const Mat got = scaled_attention(q, kk, vv);
    const Mat want = testutil::attention_oracle(q, kk, vv);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-10);

    CHECK_THROWS_AS(scaled_attention(q, random_mat(7, 2, 5), vv), std::invalid_argument);
}

TEST_CASE("embed_condition basics and jacobian") {
    const auto cfg = tiny_config();
    auto ckpt = init_checkpoint(cfg, 1);
    auto& adapter = ckpt.adapters.at(2);

    // zero-initialized MLP with zero bias maps any c to zero
    CondAdapter zeroed = adapter;
    zeroed.mlp0_w.setZero();
    zeroed.mlp1_w.setZero();
    CHECK(embed_condition(0.7, zeroed).norm() == 0.0);

    const Vec e1 = embed_condition(0.3, adapter);
    const Vec e2 = embed_condition(0.3, adapter);
    CHECK((e1 - e2).norm() == 0.0);

    CHECK_THROWS_AS(embed_condition(1.5, adapter), std::domain_error);

    // de/dc against central differences
    const double h = 1e-6;
    const Vec fd = (embed_condition(0.3 + h, adapter) - embed_condition(0.3 - h, adapter)) /
                   (2.0 * h);
    // analytic: W1 diag(1 - tanh^2(w0 c)) w0
    const Vec e0 = adapter.mlp0_w.col(0) * 0.3;
    const Vec sech2 = Vec::Ones(e0.size()) - e0.array().tanh().square().matrix();
    const Vec analytic = adapter.mlp1_w * sech2.cwiseProduct(adapter.mlp0_w.col(0));
    CHECK((fd - analytic).norm() / analytic.norm() < 1e-4);
}

TEST_CASE("adapter_kv shapes, zero case, linearity") {
    const auto cfg = tiny_config();
    auto ckpt = init_checkpoint(cfg, 2);
    auto& adapter = ckpt.adapters.at(2);

    Mat k_cond, v_cond;
    const Vec e = embed_condition(1.0, adapter);
    adapter_kv(e, adapter, cfg.n_cond_tokens, cfg.model_dim, &k_cond, &v_cond);
    CHECK(k_cond.rows() == cfg.n_cond_tokens);
    CHECK(k_cond.cols() == cfg.model_dim);
    CHECK(v_cond.rows() == cfg.n_cond_tokens);
    CHECK(v_cond.cols() == cfg.model_dim);
    CHECK(v_cond.norm() == 0.0);  // value projector starts at zero

    // zero embedding with zero biases gives zero banks
    Mat kz, vz;
    adapter_kv(Vec::Zero(cfg.adapter_dim), adapter, cfg.n_cond_tokens, cfg.model_dim, &kz, &vz);
    CHECK(kz.norm() == 0.0);

    // affine with zero bias is linear
    Mat k2, v2;
    adapter_kv(2.0 * e, adapter, cfg.n_cond_tokens, cfg.model_dim, &k2, &v2);
    CHECK((k2 - 2.0 * k_cond).cwiseAbs().maxCoeff() < 1e-12);

    CHECK_THROWS_AS(adapter_kv(Vec::Zero(3), adapter, cfg.n_cond_tokens, cfg.model_dim, &kz, &vz),
                    std::invalid_argument);
}

TEST_CASE("zero-init checkpoint equals the pristine backbone bit-exactly") {
    const auto cfg = tiny_config();
    const auto ckpt = init_checkpoint(cfg, 3);
    const Mat latent = random_mat(10, 5, cfg.model_dim);
    const Mat text = random_mat(11, cfg.text_tokens, cfg.text_dim);

    const Mat fresh = model_forward(latent, text, 0.4, ckpt, ForwardMode::joint);
    const Mat pristine = model_forward(latent, text, 0.4, ckpt, ForwardMode::pristine);
    CHECK(bytes_equal(fresh, pristine));

    const Mat decoupled = model_forward(latent, text, 0.4, ckpt, ForwardMode::decoupled);
    CHECK(bytes_equal(fresh, decoupled));
}

TEST_CASE("gate off equals the text-only path bit-exactly") {
    const auto cfg = tiny_config();
    auto ckpt = init_checkpoint(cfg, 4);
    // make the conditional path genuinely nonzero
    Rng rng(5);
    auto& adapter = ckpt.adapters.at(2);
    for (std::int64_t i = 0; i < adapter.vproj_w.size(); ++i) {
        adapter.vproj_w.data()[i] = rng.normal();
    }

    const Mat x = random_mat(12, 4, cfg.model_dim);
    const Mat text = random_mat(13, cfg.text_tokens, cfg.text_dim);
    const auto& bw = ckpt.blocks[2];
    const auto& bl = ckpt.lora[2];

    CondAdapter gated = adapter;
    gated.gate = 0.0;
    const Mat with_gate_off =
        block_forward(x, text, 0.8, bw, &bl, cfg.lora_scale(), &gated, cfg.n_heads);
    const Mat text_only =
        block_forward(x, text, 0.8, bw, &bl, cfg.lora_scale(), nullptr, cfg.n_heads);
    CHECK(bytes_equal(with_gate_off, text_only));
}

TEST_CASE("gate enters linearly") {
    const auto cfg = tiny_config();
    auto ckpt = init_checkpoint(cfg, 6);
    Rng rng(7);
    auto& adapter = ckpt.adapters.at(2);
    for (std::int64_t i = 0; i < adapter.vproj_w.size(); ++i) {
        adapter.vproj_w.data()[i] = rng.normal();
    }
    const Mat x = random_mat(14, 4, cfg.model_dim);
    const Mat text = random_mat(15, cfg.text_tokens, cfg.text_dim);
    const auto& bw = ckpt.blocks[2];
    const auto& bl = ckpt.lora[2];

    auto out_at = [&](double gate) {
        CondAdapter a = adapter;
        a.gate = gate;
        return block_forward(x, text, 0.5, bw, &bl, cfg.lora_scale(), &a, cfg.n_heads);
    };
    const Mat y0 = out_at(0.0);
    const Mat y_half = out_at(0.5);
    const Mat y1 = out_at(1.0);
    const Mat lhs = y_half - y0;
    const Mat rhs = 0.5 * (y1 - y0);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("decoupled forward equals manual masking of shallow deltas") {
    const auto cfg = tiny_config();
    auto ckpt = init_checkpoint(cfg, 8);
    // fabricate trained deltas everywhere
    Rng rng(9);
    for (auto& bl : ckpt.lora) {
        for (auto* pair : {&bl.q, &bl.k, &bl.v, &bl.o}) {
            for (std::int64_t i = 0; i < pair->B.size(); ++i) pair->B.data()[i] = rng.normal() * 0.1;
        }
    }
    auto& adapter = ckpt.adapters.at(2);
    for (std::int64_t i = 0; i < adapter.vproj_w.size(); ++i) {
        adapter.vproj_w.data()[i] = rng.normal() * 0.1;
    }

    const Mat latent = random_mat(16, 5, cfg.model_dim);
    const Mat text = random_mat(17, cfg.text_tokens, cfg.text_dim);

    const Mat joint = model_forward(latent, text, 0.2, ckpt, ForwardMode::joint);
    const Mat decoupled = model_forward(latent, text, 0.2, ckpt, ForwardMode::decoupled);
    CHECK_FALSE(bytes_equal(joint, decoupled));  // trained deltas matter

    Checkpoint masked = ckpt;
    for (int i = 0; i < cfg.n_blocks; ++i) {
        if (cfg.is_adapter_block(i)) continue;
        for (auto* pair : {&masked.lora[static_cast<std::size_t>(i)].q,
                           &masked.lora[static_cast<std::size_t>(i)].k,
                           &masked.lora[static_cast<std::size_t>(i)].v,
                           &masked.lora[static_cast<std::size_t>(i)].o}) {
            pair->B.setZero();
        }
    }
    const Mat masked_joint = model_forward(latent, text, 0.2, masked, ForwardMode::joint);
    CHECK(bytes_equal(decoupled, masked_joint));
}

TEST_CASE("surgery reverts shallow blocks and is idempotent") {
    ModelConfig cfg = tiny_config();
    cfg.n_blocks = 12;
    cfg.adapter_blocks.clear();  // default deepest third: blocks 8..11
    auto ckpt = init_checkpoint(cfg, 10);
    Rng rng(11);
    for (auto& bl : ckpt.lora) {
        for (auto* pair : {&bl.q, &bl.k, &bl.v, &bl.o}) {
            for (std::int64_t i = 0; i < pair->B.size(); ++i) pair->B.data()[i] = rng.normal();
        }
    }

    const auto pruned = surgery_prune(ckpt);
    for (int i = 0; i < 8; ++i) {
        const auto& bw = pruned.blocks[static_cast<std::size_t>(i)];
        const auto& bl = pruned.lora[static_cast<std::size_t>(i)];
        CHECK(bytes_equal(merged_weight(bw.wq, bl.q, cfg.lora_scale()), bw.wq));
        CHECK(bytes_equal(merged_weight(bw.wv, bl.v, cfg.lora_scale()), bw.wv));
        CHECK(bl.q.B.norm() == 0.0);
    }
    for (int i = 8; i < 12; ++i) {
        CHECK(pruned.lora[static_cast<std::size_t>(i)].q.B.norm() > 0.0);
        CHECK(pruned.adapters.count(i) == 1);
    }

    const auto twice = surgery_prune(pruned);
    CHECK(io::checkpoint_to_store(twice).serialize() ==
          io::checkpoint_to_store(pruned).serialize());

    // adapters everywhere: prune is a no-op
    ModelConfig all_cfg = tiny_config();
    all_cfg.adapter_blocks = {0, 1, 2};
    auto all_ckpt = init_checkpoint(all_cfg, 12);
    const auto all_pruned = surgery_prune(all_ckpt);
    CHECK(io::checkpoint_to_store(all_pruned).serialize() ==
          io::checkpoint_to_store(all_ckpt).serialize());
}

TEST_CASE("block and adapter gradients match central finite differences") {
    ModelConfig cfg = tiny_config();
    cfg.gate_mode = GateMode::learned;
    auto ckpt = init_checkpoint(cfg, 13);
    // nonzero B and value projector so every path carries signal
    Rng rng(14);
    for (auto& bl : ckpt.lora) {
        for (auto* pair : {&bl.q, &bl.k, &bl.v, &bl.o}) {
            for (std::int64_t i = 0; i < pair->B.size(); ++i) {
                pair->B.data()[i] = rng.normal() * 0.05;
            }
        }
    }
    auto& adapter = ckpt.adapters.at(2);
    for (std::int64_t i = 0; i < adapter.vproj_w.size(); ++i) {
        adapter.vproj_w.data()[i] = rng.normal() * 0.05;
    }
    for (Eigen::Index i = 0; i < adapter.vproj_b.size(); ++i) {
        adapter.vproj_b[i] = rng.normal() * 0.05;
    }

    const Mat latent = random_mat(18, 3, cfg.model_dim);
    const Mat text = random_mat(19, cfg.text_tokens, cfg.text_dim);
    const Mat target = random_mat(20, 3, cfg.model_dim);
    const double c = 0.6;

    auto loss_fn = [&]() {
        const Mat out = model_forward(latent, text, c, ckpt, ForwardMode::joint);
        return (out - target).squaredNorm();
    };

    // analytic gradients
    ModelGrads grads = make_grads(ckpt);
    std::vector<BlockCache> caches;
    const Mat out = model_forward(latent, text, c, ckpt, ForwardMode::joint, &caches);
    const Mat d_out = 2.0 * (out - target);
    model_backward(d_out, text, ckpt, ForwardMode::joint, caches, grads);

    const auto params = trainable_params(ckpt);
    auto gviews = grad_params(grads, ckpt);
    const auto fd = testutil::fd_gradient(params, loss_fn, 1e-5);

    std::size_t k = 0;
    double worst = 0.0;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        for (std::int64_t i = 0; i < params[pi].size; ++i, ++k) {
            const double analytic = gviews[pi].data[i];
            const double numeric = fd[k];
            const double err = std::fabs(analytic - numeric) /
                               std::max({1.0, std::fabs(analytic), std::fabs(numeric)});
            worst = std::max(worst, err);
        }
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("frozen backbone: originals unchanged by training") {
    const auto cfg = tiny_config();
    auto ckpt = init_checkpoint(cfg, 15);
    const auto before = ckpt.blocks;

    model::LatentSpec spec;
    spec.frames = 1;
    std::vector<TrainSample> batch(2);
    batch[0].latent = model::seeded_latent(1, spec.seq_len(), cfg.model_dim);
    batch[0].text = model::text_embedding("a", cfg.text_tokens, cfg.text_dim);
    batch[0].c = -0.5;
    batch[1].latent = model::seeded_latent(2, spec.seq_len(), cfg.model_dim);
    batch[1].text = model::text_embedding("b", cfg.text_tokens, cfg.text_dim);
    batch[1].c = 0.5;

    OptimizerConfig opt;
    opt.lr = 1e-3;
    for (int i = 0; i < 10; ++i) model::train_step(batch, ckpt, opt);

    for (std::size_t i = 0; i < before.size(); ++i) {
        CHECK(bytes_equal(ckpt.blocks[i].wq, before[i].wq));
        CHECK(bytes_equal(ckpt.blocks[i].wk, before[i].wk));
        CHECK(bytes_equal(ckpt.blocks[i].wv, before[i].wv));
        CHECK(bytes_equal(ckpt.blocks[i].wo, before[i].wo));
    }
    // and the deltas did move
    CHECK(ckpt.lora[0].q.B.norm() > 0.0);
}
