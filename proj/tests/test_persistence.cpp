#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "camforge/checkpoint_io.hpp"
#include "camforge/embedding.hpp"
#include "camforge/errors.hpp"
#include "camforge/tensor_store.hpp"
#include "camforge/train.hpp"

using namespace camforge;
namespace fs = std::filesystem;

namespace {

model::ModelConfig tiny_config() {
    model::ModelConfig cfg;
    cfg.n_blocks = 3;
    cfg.model_dim = 8;
    cfg.n_heads = 2;
    cfg.text_dim = 8;
    cfg.text_tokens = 2;
    cfg.n_cond_tokens = 2;
    cfg.adapter_dim = 6;
    cfg.lora_rank = 2;
    cfg.lora_alpha = 2.0;
    return cfg;
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("tensor store round trips byte-exactly") {
    TempDir dir("camforge_store_test");
    io::TensorStore store;
    store.meta["format"] = "unit-test";
    Mat m(3, 4);
    for (int i = 0; i < 12; ++i) m.data()[i] = 0.25 * i - 1.0;
    store.set_matrix("zeta", m);
    store.set_vector("alpha", Vec::LinSpaced(5, -2.0, 2.0));
    store.set_scalar("mid", 0.5);

    const std::string p1 = (dir.path / "a.bin").string();
    const std::string p2 = (dir.path / "b.bin").string();
    store.save(p1);
    const auto loaded = io::TensorStore::load(p1);
    loaded.save(p2);
    CHECK(read_bytes(p1) == read_bytes(p2));

    CHECK((loaded.matrix("zeta") - m).norm() == 0.0);
    CHECK(loaded.scalar("mid") == 0.5);
    CHECK(loaded.vector("alpha").size() == 5);
    CHECK_THROWS_AS(loaded.matrix("missing"), IoError);
}

TEST_CASE("tensor store rejects corrupt containers") {
    TempDir dir("camforge_store_corrupt");
    const std::string path = (dir.path / "bad.bin").string();
    std::ofstream(path, std::ios::binary) << "definitely not a container";
    CHECK_THROWS_AS(io::TensorStore::load(path), IoError);
    CHECK_THROWS_AS(io::TensorStore::load((dir.path / "absent.bin").string()), IoError);
}

TEST_CASE("equal checkpoint states serialize to equal bytes") {
    const auto cfg = tiny_config();
    const auto a = model::init_checkpoint(cfg, 77);
    const auto b = model::init_checkpoint(cfg, 77);
    CHECK(io::checkpoint_to_store(a).serialize() == io::checkpoint_to_store(b).serialize());

    const auto c = model::init_checkpoint(cfg, 78);
    CHECK(io::checkpoint_to_store(a).serialize() != io::checkpoint_to_store(c).serialize());
}

TEST_CASE("checkpoint file round trips byte-exactly") {
    TempDir dir("camforge_ckpt_test");
    const auto cfg = tiny_config();
    auto ckpt = model::init_checkpoint(cfg, 9);

    // a few training steps populate LoRA deltas and optimizer state
    model::LatentSpec spec;
    spec.frames = 1;
    std::vector<model::TrainSample> batch;
    model::TrainSample s;
    s.latent = model::seeded_latent(1, spec.seq_len(), cfg.model_dim);
    s.text = model::text_embedding("unit", cfg.text_tokens, cfg.text_dim);
    s.c = 0.5;
    batch.push_back(s);
    model::OptimizerConfig opt;
    opt.lr = 1e-3;
    for (int i = 0; i < 3; ++i) model::train_step(batch, ckpt, opt);

    const std::string p1 = (dir.path / "ckpt1.bin").string();
    const std::string p2 = (dir.path / "ckpt2.bin").string();
    io::save_checkpoint(ckpt, p1);
    const auto loaded = io::load_checkpoint(p1);
    io::save_checkpoint(loaded, p2);
    CHECK(read_bytes(p1) == read_bytes(p2));

    CHECK(loaded.step == ckpt.step);
    CHECK(loaded.config.n_blocks == cfg.n_blocks);
    CHECK(loaded.adapters.size() == ckpt.adapters.size());
    CHECK(loaded.opt_m.size() == ckpt.opt_m.size());
}

TEST_CASE("embedding container round trips with prompt sidecar") {
    TempDir dir("camforge_emb_test");
    drift::EmbeddingSet set;
    set.provider = "stats-proj-64";
    set.prompts = {"a", "b", "c"};
    set.vectors.resize(3, 64);
    for (std::int64_t i = 0; i < set.vectors.size(); ++i) set.vectors.data()[i] = 0.5 * i;

    const std::string p1 = (dir.path / "emb.bin").string();
    drift::save_embeddings(set, p1);
    const auto loaded = drift::load_embeddings(p1);
    CHECK(loaded.provider == set.provider);
    CHECK(loaded.prompts == set.prompts);
    CHECK((loaded.vectors - set.vectors).norm() == 0.0);

    const std::string p2 = (dir.path / "emb2.bin").string();
    drift::save_embeddings(loaded, p2);
    CHECK(read_bytes(p1) == read_bytes(p2));
}
