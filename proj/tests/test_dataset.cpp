#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "camforge/dataset.hpp"
#include "camforge/image.hpp"
#include "camforge/white_balance.hpp"

using namespace camforge;
using namespace camforge::forge;
namespace fs = std::filesystem;

namespace {

ForgeParams tiny_params() {
    ForgeParams p;
    p.canvas = 48;
    p.frames_per_clip = 2;
    p.shutter.subframes = 4;
    return p;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
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

TEST_CASE("forge_clips entry counts follow the plan") {
    control::PyramidPlan plan;
    plan.layer_counts = {3, 2};
    plan.rng_seed = 5;
    const auto clips = forge_clips(Effect::shutter, plan, 2, tiny_params());
    CHECK(clips.size() == 2 * (3 + 2));

    // all conditions of one layer share the scene
    for (const auto& clip : clips) {
        CHECK(clip.frames.size() == 2);
        CHECK(clip.unit == "s");
    }
}

TEST_CASE("aperture and temperature datasets are single frame") {
    control::PyramidPlan plan;
    plan.layer_counts = {2};
    plan.rng_seed = 3;
    auto params = tiny_params();
    params.canvas = 64;

    const auto aperture = forge_clips(Effect::aperture, plan, 1, params);
    REQUIRE(aperture.size() == 2);
    for (const auto& clip : aperture) {
        CHECK(clip.frames.size() == 1);
        CHECK(clip.unit == "f-number");
        CHECK(clip.physical_value >= params.fstop_range.lo);
        CHECK(clip.physical_value <= params.fstop_range.hi);
    }

    const auto temperature = forge_clips(Effect::temperature, plan, 1, params);
    REQUIRE(temperature.size() == 2);
    for (const auto& clip : temperature) {
        CHECK(clip.frames.size() == 1);
        CHECK(clip.unit == "K");
    }
}

TEST_CASE("temperature conditions change channel ratios only") {
    auto params = tiny_params();
    params.preserve_luma = false;
    const Scene2DParams sp = [] {
        Scene2DParams s;
        s.width = s.height = 48;
        s.min_size = 6.0;
        s.max_size = 12.0;
        s.moving = false;
        return s;
    }();
    const auto scene = random_scene_2d(11, sp);
    const auto base = render_sharp(scene, 0.0);

    const auto g1 = control::kelvin_to_rgb_gains(4000.0, params.kelvin_range.k_ref);
    const auto g2 = control::kelvin_to_rgb_gains(9000.0, params.kelvin_range.k_ref);
    const auto f1 = apply_white_balance(base, 4000.0, params.kelvin_range, false);
    const auto f2 = apply_white_balance(base, 9000.0, params.kelvin_range, false);

    // on unclamped pixels the two renders differ by a fixed per-channel ratio
    for (std::size_t i = 0; i < base.pixels.size(); i += 5) {
        const int ch = static_cast<int>(i % 3);
        if (f1.pixels[i] <= 0.0 || f1.pixels[i] >= 1.0) continue;
        if (f2.pixels[i] <= 0.0 || f2.pixels[i] >= 1.0) continue;
        const double ratio = f1.pixels[i] / f2.pixels[i];
        CHECK(ratio == doctest::Approx(g1[ch] / g2[ch]).epsilon(1e-9));
    }
}

TEST_CASE("build_dataset writes frames and a stable manifest") {
    TempDir dir("camforge_dataset_test");
    control::PyramidPlan plan;
    plan.layer_counts = {2, 1};
    plan.rng_seed = 21;

    const auto manifest =
        build_dataset(Effect::shutter, plan, 2, dir.path.string(), tiny_params());
    CHECK(manifest.entries.size() == 2 * (2 + 1));
    CHECK(manifest.scenes.size() == 2 * 2);
    for (const auto& entry : manifest.entries) {
        CHECK(entry.n_frames == 2);
        REQUIRE(entry.paths.size() == 2);
        for (const auto& rel : entry.paths) {
            CHECK(fs::exists(dir.path / rel));
        }
    }

    const std::string first = read_file((dir.path / "manifest.json").string());
    build_dataset(Effect::shutter, plan, 2, dir.path.string(), tiny_params());
    const std::string second = read_file((dir.path / "manifest.json").string());
    CHECK(first == second);  // byte-identical rerun

    // manifest json round trip
    const auto restored = DatasetManifest::read((dir.path / "manifest.json").string());
    CHECK(restored.entries.size() == manifest.entries.size());
    CHECK(restored.effect == Effect::shutter);
    CHECK(restored.entries[0].scene_id == manifest.entries[0].scene_id);
    CHECK(restored.entries[0].c == manifest.entries[0].c);

    // png round trip tolerance is one 8-bit step per channel
    const auto frames = load_entry_frames((dir.path / "manifest.json").string(),
                                          restored.entries[0]);
    REQUIRE(frames.size() == 2);
    control::PyramidPlan probe_plan = plan;
    const auto clips = forge_clips(Effect::shutter, probe_plan, 2, tiny_params());
    double max_err = 0.0;
    for (std::size_t i = 0; i < frames[0].pixels.size(); ++i) {
        max_err = std::max(max_err,
                           std::fabs(frames[0].pixels[i] - clips[0].frames[0].pixels[i]));
    }
    CHECK(max_err <= 1.0 / 255.0 + 1e-9);
}

TEST_CASE("one-shot regime: one scene, seven conditions") {
    TempDir dir("camforge_oneshot_test");
    control::PyramidPlan plan;
    plan.layer_counts = {7};
    plan.rng_seed = 1;
    const auto manifest =
        build_dataset(Effect::shutter, plan, 1, dir.path.string(), tiny_params());
    CHECK(manifest.entries.size() == 7);
    CHECK(manifest.scenes.size() == 1);
}

TEST_CASE("single-entry dataset") {
    TempDir dir("camforge_single_test");
    control::PyramidPlan plan;
    plan.layer_counts = {1};
    plan.rng_seed = 2;
    const auto manifest =
        build_dataset(Effect::temperature, plan, 1, dir.path.string(), tiny_params());
    CHECK(manifest.entries.size() == 1);
}

TEST_CASE("noise_texture_clip determinism and entropy") {
    const auto a = noise_texture_clip(4, {0, 0, 0.5}, 2, 32, 32);
    const auto b = noise_texture_clip(4, {0, 0, 0.5}, 2, 32, 32);
    REQUIRE(a.frames.size() == 2);
    CHECK(bit_equal(a.frames[0], b.frames[0]));
    CHECK(bit_equal(a.frames[1], b.frames[1]));
    CHECK_FALSE(bit_equal(a.frames[0], a.frames[1]));

    // high-entropy: much busier than a primitives frame
    CHECK(gradient_energy(a.frames[0]) > 10.0);
}
