#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "camforge/control.hpp"
#include "camforge/rng.hpp"

using namespace camforge;
using namespace camforge::control;

TEST_CASE("map_log_centered endpoints and midpoint") {
    const LogRange r{2.0, 8.0};
    CHECK(map_log_centered(-1.0, r) == 2.0);
    CHECK(map_log_centered(1.0, r) == 8.0);
    // geometric midpoint sqrt(lo*hi)
    CHECK(map_log_centered(0.0, r) == doctest::Approx(4.0).epsilon(1e-12));

    const LogRange fstop{1.2, 16.0};
    CHECK(map_log_centered(0.0, fstop) ==
          doctest::Approx(std::sqrt(1.2 * 16.0)).epsilon(1e-12));
}

TEST_CASE("map_log_centered domain errors") {
    const LogRange r{2.0, 8.0};
    CHECK_THROWS_AS(map_log_centered(-1.0001, r), std::domain_error);
    CHECK_THROWS_AS(map_log_centered(1.5, r), std::domain_error);
    CHECK_THROWS_AS(map_log_centered(0.0, LogRange{0.0, 8.0}), std::domain_error);
    CHECK_THROWS_AS(map_log_centered(0.0, LogRange{8.0, 2.0}), std::domain_error);
}

TEST_CASE("map_log_centered strict monotonicity") {
    const LogRange r{4.0, 256.0};
    Rng rng(123);
    for (int i = 0; i < 500; ++i) {
        double c1 = rng.uniform(-1.0, 1.0);
        double c2 = rng.uniform(-1.0, 1.0);
        if (c1 == c2) continue;
        if (c1 > c2) std::swap(c1, c2);
        CHECK(map_log_centered(c1, r) < map_log_centered(c2, r));
    }
}

TEST_CASE("map_exposure endpoints and midpoint") {
    const LogRange fps{4.0, 256.0};
    CHECK(map_exposure(-1.0, fps) == 0.25);
    CHECK(map_exposure(1.0, fps) == 1.0 / 256.0);
    CHECK(map_exposure(0.0, fps) == doctest::Approx(1.0 / 32.0).epsilon(1e-12));
    CHECK(map_exposure(-0.5, fps) > map_exposure(0.5, fps));  // decreasing
}

TEST_CASE("map_kelvin endpoints and mired midpoint") {
    const KelvinRange kr{2000.0, 12000.0, 6500.0};
    CHECK(map_kelvin(-1.0, kr) == 2000.0);
    CHECK(map_kelvin(1.0, kr) == 12000.0);
    const double mired_mid = 0.5 * (1e6 / 2000.0 + 1e6 / 12000.0);
    CHECK(map_kelvin(0.0, kr) == doctest::Approx(1e6 / mired_mid).epsilon(1e-12));
    CHECK(map_kelvin(0.0, kr) == doctest::Approx(3428.5714).epsilon(1e-4));

    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        double c1 = rng.uniform(-1.0, 1.0);
        double c2 = rng.uniform(-1.0, 1.0);
        if (c1 == c2) continue;
        if (c1 > c2) std::swap(c1, c2);
        CHECK(map_kelvin(c1, kr) < map_kelvin(c2, kr));
    }
}

TEST_CASE("kelvin range validation") {
    CHECK_THROWS_AS((KelvinRange{900.0, 12000.0, 6500.0}).validate(), std::domain_error);
    CHECK_THROWS_AS((KelvinRange{2000.0, 16000.0, 6500.0}).validate(), std::domain_error);
    CHECK_THROWS_AS((KelvinRange{2000.0, 12000.0, 500.0}).validate(), std::domain_error);
}

TEST_CASE("kelvin_to_rgb_gains identity and casts") {
    const auto unit = kelvin_to_rgb_gains(6500.0, 6500.0);
    CHECK(unit[0] == 1.0);
    CHECK(unit[1] == 1.0);
    CHECK(unit[2] == 1.0);

    // warm cast: red dominates, blue collapses
    const auto warm = kelvin_to_rgb_gains(3000.0, 6500.0);
    CHECK(warm[0] > warm[1]);
    CHECK(warm[1] > warm[2]);

    // cool cast: blue above red
    const auto cool = kelvin_to_rgb_gains(10000.0, 6500.0);
    CHECK(cool[2] > cool[0]);

    CHECK_THROWS_AS(kelvin_to_rgb_gains(500.0, 6500.0), std::domain_error);
    CHECK_THROWS_AS(kelvin_to_rgb_gains(6500.0, 20000.0), std::domain_error);
}

TEST_CASE("bin_edges") {
    CHECK(bin_edges(1) == std::vector<double>{-1.0, 1.0});
    CHECK(bin_edges(2) == std::vector<double>{-1.0, 0.0, 1.0});
    const auto e5 = bin_edges(5);
    REQUIRE(e5.size() == 6);
    CHECK(e5[0] == -1.0);
    CHECK(e5[1] == doctest::Approx(-0.6).epsilon(1e-15));
    CHECK(e5[2] == doctest::Approx(-0.2).epsilon(1e-15));
    CHECK(e5[3] == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(e5[4] == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(e5[5] == 1.0);
    CHECK_THROWS_AS(bin_edges(0), std::domain_error);
}

TEST_CASE("pyramid_sample default plan shape") {
    PyramidPlan plan;
    plan.rng_seed = 42;
    const auto samples = pyramid_sample(plan);
    REQUIRE(samples.size() == 25);

    int per_layer[5] = {0, 0, 0, 0, 0};
    for (const auto& s : samples) per_layer[s.layer_index]++;
    CHECK(per_layer[0] == 9);
    CHECK(per_layer[1] == 7);
    CHECK(per_layer[2] == 5);
    CHECK(per_layer[3] == 3);
    CHECK(per_layer[4] == 1);
}

TEST_CASE("pyramid_sample bin membership and bin multiset") {
    PyramidPlan plan;
    plan.layer_counts = {9, 7, 5, 3, 1};
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        plan.rng_seed = seed;
        const auto samples = pyramid_sample(plan);
        std::map<int, std::set<int>> bins_seen;
        for (const auto& s : samples) {
            const int n = plan.layer_counts[static_cast<std::size_t>(s.layer_index)];
            const double lo = -1.0 + 2.0 * s.bin_index / n;
            const double hi = -1.0 + 2.0 * (s.bin_index + 1) / n;
            CHECK(s.c > lo);
            CHECK(s.c < hi);
            bins_seen[s.layer_index].insert(s.bin_index);
        }
        for (std::size_t layer = 0; layer < plan.layer_counts.size(); ++layer) {
            CHECK(bins_seen[static_cast<int>(layer)].size() ==
                  static_cast<std::size_t>(plan.layer_counts[layer]));
        }
    }
}

TEST_CASE("pyramid_sample determinism and single bin") {
    PyramidPlan plan;
    plan.rng_seed = 99;
    const auto a = pyramid_sample(plan);
    const auto b = pyramid_sample(plan);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].c == b[i].c);
        CHECK(a[i].layer_index == b[i].layer_index);
        CHECK(a[i].bin_index == b[i].bin_index);
    }

    PyramidPlan single;
    single.layer_counts = {1};
    single.rng_seed = 3;
    const auto s = pyramid_sample(single);
    REQUIRE(s.size() == 1);
    CHECK(s[0].c > -1.0);
    CHECK(s[0].c < 1.0);
}

// The jittered per-bin draw makes coverage uniform in expectation: equal-width
// intervals collect equal expected counts. Checked over 1000 seeded plans.
TEST_CASE("pyramid_sample uniform coverage across equal-width intervals") {
    PyramidPlan plan;
    long center = 0;  // [-0.2, 0.2]
    long edge = 0;    // [0.6, 1.0]
    const int n_plans = 1000;
    for (std::uint64_t seed = 0; seed < n_plans; ++seed) {
        plan.rng_seed = seed;
        for (const auto& s : pyramid_sample(plan)) {
            if (s.c >= -0.2 && s.c <= 0.2) ++center;
            if (s.c >= 0.6 && s.c <= 1.0) ++edge;
        }
    }
    // expectation is 5 per plan in both windows; allow 5 sigma of slack
    const double expectation = 0.2 * 25.0 * n_plans;
    const double sigma = std::sqrt(expectation);
    CHECK(std::fabs(center - expectation) < 5.0 * sigma);
    CHECK(std::fabs(edge - expectation) < 5.0 * sigma);
}

TEST_CASE("plan json round trip and conditions csv") {
    PyramidPlan plan;
    plan.layer_counts = {4, 2};
    plan.rng_seed = 1234567890123ULL;
    const auto restored = PyramidPlan::from_json(plan.to_json());
    CHECK(restored.layer_counts == plan.layer_counts);
    CHECK(restored.rng_seed == plan.rng_seed);

    const auto samples = pyramid_sample(plan);
    const auto csv = conditions_to_csv(samples);
    CHECK(csv.rfind("layer,bin,c\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 6);

    CHECK_THROWS_AS(PyramidPlan::from_json("{\"layer_counts\":[0],\"seed\":1}"),
                    std::domain_error);
}
