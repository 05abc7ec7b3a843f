#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace camforge::control {

// Normalized control scalar, c in [-1, 1]. Throws std::domain_error outside.
void check_control(double c);

// Positive physical range mapped through log space.
struct LogRange {
    double lo = 0.0;
    double hi = 0.0;

    void validate() const;  // requires 0 < lo < hi
};

struct KelvinRange {
    double k_lo = 2000.0;
    double k_hi = 12000.0;
    double k_ref = 6500.0;

    void validate() const;  // 1000 <= k_lo < k_hi <= 15000, k_lo <= k_ref <= k_hi
};

// Stratified "pyramid" sampling schedule: one jittered draw per bin per layer.
struct PyramidPlan {
    std::vector<int> layer_counts{9, 7, 5, 3, 1};
    std::uint64_t rng_seed = 0;

    void validate() const;  // every count >= 1
    int total() const;

    std::string to_json() const;
    static PyramidPlan from_json(const std::string& text);
};

struct SampledCondition {
    int layer_index = 0;
    int bin_index = 0;
    double c = 0.0;
};

// Geometric interpolation between range endpoints: exp((1-t) ln lo + t ln hi),
// t = (c+1)/2. Endpoints map to lo/hi exactly.
double map_log_centered(double c, const LogRange& range);

// Exposure seconds = 1 / FPS(c); decreasing in c.
double map_exposure(double c, const LogRange& fps_range);

// Linear interpolation in Mired (1e6/K) space; c=-1 -> k_lo, c=+1 -> k_hi.
double map_kelvin(double c, const KelvinRange& kr);

// Blackbody chromaticity curve fit (Tanner Helland family), valid on
// [1000, 15000] K, channels in [0, 1]. Coefficients frozen in control.cpp.
std::array<double, 3> kelvin_to_rgb(double kelvin);

// Per-channel white-balance gains rgb(k) / rgb(k_ref); (1,1,1) at k == k_ref.
std::array<double, 3> kelvin_to_rgb_gains(double kelvin, double k_ref);

// One uniform draw strictly inside each bin, layer by layer, keyed by
// (seed, layer, bin) so the result is independent of evaluation order.
std::vector<SampledCondition> pyramid_sample(const PyramidPlan& plan);

// n+1 edges -1 + 2i/n spanning [-1, 1] exactly.
std::vector<double> bin_edges(int n);

// CSV with columns layer,bin,c.
std::string conditions_to_csv(const std::vector<SampledCondition>& conditions);

}  // namespace camforge::control
