#include "camforge/control.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "camforge/rng.hpp"

namespace camforge::control {

void check_control(double c) {
    if (!(c >= -1.0 && c <= 1.0)) {
        throw std::domain_error("control scalar out of [-1,1]: " + std::to_string(c));
    }
}

void LogRange::validate() const {
    if (!(lo > 0.0 && hi > lo)) {
        throw std::domain_error("LogRange requires 0 < lo < hi");
    }
}

void KelvinRange::validate() const {
    if (!(k_lo >= 1000.0 && k_lo < k_hi && k_hi <= 15000.0)) {
        throw std::domain_error("KelvinRange requires 1000 <= k_lo < k_hi <= 15000");
    }
    if (!(k_ref >= k_lo && k_ref <= k_hi)) {
        throw std::domain_error("KelvinRange requires k_lo <= k_ref <= k_hi");
    }
}

void PyramidPlan::validate() const {
    if (layer_counts.empty()) {
        throw std::domain_error("PyramidPlan needs at least one layer");
    }
    for (int n : layer_counts) {
        if (n < 1) throw std::domain_error("PyramidPlan layer counts must be >= 1");
    }
}

int PyramidPlan::total() const {
    int t = 0;
    for (int n : layer_counts) t += n;
    return t;
}

std::string PyramidPlan::to_json() const {
    nlohmann::json j;
    j["layer_counts"] = layer_counts;
    j["seed"] = rng_seed;
    return j.dump();
}

PyramidPlan PyramidPlan::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    PyramidPlan plan;
    plan.layer_counts = j.at("layer_counts").get<std::vector<int>>();
    plan.rng_seed = j.at("seed").get<std::uint64_t>();
    plan.validate();
    return plan;
}

double map_log_centered(double c, const LogRange& range) {
    range.validate();
    check_control(c);
    if (c == -1.0) return range.lo;
    if (c == 1.0) return range.hi;
    const double t = (c + 1.0) / 2.0;
    return std::exp((1.0 - t) * std::log(range.lo) + t * std::log(range.hi));
}

double map_exposure(double c, const LogRange& fps_range) {
    return 1.0 / map_log_centered(c, fps_range);
}

double map_kelvin(double c, const KelvinRange& kr) {
    kr.validate();
    check_control(c);
    if (c == -1.0) return kr.k_lo;
    if (c == 1.0) return kr.k_hi;
    const double t = (c + 1.0) / 2.0;
    const double mired = (1.0 - t) * (1e6 / kr.k_lo) + t * (1e6 / kr.k_hi);
    return 1e6 / mired;
}

std::array<double, 3> kelvin_to_rgb(double kelvin) {
    if (!(kelvin >= 1000.0 && kelvin <= 15000.0)) {
        throw std::domain_error("kelvin outside approximation domain [1000,15000]: " +
                                std::to_string(kelvin));
    }
    const double t = kelvin / 100.0;
    auto clamp01 = [](double v) { return std::clamp(v / 255.0, 0.0, 1.0); };

    double r;
    if (t <= 66.0) {
        r = 1.0;
    } else {
        r = clamp01(329.698727446 * std::pow(t - 60.0, -0.1332047592));
    }

    double g;
    if (t <= 66.0) {
        g = clamp01(99.4708025861 * std::log(t) - 161.1195681661);
    } else {
        g = clamp01(288.1221695283 * std::pow(t - 60.0, -0.0755148492));
    }

    double b;
    if (t >= 66.0) {
        b = 1.0;
    } else if (t <= 19.0) {
        b = 0.0;
    } else {
        b = clamp01(138.5177312231 * std::log(t - 10.0) - 305.0447927307);
    }

    return {r, g, b};
}

std::array<double, 3> kelvin_to_rgb_gains(double kelvin, double k_ref) {
    const auto rgb = kelvin_to_rgb(kelvin);
    const auto ref = kelvin_to_rgb(k_ref);
    std::array<double, 3> gains{};
    for (int i = 0; i < 3; ++i) {
        if (ref[i] <= 0.0) {
            throw std::domain_error("reference temperature has a zero channel; pick k_ref >= 2000");
        }
        gains[i] = (kelvin == k_ref) ? 1.0 : rgb[i] / ref[i];
    }
    return gains;
}

std::vector<SampledCondition> pyramid_sample(const PyramidPlan& plan) {
    plan.validate();
    std::vector<SampledCondition> out;
    out.reserve(static_cast<std::size_t>(plan.total()));
    for (std::size_t layer = 0; layer < plan.layer_counts.size(); ++layer) {
        const int n = plan.layer_counts[layer];
        for (int bin = 0; bin < n; ++bin) {
            const double u = unit_open(key3(plan.rng_seed, layer, static_cast<std::uint64_t>(bin)));
            const double c = -1.0 + 2.0 * (static_cast<double>(bin) + u) / static_cast<double>(n);
            out.push_back({static_cast<int>(layer), bin, c});
        }
    }
    return out;
}

std::vector<double> bin_edges(int n) {
    if (n < 1) throw std::domain_error("bin_edges requires n >= 1");
    std::vector<double> edges(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        edges[static_cast<std::size_t>(i)] = -1.0 + 2.0 * static_cast<double>(i) / n;
    }
    edges.front() = -1.0;
    edges.back() = 1.0;
    return edges;
}

std::string conditions_to_csv(const std::vector<SampledCondition>& conditions) {
    std::ostringstream os;
    os << "layer,bin,c\n";
    os.precision(17);
    for (const auto& s : conditions) {
        os << s.layer_index << ',' << s.bin_index << ',' << s.c << '\n';
    }
    return os.str();
}

}  // namespace camforge::control
