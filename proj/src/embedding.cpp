#include "camforge/embedding.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "camforge/errors.hpp"
#include "camforge/rng.hpp"
#include "camforge/tensor_store.hpp"

namespace camforge::drift {

namespace {

constexpr int kGrid = 8;
constexpr int kHistBins = 8;
constexpr int kStatsDim = kGrid * kGrid * 3 + 2 * kHistBins;  // 208
constexpr std::uint64_t kProjectionSeed = 0x57a7e5eedULL;

// Per-channel 8x8 box means followed by |gx| / |gy| histograms on the 8x8 luma.
void frame_stats(const FrameBuffer& frame, double* out) {
    double grid[kGrid][kGrid][3] = {};
    for (int gy = 0; gy < kGrid; ++gy) {
        const int y0 = gy * frame.height / kGrid;
        const int y1 = std::max((gy + 1) * frame.height / kGrid, y0 + 1);
        for (int gx = 0; gx < kGrid; ++gx) {
            const int x0 = gx * frame.width / kGrid;
            const int x1 = std::max((gx + 1) * frame.width / kGrid, x0 + 1);
            double acc[3] = {0, 0, 0};
            int count = 0;
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) {
                    const double* p = frame.at(std::min(x, frame.width - 1),
                                               std::min(y, frame.height - 1));
                    acc[0] += p[0];
                    acc[1] += p[1];
                    acc[2] += p[2];
                    ++count;
                }
            }
            for (int c = 0; c < 3; ++c) grid[gy][gx][c] = acc[c] / count;
        }
    }

    int k = 0;
    for (int gy = 0; gy < kGrid; ++gy) {
        for (int gx = 0; gx < kGrid; ++gx) {
            for (int c = 0; c < 3; ++c) out[k++] = grid[gy][gx][c];
        }
    }

    double luma[kGrid][kGrid];
    for (int gy = 0; gy < kGrid; ++gy) {
        for (int gx = 0; gx < kGrid; ++gx) {
            luma[gy][gx] = luminance(grid[gy][gx][0], grid[gy][gx][1], grid[gy][gx][2]);
        }
    }
    double hist_x[kHistBins] = {};
    double hist_y[kHistBins] = {};
    for (int gy = 0; gy < kGrid; ++gy) {
        for (int gx = 0; gx + 1 < kGrid; ++gx) {
            const double g = std::fabs(luma[gy][gx + 1] - luma[gy][gx]);
            const int bin = std::min(kHistBins - 1, static_cast<int>(g * kHistBins));
            hist_x[bin] += 1.0;
        }
    }
    for (int gy = 0; gy + 1 < kGrid; ++gy) {
        for (int gx = 0; gx < kGrid; ++gx) {
            const double g = std::fabs(luma[gy + 1][gx] - luma[gy][gx]);
            const int bin = std::min(kHistBins - 1, static_cast<int>(g * kHistBins));
            hist_y[bin] += 1.0;
        }
    }
    const double norm = 1.0 / (kGrid * (kGrid - 1));
    for (int b = 0; b < kHistBins; ++b) out[k++] = hist_x[b] * norm;
    for (int b = 0; b < kHistBins; ++b) out[k++] = hist_y[b] * norm;
}

}  // namespace

StatsProjectionProvider::StatsProjectionProvider() {
    Rng rng(kProjectionSeed);
    projection_.resize(64, kStatsDim);
    const double scale = 1.0 / std::sqrt(static_cast<double>(kStatsDim));
    for (std::int64_t i = 0; i < projection_.size(); ++i) {
        projection_.data()[i] = rng.normal() * scale;
    }
}

Vec StatsProjectionProvider::embed(const std::vector<FrameBuffer>& frames) const {
    if (frames.empty()) throw std::invalid_argument("embed: no frames");
    Vec stats = Vec::Zero(kStatsDim);
    Vec one(kStatsDim);
    for (const auto& frame : frames) {
        frame_stats(frame, one.data());
        stats += one;
    }
    stats /= static_cast<double>(frames.size());
    return projection_ * stats;
}

void EmbeddingSet::validate() const {
    if (vectors.rows() != static_cast<Eigen::Index>(prompts.size())) {
        throw std::invalid_argument("EmbeddingSet: row/prompt count mismatch");
    }
    if (!vectors.allFinite()) {
        throw NumericalError("EmbeddingSet contains non-finite entries");
    }
}

EmbeddingSet embed_clips(const EmbeddingProvider& provider,
                         const std::vector<std::string>& prompts,
                         const std::vector<std::vector<FrameBuffer>>& frame_sets) {
    if (prompts.size() != frame_sets.size()) {
        throw std::invalid_argument("embed_clips: prompt/clip count mismatch");
    }
    EmbeddingSet set;
    set.provider = provider.name();
    set.prompts = prompts;
    set.vectors.resize(static_cast<Eigen::Index>(prompts.size()), provider.dim());
    for (std::size_t i = 0; i < frame_sets.size(); ++i) {
        set.vectors.row(static_cast<Eigen::Index>(i)) =
            provider.embed(frame_sets[i]).transpose();
    }
    set.validate();
    return set;
}

void save_embeddings(const EmbeddingSet& set, const std::string& path) {
    set.validate();
    io::TensorStore store;
    store.meta["format"] = "camforge-embeddings-v1";
    store.meta["provider"] = set.provider;
    store.set_matrix("embeddings", set.vectors);
    store.save(path);

    nlohmann::json sidecar;
    sidecar["prompts"] = set.prompts;
    std::ofstream out(path + ".prompts.json", std::ios::binary);
    if (!out) throw IoError("cannot write prompt sidecar: " + path + ".prompts.json");
    out << sidecar.dump(2) << "\n";
}

EmbeddingSet load_embeddings(const std::string& path) {
    const io::TensorStore store = io::TensorStore::load(path);
    if (store.meta.value("format", std::string()) != "camforge-embeddings-v1") {
        throw IoError("not an embedding container: " + path);
    }
    EmbeddingSet set;
    set.provider = store.meta.value("provider", std::string());
    set.vectors = store.matrix("embeddings");

    std::ifstream in(path + ".prompts.json", std::ios::binary);
    if (!in) throw IoError("missing prompt sidecar: " + path + ".prompts.json");
    nlohmann::json sidecar = nlohmann::json::parse(in);
    set.prompts = sidecar.at("prompts").get<std::vector<std::string>>();
    set.validate();
    return set;
}

}  // namespace camforge::drift
