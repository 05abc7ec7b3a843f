#pragma once

#include <memory>
#include <string>
#include <vector>

#include "camforge/image.hpp"
#include "camforge/linalg.hpp"

namespace camforge::drift {

// Maps a clip (frame set) to a fixed-dimension vector. Implementations must
// be deterministic: identical frames give bit-identical vectors.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string name() const = 0;
    virtual int dim() const = 0;
    virtual Vec embed(const std::vector<FrameBuffer>& frames) const = 0;
};

// Default desk-scale provider: 8x8 per-channel means plus gradient-magnitude
// histograms, averaged over frames, through a fixed random projection to D=64.
class StatsProjectionProvider : public EmbeddingProvider {
public:
    StatsProjectionProvider();
    std::string name() const override { return "stats-proj-64"; }
    int dim() const override { return 64; }
    Vec embed(const std::vector<FrameBuffer>& frames) const override;

private:
    Mat projection_;
};

struct EmbeddingSet {
    std::string provider;
    std::vector<std::string> prompts;
    Mat vectors;  // P x D, row i belongs to prompt i

    void validate() const;  // finite entries, row count matches prompts
};

EmbeddingSet embed_clips(const EmbeddingProvider& provider,
                         const std::vector<std::string>& prompts,
                         const std::vector<std::vector<FrameBuffer>>& frame_sets);

// Tensor container with one P x D tensor plus a prompt-id sidecar JSON at
// <path>.prompts.json.
void save_embeddings(const EmbeddingSet& set, const std::string& path);
EmbeddingSet load_embeddings(const std::string& path);

}  // namespace camforge::drift
