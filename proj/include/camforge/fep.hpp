#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "camforge/attention.hpp"
#include "camforge/embedding.hpp"
#include "camforge/latent.hpp"
#include "camforge/model.hpp"

namespace camforge::drift {

// Single-step (default) probe generation: one denoising pass per prompt from
// a latent seed shared across prompts, decoded to n_frames small frames.
std::vector<std::vector<FrameBuffer>> fep_generate(const model::Checkpoint& ckpt,
                                                   const std::vector<std::string>& prompts,
                                                   std::uint64_t latent_seed, int n_frames = 4,
                                                   int denoise_steps = 1,
                                                   model::ForwardMode mode = model::ForwardMode::joint,
                                                   double probe_condition = 0.0);

struct SsfScore {
    double value = 0.0;  // mean per-prompt cosine similarity, in [-1, 1]
    int excluded = 0;    // zero-norm rows skipped
};

// Average per-prompt cosine similarity between two embedding sets over the
// same provider and prompt list.
SsfScore ssf_score(const EmbeddingSet& reference, const EmbeddingSet& candidate);

struct GaussianStats {
    Vec mean;
    Mat cov;  // symmetric PSD (clamped)
};

// Sample mean and unbiased covariance (divisor P-1), symmetrized.
GaussianStats gaussian_fit(const EmbeddingSet& set);

// ||mu1-mu2||^2 + Tr(S1 + S2 - 2 (S1 S2)^{1/2}); the matrix square root goes
// through symmetric eigendecompositions with eigenvalue clamping at zero.
// Bitwise-identical inputs return exactly 0.
double frechet_distance(const GaussianStats& g1, const GaussianStats& g2);

struct FepMetrics {
    double ssf = 0.0;
    double ssfd = 0.0;
};

// SSF + SS-FD between two embedding sets.
FepMetrics fep_metrics(const EmbeddingSet& reference, const EmbeddingSet& candidate);

// Self-baseline: the pristine backbone against itself under different latent
// seeds. Captures the metric floor attributable to seed variation alone.
FepMetrics fep_baseline(const model::Checkpoint& pristine, const std::vector<std::string>& prompts,
                        const std::vector<std::uint64_t>& seeds, const EmbeddingProvider& provider,
                        int n_frames = 4);

struct DriftPoint {
    std::int64_t step = 0;
    double ssf = 0.0;
    double ssfd = 0.0;
};

struct DriftSeries {
    std::vector<DriftPoint> points;  // strictly increasing steps

    void append(DriftPoint p);
};

// Least-squares slope of SS-FD against step; needs >= 2 points.
double drift_rate(const DriftSeries& series);

// CSV: step,ssf,ssfd,ssf_base,ssfd_base,v_drift_cumulative
std::string drift_series_csv(const DriftSeries& series, const FepMetrics& baseline);

}  // namespace camforge::drift
