#pragma once

#include <string>
#include <vector>

#include "camforge/linalg.hpp"
#include "camforge/model.hpp"

namespace camforge::spectra {

// Thin SVD with a deterministic sign convention: the largest-magnitude entry
// of every U column is positive.
struct SvdResult {
    Mat U;  // m x k, orthonormal columns
    Vec S;  // k, non-increasing, >= 0
    Mat V;  // n x k
};

SvdResult svd(const Mat& w);

struct IntruderVector {
    int rank = 0;       // position among W_lora's top singular vectors
    double s_max = 0.0; // max |cos| against every W_pre singular vector
    bool is_intruder = false;
};

struct IntruderReport {
    int block = -1;
    std::string target;
    int k = 0;
    double epsilon = 0.0;
    int n_intruders = 0;
    std::vector<IntruderVector> vectors;
};

// Backbone intruder check: each of the top-k left singular vectors of W_lora
// is an intruder when its best |cosine| match across all left singular
// vectors of W_pre stays below epsilon.
IntruderReport intruder_count(const Mat& w_pre, const Mat& w_lora, int k = 64,
                              double epsilon = 0.5);

enum class RankMethod { threshold, entropy };

// threshold: #(sigma_i / sigma_0 > tau); entropy: exp of spectral entropy.
// Throws std::domain_error when the spectrum is identically zero.
double effective_rank(const Vec& s, RankMethod method = RankMethod::threshold, double tau = 0.1);

struct SpectrumReport {
    Vec s_text;  // normalized, leading value 1
    Vec s_cond;
    double r_text_threshold = 0.0;
    double r_cond_threshold = 0.0;
    double r_text_entropy = 0.0;
    double r_cond_entropy = 0.0;
    double c_strong = 1.0;
};

// Data-free rank analysis: drive the block's own principal directions through
// the text path and the conditional path, then compare response spectra.
SpectrumReport principal_showdown(const Mat& wq, const Mat& wk, const Mat& wv,
                                  const model::CondAdapter& adapter, double c_strong = 1.0,
                                  int n = 64, double tau = 0.1);

struct DepthSweep {
    std::vector<IntruderReport> reports;  // one per (block, target)
    int n_blocks = 0;
    std::vector<std::string> targets;

    int total_intruders() const;
};

// Per-(block, target) intruder reports between the merged weights of two
// checkpoints sharing one architecture.
DepthSweep depth_sweep(const model::Checkpoint& pre, const model::Checkpoint& post,
                       const std::vector<std::string>& targets = {"q", "k", "v", "o"}, int k = 64,
                       double epsilon = 0.5);

// CSV: block,target,vector_rank,s_max,is_intruder
std::string heatmap_csv(const DepthSweep& sweep);
// CSV: kind,index,sigma_normalized
std::string spectrum_csv(const SpectrumReport& report);
// JSON with per-block intruder counts and, when present, effective ranks.
std::string summary_json(const DepthSweep& sweep,
                         const std::vector<std::pair<int, SpectrumReport>>& showdowns);

}  // namespace camforge::spectra
