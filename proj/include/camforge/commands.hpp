#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "camforge/fep.hpp"
#include "camforge/model.hpp"
#include "camforge/run_config.hpp"
#include "camforge/train.hpp"

namespace camforge::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitNumerical = 3;

struct TrainOutcome {
    model::Checkpoint checkpoint;
    drift::DriftSeries series;
    drift::FepMetrics baseline{1.0, 0.0};
    std::vector<double> losses;
    bool aborted = false;  // non-finite loss; checkpoint holds the last good state
    std::string abort_reason;
};

// The training loop proper: joint (or adapter-only) optimization over the
// given samples with FEP probes against the cached pristine reference every
// fep_cadence steps. Pure in-memory; persistence is cmd_train's job. When
// `initial` is given, adaptation starts from that checkpoint (a pretrained
// backbone); otherwise a fresh one is initialized from cfg.seed.
TrainOutcome run_training_loop(const RunConfig& cfg,
                               const std::vector<model::TrainSample>& samples,
                               std::ostream* log = nullptr,
                               const model::Checkpoint* initial = nullptr);

// Velocity-pretrain the toy backbone on generic primitive scenes (seeds
// disjoint from any dataset scene) so adaptation freezes genuine priors.
model::Checkpoint make_pretrained_backbone(const RunConfig& cfg, std::ostream* log = nullptr);

// Stream a rendered dataset into training samples.
std::vector<model::TrainSample> samples_from_manifest(const std::string& manifest_path,
                                                      const model::ModelConfig& model_cfg,
                                                      int latent_frames);

int cmd_forge(const RunConfig& cfg, const std::string& out_dir, bool one_shot, bool quiet);
int cmd_train(const RunConfig& cfg, bool quiet);
int cmd_surgery(const std::string& input_path, const std::string& output_path,
                const std::string& mode, bool quiet);
int cmd_fep(const std::string& ckpt_a_path, const std::string& ckpt_b_path,
            const std::string& prompts_file, std::uint64_t seed_a, std::uint64_t seed_b,
            int prompt_count, const std::string& out_csv, bool quiet);
int cmd_spectra(const std::string& pre_path, const std::string& post_path, int k, double epsilon,
                double tau, double c_strong, const std::string& out_dir, bool quiet);
int cmd_svp_ingest(const std::string& scores_path, const std::string& out_csv, bool quiet);

}  // namespace camforge::cli
