#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "camforge/commands.hpp"
#include "camforge/errors.hpp"

using namespace camforge;

namespace {

cli::RunConfig load_or_default(const std::string& config_path, std::uint64_t seed_override,
                               bool has_seed) {
    cli::RunConfig cfg;
    if (!config_path.empty()) cfg = cli::RunConfig::load(config_path);
    if (has_seed) {
        cfg.seed = seed_override;
        cfg.plan.rng_seed = seed_override;
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"camforge: synthetic camera-control datasets, toy adapter training, and drift "
                 "diagnostics"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    bool quiet = false;
    app.add_option("--config", config_path, "JSON run configuration")->configurable(false);
    auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
    app.add_flag("--quiet", quiet, "suppress progress output");

    // forge
    auto* forge_cmd = app.add_subcommand("forge", "render a condition-aligned dataset");
    std::string forge_out;
    std::string forge_effect;
    bool one_shot = false;
    forge_cmd->add_option("--out", forge_out, "output directory (default: dataset)");
    forge_cmd->add_option("--effect", forge_effect, "shutter | aperture | temperature");
    forge_cmd->add_flag("--one-shot", one_shot, "single scene, 7 conditions");

    // train
    auto* train_cmd = app.add_subcommand("train", "train LoRA + conditional adapter");

    // surgery
    auto* surgery_cmd = app.add_subcommand("surgery", "decoupled-inference weight surgery");
    std::string surgery_in, surgery_out, surgery_mode = "clean";
    surgery_cmd->add_option("input", surgery_in, "input checkpoint")->required();
    surgery_cmd->add_option("output", surgery_out, "output checkpoint")->required();
    surgery_cmd->add_option("--mode", surgery_mode, "clean | dirty");

    // fep
    auto* fep_cmd = app.add_subcommand("fep", "single-step drift metrics between checkpoints");
    std::string fep_a, fep_b, fep_prompts, fep_out;
    std::uint64_t fep_seed = 7, fep_seed_b = 0;
    bool has_seed_b = false;
    int fep_count = 16;
    fep_cmd->add_option("checkpoint_a", fep_a, "reference checkpoint")->required();
    fep_cmd->add_option("checkpoint_b", fep_b, "candidate checkpoint")->required();
    fep_cmd->add_option("--prompts", fep_prompts, "prompt file (default: bundled set)");
    fep_cmd->add_option("--probe-seed", fep_seed, "latent seed");
    fep_cmd->add_option("--probe-seed-b", fep_seed_b, "candidate latent seed (baseline mode)")
        ->each([&](const std::string&) { has_seed_b = true; });
    fep_cmd->add_option("--prompt-count", fep_count, "prompts used from the list");
    fep_cmd->add_option("--out", fep_out, "metrics CSV path");

    // spectra
    auto* spectra_cmd = app.add_subcommand("spectra", "intruder check and rank analysis");
    std::string spec_pre, spec_post, spec_out;
    int spec_k = 64;
    double spec_eps = 0.5, spec_tau = 0.1, spec_c = 1.0;
    spectra_cmd->add_option("checkpoint_pre", spec_pre, "pre-trained checkpoint")->required();
    spectra_cmd->add_option("checkpoint_post", spec_post, "adapted checkpoint")->required();
    spectra_cmd->add_option("-k", spec_k, "top singular vectors to check");
    spectra_cmd->add_option("--epsilon", spec_eps, "intruder similarity threshold");
    spectra_cmd->add_option("--tau", spec_tau, "effective-rank threshold");
    spectra_cmd->add_option("--c-strong", spec_c, "condition value for the showdown");
    spectra_cmd->add_option("--out", spec_out, "report directory (default: spectra)");

    // svp-ingest
    auto* svp_cmd = app.add_subcommand("svp-ingest", "tabulate externally computed SVP scores");
    std::string svp_scores, svp_out;
    svp_cmd->add_option("scores", svp_scores, "CSV with columns metric,variant,value")->required();
    svp_cmd->add_option("--out", svp_out, "pivoted CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (forge_cmd->parsed()) {
            cli::RunConfig cfg = load_or_default(config_path, seed, seed_opt->count() > 0);
            if (!forge_effect.empty()) cfg.effect = forge::effect_from_string(forge_effect);
            return cli::cmd_forge(cfg, forge_out, one_shot, quiet);
        }
        if (train_cmd->parsed()) {
            const cli::RunConfig cfg = load_or_default(config_path, seed, seed_opt->count() > 0);
            return cli::cmd_train(cfg, quiet);
        }
        if (surgery_cmd->parsed()) {
            return cli::cmd_surgery(surgery_in, surgery_out, surgery_mode, quiet);
        }
        if (fep_cmd->parsed()) {
            return cli::cmd_fep(fep_a, fep_b, fep_prompts, fep_seed,
                                has_seed_b ? fep_seed_b : fep_seed, fep_count, fep_out, quiet);
        }
        if (spectra_cmd->parsed()) {
            return cli::cmd_spectra(spec_pre, spec_post, spec_k, spec_eps, spec_tau, spec_c,
                                    spec_out, quiet);
        }
        if (svp_cmd->parsed()) {
            return cli::cmd_svp_ingest(svp_scores, svp_out, quiet);
        }
    } catch (const IoError& err) {
        std::cerr << "I/O error: " << err.what() << "\n";
        return cli::kExitIo;
    } catch (const NumericalError& err) {
        std::cerr << "numerical error: " << err.what() << "\n";
        return cli::kExitNumerical;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return cli::kExitUsage;
    }
    return cli::kExitUsage;
}
