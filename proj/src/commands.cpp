#include "camforge/commands.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "camforge/checkpoint_io.hpp"
#include "camforge/dataset.hpp"
#include "camforge/errors.hpp"
#include "camforge/rng.hpp"
#include "camforge/prompts.hpp"
#include "camforge/spectra.hpp"
#include "camforge/surgery.hpp"
#include "camforge/svp.hpp"

namespace fs = std::filesystem;

namespace camforge::cli {

namespace {

// Advisory lock held for the lifetime of a training run.
class RunLock {
public:
    explicit RunLock(const std::string& path) {
        fd_ = ::open(path.c_str(), O_CREAT | O_RDWR, 0644);
        if (fd_ < 0 || ::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
            if (fd_ >= 0) ::close(fd_);
            throw IoError("run directory is locked by another process: " + path);
        }
    }
    ~RunLock() {
        if (fd_ >= 0) {
            ::flock(fd_, LOCK_UN);
            ::close(fd_);
        }
    }
    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

private:
    int fd_ = -1;
};

std::vector<std::string> probe_prompts(const TrainSettings& train) {
    std::vector<std::string> prompts = train.fep_prompts_file.empty()
                                           ? drift::default_prompts()
                                           : drift::load_prompts(train.fep_prompts_file);
    if (train.fep_prompt_count > 0 &&
        prompts.size() > static_cast<std::size_t>(train.fep_prompt_count)) {
        prompts.resize(static_cast<std::size_t>(train.fep_prompt_count));
    }
    if (prompts.size() < 2) throw std::invalid_argument("need at least 2 probe prompts");
    return prompts;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write: " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace

std::vector<model::TrainSample> samples_from_manifest(const std::string& manifest_path,
                                                      const model::ModelConfig& model_cfg,
                                                      int latent_frames) {
    const auto manifest = forge::DatasetManifest::read(manifest_path);
    model::LatentSpec spec;
    spec.frames = latent_frames;

    std::vector<model::TrainSample> samples;
    samples.reserve(manifest.entries.size());
    for (const auto& entry : manifest.entries) {
        forge::ClipSample clip;
        clip.frames = forge::load_entry_frames(manifest_path, entry);
        clip.condition = {entry.layer, entry.bin, entry.c};
        clip.scene_id = entry.scene_id;
        samples.push_back(model::make_sample(clip, spec, model_cfg));
    }
    return samples;
}

model::Checkpoint make_pretrained_backbone(const RunConfig& cfg, std::ostream* log) {
    model::Checkpoint ckpt = model::init_checkpoint(cfg.model, cfg.seed);
    if (cfg.train.pretrain_steps <= 0) return ckpt;

    forge::Scene2DParams sp;
    sp.width = sp.height = 64;
    sp.min_size = 8.0;
    sp.max_size = 16.0;
    forge::ShutterOpts opts;
    opts.subframes = 4;
    model::LatentSpec spec;
    spec.frames = cfg.train.latent_frames;

    std::vector<model::TrainSample> corpus;
    corpus.reserve(static_cast<std::size_t>(cfg.train.pretrain_scenes));
    for (int i = 0; i < cfg.train.pretrain_scenes; ++i) {
        const std::uint64_t seed = key2(cfg.seed, 0x93e7a11ULL + static_cast<std::uint64_t>(i));
        const auto scene = forge::random_scene_2d(seed, sp);
        auto clip = forge::render_shutter_clip(scene, {0, 0, 0.0}, spec.frames,
                                               {4.0, 256.0}, opts);
        clip.scene_id = "pretrain" + std::to_string(i);
        corpus.push_back(model::make_sample(clip, spec, cfg.model));
    }
    model::pretrain_backbone(ckpt, corpus, cfg.train.pretrain_steps, cfg.train.pretrain_lr, 4,
                             key2(cfg.seed, 0x93eULL));
    if (log) (*log) << "pretrained backbone for " << cfg.train.pretrain_steps << " steps\n";
    return ckpt;
}

TrainOutcome run_training_loop(const RunConfig& cfg,
                               const std::vector<model::TrainSample>& samples,
                               std::ostream* log, const model::Checkpoint* initial) {
    if (samples.empty()) throw std::invalid_argument("run_training_loop: no samples");

    TrainOutcome outcome;
    outcome.checkpoint = initial ? *initial : model::init_checkpoint(cfg.model, cfg.seed);
    model::Checkpoint& ckpt = outcome.checkpoint;

    const drift::StatsProjectionProvider provider;
    std::vector<std::string> prompts;
    drift::EmbeddingSet reference;
    const bool probing = cfg.train.fep_cadence > 0 && cfg.train.steps > 0;
    if (probing) {
        prompts = probe_prompts(cfg.train);
        const auto ref_frames =
            drift::fep_generate(ckpt, prompts, cfg.train.fep_latent_seed, cfg.train.latent_frames,
                                1, model::ForwardMode::pristine);
        reference = drift::embed_clips(provider, prompts, ref_frames);
        outcome.baseline = drift::fep_baseline(ckpt, prompts, cfg.train.fep_baseline_seeds,
                                               provider, cfg.train.latent_frames);
    }

    model::OptimizerConfig opt;
    opt.lr = cfg.train.lr;
    opt.warmup_steps = cfg.train.warmup;
    opt.beta1 = cfg.train.beta1;
    opt.beta2 = cfg.train.beta2;
    opt.weight_decay = cfg.train.weight_decay;
    opt.eps = cfg.train.eps;
    opt.noise_seed = cfg.seed;
    opt.train_lora = cfg.train.train_lora;

    for (std::int64_t step = 0; step < cfg.train.steps; ++step) {
        const auto idx =
            model::batch_indices(samples.size(), cfg.train.batch_size, ckpt.step, cfg.seed);
        std::vector<model::TrainSample> batch;
        batch.reserve(idx.size());
        for (std::size_t i : idx) batch.push_back(samples[i]);

        double loss;
        try {
            loss = model::train_step(batch, ckpt, opt);
        } catch (const NumericalError& err) {
            // train_step validates the loss before touching any parameter,
            // so ckpt still holds the last good state
            outcome.aborted = true;
            outcome.abort_reason = err.what();
            break;
        }
        outcome.losses.push_back(loss);
        if (log && (step % 25 == 0 || step + 1 == cfg.train.steps)) {
            (*log) << "step " << ckpt.step << " loss " << loss << "\n";
        }

        if (probing && ckpt.step % cfg.train.fep_cadence == 0) {
            const auto frames = drift::fep_generate(ckpt, prompts, cfg.train.fep_latent_seed,
                                                    cfg.train.latent_frames, 1,
                                                    model::ForwardMode::joint,
                                                    cfg.train.probe_condition);
            const auto embedded = drift::embed_clips(provider, prompts, frames);
            const auto metrics = drift::fep_metrics(reference, embedded);
            outcome.series.append({ckpt.step, metrics.ssf, metrics.ssfd});
            if (log) {
                (*log) << "fep step " << ckpt.step << " ssf " << metrics.ssf << " ssfd "
                       << metrics.ssfd << "\n";
            }
        }
    }
    return outcome;
}

int cmd_forge(const RunConfig& cfg, const std::string& out_dir, bool one_shot, bool quiet) {
    control::PyramidPlan plan = cfg.plan;
    int scenes = cfg.scenes_per_layer;
    if (one_shot) {
        plan.layer_counts = {7};
        scenes = 1;
    }
    const std::string dir = out_dir.empty() ? "dataset" : out_dir;
    const auto manifest = forge::build_dataset(cfg.effect, plan, scenes, dir, cfg.forge_params);
    if (!quiet) {
        std::cout << "forged " << manifest.entries.size() << " entries ("
                  << forge::to_string(cfg.effect) << ") into " << dir << "\n";
    }
    return kExitOk;
}

int cmd_train(const RunConfig& cfg, bool quiet) {
    const fs::path run_dir = fs::path(cfg.runs_dir) / cfg.run_name;
    std::error_code ec;
    fs::create_directories(run_dir / "checkpoints", ec);
    fs::create_directories(run_dir / "spectra", ec);
    if (ec) throw IoError("cannot create run directory: " + run_dir.string());

    RunLock lock((run_dir / ".lock").string());
    cfg.save((run_dir / "config.snapshot.json").string());

    // Dataset: load an existing manifest or forge one under the run directory.
    std::string manifest_path;
    if (!cfg.dataset_dir.empty()) {
        manifest_path = (fs::path(cfg.dataset_dir) / "manifest.json").string();
    } else {
        const std::string dataset_dir = (run_dir / "dataset").string();
        forge::build_dataset(cfg.effect, cfg.plan, cfg.scenes_per_layer, dataset_dir,
                             cfg.forge_params);
        manifest_path = (fs::path(dataset_dir) / "manifest.json").string();
    }
    fs::copy_file(manifest_path, run_dir / "dataset-manifest.json",
                  fs::copy_options::overwrite_existing, ec);

    const auto samples =
        samples_from_manifest(manifest_path, cfg.model, cfg.train.latent_frames);
    if (!quiet) std::cout << "training on " << samples.size() << " samples\n";

    const model::Checkpoint initial = make_pretrained_backbone(cfg, quiet ? nullptr : &std::cout);
    io::save_checkpoint(initial, (run_dir / "checkpoints" / "step_0.bin").string());

    const TrainOutcome outcome =
        run_training_loop(cfg, samples, quiet ? nullptr : &std::cout, &initial);
    if (outcome.aborted) {
        io::save_checkpoint(outcome.checkpoint,
                            (run_dir / "checkpoints" / "last_good.bin").string());
        write_text((run_dir / "fep.csv").string(),
                   drift::drift_series_csv(outcome.series, outcome.baseline));
        std::cerr << "training aborted: " << outcome.abort_reason << " (last good checkpoint kept)\n";
        return kExitNumerical;
    }

    io::save_checkpoint(outcome.checkpoint, (run_dir / "checkpoints" / "final.bin").string());
    write_text((run_dir / "fep.csv").string(),
               drift::drift_series_csv(outcome.series, outcome.baseline));
    if (!quiet) {
        std::cout << "final checkpoint: " << (run_dir / "checkpoints" / "final.bin").string()
                  << "\n";
    }
    return kExitOk;
}

int cmd_surgery(const std::string& input_path, const std::string& output_path,
                const std::string& mode, bool quiet) {
    if (mode != "clean" && mode != "dirty") {
        std::cerr << "surgery mode must be clean or dirty\n";
        return kExitUsage;
    }
    const model::Checkpoint input = io::load_checkpoint(input_path);
    const model::Checkpoint output =
        (mode == "clean") ? model::surgery_prune(input) : input;
    io::save_checkpoint(output, output_path);

    if (!quiet) {
        for (int i = 0; i < output.config.n_blocks; ++i) {
            const bool kept = mode == "dirty" || output.config.is_adapter_block(i);
            std::cout << "block " << i << ": " << (kept ? "retained" : "discarded")
                      << (output.adapters.count(i) ? " (+adapter)" : "") << "\n";
        }
    }
    return kExitOk;
}

int cmd_fep(const std::string& ckpt_a_path, const std::string& ckpt_b_path,
            const std::string& prompts_file, std::uint64_t seed_a, std::uint64_t seed_b,
            int prompt_count, const std::string& out_csv, bool quiet) {
    const model::Checkpoint a = io::load_checkpoint(ckpt_a_path);
    const model::Checkpoint b = io::load_checkpoint(ckpt_b_path);

    TrainSettings ts;
    ts.fep_prompts_file = prompts_file;
    ts.fep_prompt_count = prompt_count;
    const auto prompts = probe_prompts(ts);

    const drift::StatsProjectionProvider provider;
    const auto frames_a = drift::fep_generate(a, prompts, seed_a, 4, 1, model::ForwardMode::joint);
    const auto frames_b = drift::fep_generate(b, prompts, seed_b, 4, 1, model::ForwardMode::joint);
    const auto emb_a = drift::embed_clips(provider, prompts, frames_a);
    const auto emb_b = drift::embed_clips(provider, prompts, frames_b);
    const auto metrics = drift::fep_metrics(emb_a, emb_b);

    char row[256];
    std::snprintf(row, sizeof(row), "%llu,%llu,%.17g,%.17g\n",
                  static_cast<unsigned long long>(seed_a),
                  static_cast<unsigned long long>(seed_b), metrics.ssf, metrics.ssfd);
    if (!out_csv.empty()) {
        write_text(out_csv, std::string("seed_a,seed_b,ssf,ssfd\n") + row);
    }
    if (!quiet) std::cout << "ssf " << metrics.ssf << " ssfd " << metrics.ssfd << "\n";
    return kExitOk;
}

int cmd_spectra(const std::string& pre_path, const std::string& post_path, int k, double epsilon,
                double tau, double c_strong, const std::string& out_dir, bool quiet) {
    const model::Checkpoint pre = io::load_checkpoint(pre_path);
    const model::Checkpoint post = io::load_checkpoint(post_path);

    const std::string dir = out_dir.empty() ? "spectra" : out_dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + dir);

    const auto sweep = spectra::depth_sweep(pre, post, {"q", "k", "v", "o"}, k, epsilon);
    write_text((fs::path(dir) / "heatmap.csv").string(), spectra::heatmap_csv(sweep));

    std::vector<std::pair<int, spectra::SpectrumReport>> showdowns;
    for (const auto& [block, adapter] : post.adapters) {
        const auto& bw = post.blocks[static_cast<std::size_t>(block)];
        const auto& bl = post.lora[static_cast<std::size_t>(block)];
        const double scale = post.config.lora_scale();
        try {
            const auto report = spectra::principal_showdown(
                model::merged_weight(bw.wq, bl.q, scale), model::merged_weight(bw.wk, bl.k, scale),
                model::merged_weight(bw.wv, bl.v, scale), adapter, c_strong,
                std::min(k, post.config.model_dim), tau);
            write_text((fs::path(dir) / ("spectrum_block" + std::to_string(block) + ".csv"))
                           .string(),
                       spectra::spectrum_csv(report));
            showdowns.emplace_back(block, report);
        } catch (const NumericalError& err) {
            if (!quiet) std::cout << "block " << block << ": showdown skipped (" << err.what()
                                  << ")\n";
        }
    }
    write_text((fs::path(dir) / "summary.json").string(),
               spectra::summary_json(sweep, showdowns));

    if (!quiet) {
        std::cout << "total intruders: " << sweep.total_intruders() << " across "
                  << sweep.n_blocks << " blocks\n";
    }
    return kExitOk;
}

int cmd_svp_ingest(const std::string& scores_path, const std::string& out_csv, bool quiet) {
    const auto table = drift::svp_ingest(scores_path);
    if (!out_csv.empty()) write_text(out_csv, drift::svp_table_csv(table));
    if (!quiet) std::cout << drift::svp_table_pretty(table);
    return kExitOk;
}

}  // namespace camforge::cli
