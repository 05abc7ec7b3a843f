#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "camforge/image.hpp"
#include "camforge/linalg.hpp"
#include "camforge/model.hpp"

namespace camforge::model {

// Fixed (untrained) linear patch projections standing in for a VAE, plus a
// synthetic text encoder: every map is a seeded random projection, identical
// across processes and runs.
struct LatentSpec {
    int frames = 4;      // frames represented per latent sequence
    int grid = 4;        // patches per frame side
    int patch = 4;       // pixels per patch side
    int frame_px() const { return grid * patch; }
    int tokens_per_frame() const { return grid * grid; }
    int patch_dim() const { return patch * patch * 3; }
    int seq_len() const { return frames * tokens_per_frame(); }
};

// Downsample a frame to (grid*patch)^2 and project each patch to model_dim.
// Clips shorter than spec.frames repeat their last frame.
Mat encode_frames(const std::vector<FrameBuffer>& frames, const LatentSpec& spec, int model_dim);

// Map latent tokens back to small frames through the fixed decoder and a
// smooth squash into [0,1].
std::vector<FrameBuffer> decode_latent(const Mat& latent, const LatentSpec& spec);

// Deterministic pseudo text embedding for a prompt or scene id.
Mat text_embedding(const std::string& text, int text_tokens, int text_dim);

// Standard-normal latent from a seed, shared across prompts of a probe run.
Mat seeded_latent(std::uint64_t seed, int seq_len, int model_dim);

}  // namespace camforge::model
