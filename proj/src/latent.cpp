#include "camforge/latent.hpp"

#include <cmath>
#include <stdexcept>

#include "camforge/rng.hpp"

namespace camforge::model {

namespace {

constexpr std::uint64_t kEncoderSeed = 0xe2c0de5eedULL;
constexpr std::uint64_t kDecoderSeed = 0xdec0de5eedULL;
constexpr std::uint64_t kTextSeed = 0x7e47e28dULL;

Mat fixed_projection(std::uint64_t seed, std::int64_t rows, std::int64_t cols) {
    Rng rng(seed);
    Mat m(rows, cols);
    const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
    for (std::int64_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal() * scale;
    return m;
}

// Box-average the frame onto an n x n grid.
Mat downsample(const FrameBuffer& frame, int n) {
    Mat grid(static_cast<std::int64_t>(n) * n, 3);
    for (int gy = 0; gy < n; ++gy) {
        const int y0 = gy * frame.height / n;
        const int y1 = (gy + 1) * frame.height / n;
        for (int gx = 0; gx < n; ++gx) {
            const int x0 = gx * frame.width / n;
            const int x1 = (gx + 1) * frame.width / n;
            double acc[3] = {0.0, 0.0, 0.0};
            int count = 0;
            for (int y = y0; y < std::max(y1, y0 + 1); ++y) {
                for (int x = x0; x < std::max(x1, x0 + 1); ++x) {
                    const double* p = frame.at(std::min(x, frame.width - 1),
                                               std::min(y, frame.height - 1));
                    acc[0] += p[0];
                    acc[1] += p[1];
                    acc[2] += p[2];
                    ++count;
                }
            }
            for (int c = 0; c < 3; ++c) {
                grid(static_cast<std::int64_t>(gy) * n + gx, c) = acc[c] / count;
            }
        }
    }
    return grid;
}

}  // namespace

Mat encode_frames(const std::vector<FrameBuffer>& frames, const LatentSpec& spec, int model_dim) {
    if (frames.empty()) throw std::invalid_argument("encode_frames: no frames");
    const Mat enc = fixed_projection(kEncoderSeed, model_dim, spec.patch_dim());
    const int side = spec.frame_px();

    Mat latent(spec.seq_len(), model_dim);
    for (int fi = 0; fi < spec.frames; ++fi) {
        const FrameBuffer& frame =
            frames[std::min(static_cast<std::size_t>(fi), frames.size() - 1)];
        const Mat grid = downsample(frame, side);  // (side*side) x 3
        for (int py = 0; py < spec.grid; ++py) {
            for (int px = 0; px < spec.grid; ++px) {
                Vec patch(spec.patch_dim());
                int k = 0;
                for (int y = 0; y < spec.patch; ++y) {
                    for (int x = 0; x < spec.patch; ++x) {
                        const std::int64_t cell =
                            static_cast<std::int64_t>(py * spec.patch + y) * side +
                            (px * spec.patch + x);
                        patch[k++] = grid(cell, 0);
                        patch[k++] = grid(cell, 1);
                        patch[k++] = grid(cell, 2);
                    }
                }
                const int token = fi * spec.tokens_per_frame() + py * spec.grid + px;
                latent.row(token) = (enc * patch).transpose();
            }
        }
    }
    return latent;
}

std::vector<FrameBuffer> decode_latent(const Mat& latent, const LatentSpec& spec) {
    if (latent.rows() != spec.seq_len()) {
        throw std::invalid_argument("decode_latent: sequence length mismatch");
    }
    const Mat dec = fixed_projection(kDecoderSeed, spec.patch_dim(), latent.cols());
    const int side = spec.frame_px();

    std::vector<FrameBuffer> frames;
    frames.reserve(static_cast<std::size_t>(spec.frames));
    for (int fi = 0; fi < spec.frames; ++fi) {
        FrameBuffer frame(side, side);
        for (int py = 0; py < spec.grid; ++py) {
            for (int px = 0; px < spec.grid; ++px) {
                const int token = fi * spec.tokens_per_frame() + py * spec.grid + px;
                const Vec pix = dec * latent.row(token).transpose();
                int k = 0;
                for (int y = 0; y < spec.patch; ++y) {
                    for (int x = 0; x < spec.patch; ++x) {
                        double* p = frame.at(px * spec.patch + x, py * spec.patch + y);
                        for (int c = 0; c < 3; ++c) {
                            p[c] = 0.5 + 0.5 * std::tanh(0.5 * pix[k++]);
                        }
                    }
                }
            }
        }
        frames.push_back(std::move(frame));
    }
    return frames;
}

Mat text_embedding(const std::string& text, int text_tokens, int text_dim) {
    Rng rng(key2(kTextSeed, hash_str(text)));
    Mat emb(text_tokens, text_dim);
    for (std::int64_t i = 0; i < emb.size(); ++i) emb.data()[i] = rng.normal();
    return emb;
}

Mat seeded_latent(std::uint64_t seed, int seq_len, int model_dim) {
    Rng rng(key2(0x1a7e47ULL, seed));
    Mat latent(seq_len, model_dim);
    for (std::int64_t i = 0; i < latent.size(); ++i) latent.data()[i] = rng.normal();
    return latent;
}

}  // namespace camforge::model
