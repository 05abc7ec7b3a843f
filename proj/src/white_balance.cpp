#include "camforge/white_balance.hpp"

#include <stdexcept>

namespace camforge::forge {

FrameBuffer apply_white_balance(const FrameBuffer& frame, double kelvin,
                                const control::KelvinRange& kr, bool preserve_luma) {
    kr.validate();
    const auto gains = control::kelvin_to_rgb_gains(kelvin, kr.k_ref);

    FrameBuffer out(frame.width, frame.height);
    for (std::size_t i = 0; i + 2 < frame.pixels.size(); i += 3) {
        out.pixels[i] = frame.pixels[i] * gains[0];
        out.pixels[i + 1] = frame.pixels[i + 1] * gains[1];
        out.pixels[i + 2] = frame.pixels[i + 2] * gains[2];
    }

    if (preserve_luma) {
        const double before = mean_luminance(frame);
        const double after = mean_luminance(out);
        if (after > 0.0 && before > 0.0) {
            const double scale = before / after;
            for (double& v : out.pixels) v *= scale;
        }
    }

    out.clamp();
    return out;
}

std::vector<FrameBuffer> accumulate_frames(const std::vector<FrameBuffer>& frames, int window) {
    if (frames.empty()) throw std::domain_error("accumulate_frames: empty input");
    if (window < 1 || static_cast<std::size_t>(window) > frames.size()) {
        throw std::domain_error("accumulate_frames: window must be in [1, n_frames]");
    }
    for (const auto& f : frames) {
        if (!f.same_shape(frames.front())) {
            throw std::invalid_argument("accumulate_frames: frames differ in shape");
        }
    }

    std::vector<FrameBuffer> out;
    const std::size_t n_windows = frames.size() / static_cast<std::size_t>(window);
    out.reserve(n_windows);
    for (std::size_t wi = 0; wi < n_windows; ++wi) {
        FrameBuffer acc(frames.front().width, frames.front().height);
        for (int j = 0; j < window; ++j) {
            const auto& f = frames[wi * static_cast<std::size_t>(window) + static_cast<std::size_t>(j)];
            for (std::size_t p = 0; p < acc.pixels.size(); ++p) acc.pixels[p] += f.pixels[p];
        }
        const double inv = 1.0 / window;
        for (double& v : acc.pixels) v *= inv;
        out.push_back(std::move(acc));
    }
    return out;
}

}  // namespace camforge::forge
