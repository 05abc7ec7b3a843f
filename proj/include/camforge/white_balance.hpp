#pragma once

#include <vector>

#include "camforge/control.hpp"
#include "camforge/image.hpp"

namespace camforge::forge {

// Per-pixel multiply by kelvin_to_rgb_gains(k, kr.k_ref); optional rescale so
// the mean Rec.709 luminance matches the input. Clamp to [0,1] happens last.
FrameBuffer apply_white_balance(const FrameBuffer& frame, double kelvin,
                                const control::KelvinRange& kr, bool preserve_luma);

// Non-overlapping windowed mean (stride == window): the shutter ablation
// operator for user-supplied high-speed footage.
std::vector<FrameBuffer> accumulate_frames(const std::vector<FrameBuffer>& frames, int window);

}  // namespace camforge::forge
