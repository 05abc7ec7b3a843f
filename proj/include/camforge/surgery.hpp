#pragma once

#include "camforge/model.hpp"

namespace camforge::model {

// Decoupled-inference weight surgery: zero the LoRA deltas (B factors) of
// every block outside the adapter set, restoring the pristine weights there.
// Adapter blocks keep LoRA and adapter. Idempotent.
Checkpoint surgery_prune(const Checkpoint& ckpt);

}  // namespace camforge::model
