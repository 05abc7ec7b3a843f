#pragma once

#include <string>

#include "camforge/model.hpp"
#include "camforge/tensor_store.hpp"

namespace camforge::io {

// Checkpoint container: config + step in the header meta, every weight,
// LoRA factor, adapter parameter, gate, and optimizer moment as an f32
// tensor. Equal model states serialize to equal bytes.
TensorStore checkpoint_to_store(const model::Checkpoint& ckpt);
model::Checkpoint checkpoint_from_store(const TensorStore& store);

void save_checkpoint(const model::Checkpoint& ckpt, const std::string& path);
model::Checkpoint load_checkpoint(const std::string& path);

}  // namespace camforge::io
