#include "camforge/surgery.hpp"

namespace camforge::model {

Checkpoint surgery_prune(const Checkpoint& ckpt) {
    Checkpoint out = ckpt;
    for (int i = 0; i < out.config.n_blocks; ++i) {
        if (out.config.is_adapter_block(i)) continue;
        BlockLora& bl = out.lora[static_cast<std::size_t>(i)];
        bl.q.B.setZero();
        bl.k.B.setZero();
        bl.v.B.setZero();
        bl.o.B.setZero();
    }
    return out;
}

}  // namespace camforge::model
