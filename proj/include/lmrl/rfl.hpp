#pragma once

#include <vector>

#include "lmrl/param_store.hpp"
#include "lmrl/tensor.hpp"

namespace lmrl {

struct RflConfig {
    int n_blocks = 6;
    int channels = 32;
    int kernel_size = 3;
    int dilation_base = 2;

    // Warns (stderr) when the receptive field dwarfs the sequence length.
    void validate(int seq_len) const;
    int receptive_field() const;
};

struct ForegroundPrediction {
    Tensor logits;               // [N x 2]
    Tensor probs;                // [N x 2]
    std::vector<int> hard_mask;  // argmax per frame, ties -> 0
};

void init_rfl_params(ParamStore& params, const RflConfig& cfg, int embed_dim);

// Entry 1x1 conv to `channels`, then n_blocks residual blocks: dilated conv
// (dilation = base^i), ReLU, 1x1 conv, residual add.  Length preserved.
Tensor tcn_forward(const Tensor& x, const RflConfig& cfg, ParamStore& params);

ForegroundPrediction foreground_logits(const Tensor& features, ParamStore& params);

}  // namespace lmrl
