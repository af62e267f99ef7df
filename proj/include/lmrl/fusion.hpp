#pragma once

#include <string>

#include "lmrl/param_store.hpp"
#include "lmrl/tensor.hpp"

namespace lmrl {

enum class FusionMode { rfl_only, mpr_only, weighted_avg, concat };

FusionMode fusion_mode_from_string(const std::string& s);
std::string to_string(FusionMode m);

struct FusionConfig {
    FusionMode mode = FusionMode::weighted_avg;
    int fused_dim = 32;  // C', must be even
    int predictor_layers = 1;
    int predictor_heads = 4;

    void validate() const;
};

struct DensityMap {
    Tensor values;  // [N x 1]
    Tensor count;   // scalar, sum of values
};

// mpr_dim / rfl_dim are the channel widths each branch feeds in with.
void init_fusion_params(ParamStore& params, const FusionConfig& cfg, int mpr_dim, int rfl_dim);

// Branch combination per mode, then LayerNorm + ReLU.  Single-branch modes
// ignore the other input entirely.
Tensor integrate(const Tensor& mpr_out, const Tensor& rfl_out, const FusionConfig& cfg,
                 ParamStore& params);

// Transformer encoder layers (post-norm) followed by a per-frame linear head.
DensityMap predict_density(const Tensor& fused, const FusionConfig& cfg, ParamStore& params);

double count_from_density(const DensityMap& d);

}  // namespace lmrl
