#pragma once

#include <optional>
#include <string>

#include "lmrl/fusion.hpp"
#include "lmrl/mpr.hpp"
#include "lmrl/param_store.hpp"
#include "lmrl/rfl.hpp"
#include "lmrl/tensor.hpp"

namespace lmrl {

// Which similarity branch feeds fusion:
//   lmrl     - learned bilinear similarity through the multi-scale stack
//   mpr_tsm  - fixed negative-L2 similarity through the multi-scale stack
//   tsm      - fixed negative-L2 similarity fed to fusion directly
//   sa       - plain self-attention over the embeddings, no similarity map
enum class SimilarityVariant { lmrl, mpr_tsm, tsm, sa };

SimilarityVariant similarity_from_string(const std::string& s);
std::string to_string(SimilarityVariant v);

struct ModelConfig {
    int seq_len = 64;
    int embed_dim = 16;
    SimilarityVariant similarity = SimilarityVariant::lmrl;
    MprConfig mpr;
    RflConfig rfl;
    FusionConfig fusion;

    // Channel width of the similarity-branch output fed into fusion.
    int branch_dim() const;
    void validate() const;
};

struct ModelOutputs {
    std::optional<SimilarityStack> stack;  // only for the multi-scale variants
    Tensor branch_out;                     // similarity-branch features [N x branch_dim]
    Tensor rfl_features;                   // [N x channels]
    ForegroundPrediction fg;
    Tensor fused;                          // [N x fused_dim]
    DensityMap density;
};

void init_model_params(ParamStore& params, const ModelConfig& cfg);

ModelOutputs model_forward(const Tensor& x, const ModelConfig& cfg, ParamStore& params);

}  // namespace lmrl
