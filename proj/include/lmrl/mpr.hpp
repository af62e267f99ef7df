#pragma once

#include <vector>

#include "lmrl/ops.hpp"
#include "lmrl/param_store.hpp"
#include "lmrl/tensor.hpp"

namespace lmrl {

struct MprConfig {
    int scales = 3;
    std::vector<int> scale_orders{1, 2, 3};   // pooling window = 2 * k_i
    std::vector<int> dilation_rates{2};       // one dilated 3x3 refinement conv per rate
    int attention_heads = 4;                  // per scale; falls back to 1 when indivisible
    int out_channels = 8;                     // channel width of the refinement convs

    void validate(int seq_len) const;
};

struct SimilarityStack {
    Tensor raw;                         // [N x N]
    Tensor refined;                     // [N x N]
    std::vector<Tensor> pooled;         // K maps [M_i x M_i]
    std::vector<Tensor> scale_vectors;  // K vectors [N x 1]
    Tensor P;                           // [N x K]
};

// Parameter names are keyed by the scale order value k (not its position), so
// reordering scale_orders permutes output columns without changing them.
// With learned_similarity=false the bilinear weight is omitted (the map is
// supplied externally via mpr_from_similarity).
void init_mpr_params(ParamStore& params, const MprConfig& cfg, int embed_dim, int seq_len,
                     bool learned_similarity = true);

// S[i,j] = x_i^T W x_j
Tensor similarity_matrix(const Tensor& x, const Tensor& w);

// 1x1 conv to out_channels, dilated 3x3 conv + ReLU per rate, 1x1 back to one
// channel; spatial size preserved.
Tensor refine_similarity(const Tensor& s, const MprConfig& cfg, ParamStore& params);

// Pool with window 2k, self-attend over pooled rows, collapse channels with a
// learned linear map, then linearly interpolate back to seq_len.
Tensor scale_branch(const Tensor& s_ref, int k, const MprConfig& cfg, ParamStore& params,
                    int seq_len);

// Refinement + scale branches over an externally supplied similarity map
// (lets ablations swap the learned similarity for a fixed one).
SimilarityStack mpr_from_similarity(const Tensor& raw, const MprConfig& cfg, ParamStore& params);

SimilarityStack mpr_forward(const Tensor& x, const MprConfig& cfg, ParamStore& params);

}  // namespace lmrl
