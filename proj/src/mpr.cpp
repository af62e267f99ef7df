#include "lmrl/mpr.hpp"

#include <string>

#include "lmrl/errors.hpp"

namespace lmrl {

namespace {

int pooled_size(int n, int k) { return (n + 2 * k - 1) / (2 * k); }

std::string scale_prefix(int k) { return "mpr.scale_k" + std::to_string(k); }

AttentionParams scale_attention(ParamStore& params, int k) {
    const std::string p = scale_prefix(k);
    return {params.get(p + ".attn.wq"), params.get(p + ".attn.bq"),
            params.get(p + ".attn.wk"), params.get(p + ".attn.bk"),
            params.get(p + ".attn.wv"), params.get(p + ".attn.bv"),
            params.get(p + ".attn.wo"), params.get(p + ".attn.bo")};
}

}  // namespace

void MprConfig::validate(int seq_len) const {
    if (scales < 1) throw ConfigError("mpr scales must be positive");
    if (static_cast<int>(scale_orders.size()) != scales)
        throw ConfigError("mpr scale_orders has " + std::to_string(scale_orders.size()) +
                          " entries for " + std::to_string(scales) + " scales");
    for (const int k : scale_orders) {
        if (k < 1) throw ConfigError("mpr scale order must be positive");
        if (2 * k > seq_len)
            throw ConfigError("mpr pooling window " + std::to_string(2 * k) +
                              " exceeds sequence length " + std::to_string(seq_len));
    }
    if (dilation_rates.empty()) throw ConfigError("mpr needs at least one dilation rate");
    for (const int r : dilation_rates)
        if (r < 1) throw ConfigError("mpr dilation rates must be positive");
    if (attention_heads < 1) throw ConfigError("mpr attention_heads must be positive");
    if (out_channels < 1) throw ConfigError("mpr out_channels must be positive");
}

void init_mpr_params(ParamStore& params, const MprConfig& cfg, int embed_dim, int seq_len,
                     bool learned_similarity) {
    cfg.validate(seq_len);
    const int cm = cfg.out_channels;
    if (learned_similarity)
        params.create("mpr.similarity.w", {embed_dim, embed_dim}, embed_dim);
    params.create("mpr.refine.expand.w", {1, 1, 1, cm}, 1);
    params.create("mpr.refine.expand.b", {cm}, 1);
    for (size_t r = 0; r < cfg.dilation_rates.size(); ++r) {
        const std::string p = "mpr.refine.dilated" + std::to_string(r);
        params.create(p + ".w", {3, 3, cm, cm}, 9 * cm);
        params.create(p + ".b", {cm}, 9 * cm);
    }
    params.create("mpr.refine.collapse.w", {1, 1, cm, 1}, cm);
    params.create("mpr.refine.collapse.b", {1}, cm);
    for (const int k : cfg.scale_orders) {
        const int m = pooled_size(seq_len, k);
        const std::string p = scale_prefix(k);
        for (const char* name : {".attn.wq", ".attn.wk", ".attn.wv", ".attn.wo"})
            params.create(p + name, {m, m}, m);
        for (const char* name : {".attn.bq", ".attn.bk", ".attn.bv", ".attn.bo"})
            params.create(p + name, {m}, m);
        params.create(p + ".head.w", {m, 1}, m);
        params.create(p + ".head.b", {1}, m);
    }
}

Tensor similarity_matrix(const Tensor& x, const Tensor& w) {
    if (!w.defined() || w.ndim() != 2 || w.rows() != w.cols() || w.rows() != x.cols())
        throw ShapeError("similarity weight must be square of side " + std::to_string(x.cols()) +
                         ", got " + (w.defined() ? w.shape_str() : "(undefined)"));
    return matmul(matmul(x, w), transpose(x));
}

Tensor refine_similarity(const Tensor& s, const MprConfig& cfg, ParamStore& params) {
    if (!s.defined() || s.ndim() != 2 || s.rows() != s.cols())
        throw ShapeError("refine_similarity expects a square map, got " +
                         (s.defined() ? s.shape_str() : "(undefined)"));
    const int n = s.rows();
    Tensor x = reshape(s, {n, n, 1});
    x = conv2d(x, params.get("mpr.refine.expand.w"), params.get("mpr.refine.expand.b"), 1);
    for (size_t r = 0; r < cfg.dilation_rates.size(); ++r) {
        const std::string p = "mpr.refine.dilated" + std::to_string(r);
        x = relu(conv2d(x, params.get(p + ".w"), params.get(p + ".b"), cfg.dilation_rates[r]));
    }
    x = conv2d(x, params.get("mpr.refine.collapse.w"), params.get("mpr.refine.collapse.b"), 1);
    return reshape(x, {n, n});
}

Tensor scale_branch(const Tensor& s_ref, int k, const MprConfig& cfg, ParamStore& params,
                    int seq_len) {
    const int m = pooled_size(s_ref.rows(), k);
    Tensor pooled = max_pool2d(s_ref, 2 * k, 2 * k);
    const int heads = (m % cfg.attention_heads == 0) ? cfg.attention_heads : 1;
    Tensor att = self_attention(pooled, heads, scale_attention(params, k));
    const std::string p = scale_prefix(k);
    Tensor vec = linear(att, params.get(p + ".head.w"), params.get(p + ".head.b"));
    return interp_linear_rows(vec, seq_len);
}

SimilarityStack mpr_from_similarity(const Tensor& raw, const MprConfig& cfg,
                                    ParamStore& params) {
    const int n = raw.rows();
    cfg.validate(n);
    SimilarityStack stack;
    stack.raw = raw;
    stack.refined = refine_similarity(raw, cfg, params);
    for (const int k : cfg.scale_orders) {
        stack.pooled.push_back(max_pool2d(stack.refined, 2 * k, 2 * k));
        stack.scale_vectors.push_back(scale_branch(stack.refined, k, cfg, params, n));
    }
    stack.P = concat_cols(stack.scale_vectors);
    return stack;
}

SimilarityStack mpr_forward(const Tensor& x, const MprConfig& cfg, ParamStore& params) {
    cfg.validate(x.rows());
    return mpr_from_similarity(similarity_matrix(x, params.get("mpr.similarity.w")), cfg, params);
}

}  // namespace lmrl
