#include "lmrl/model.hpp"

#include "lmrl/errors.hpp"
#include "lmrl/ops.hpp"

namespace lmrl {

SimilarityVariant similarity_from_string(const std::string& s) {
    if (s == "lmrl") return SimilarityVariant::lmrl;
    if (s == "mpr_tsm") return SimilarityVariant::mpr_tsm;
    if (s == "tsm") return SimilarityVariant::tsm;
    if (s == "sa") return SimilarityVariant::sa;
    throw ConfigError("unknown similarity variant '" + s +
                      "' (expected lmrl, mpr_tsm, tsm or sa)");
}

std::string to_string(SimilarityVariant v) {
    switch (v) {
        case SimilarityVariant::lmrl: return "lmrl";
        case SimilarityVariant::mpr_tsm: return "mpr_tsm";
        case SimilarityVariant::tsm: return "tsm";
        case SimilarityVariant::sa: return "sa";
    }
    throw ConfigError("invalid similarity variant value");
}

int ModelConfig::branch_dim() const {
    switch (similarity) {
        case SimilarityVariant::lmrl:
        case SimilarityVariant::mpr_tsm: return mpr.scales;
        case SimilarityVariant::tsm: return seq_len;
        case SimilarityVariant::sa: return embed_dim;
    }
    throw ConfigError("invalid similarity variant value");
}

void ModelConfig::validate() const {
    if (seq_len < 1) throw ConfigError("seq_len must be positive");
    if (embed_dim < 1) throw ConfigError("embed_dim must be positive");
    if (similarity == SimilarityVariant::lmrl || similarity == SimilarityVariant::mpr_tsm)
        mpr.validate(seq_len);
    rfl.validate(seq_len);
    fusion.validate();
}

namespace {

int sa_heads(const ModelConfig& cfg) {
    return cfg.embed_dim % cfg.mpr.attention_heads == 0 ? cfg.mpr.attention_heads : 1;
}

AttentionParams sa_branch_params(ParamStore& params) {
    return {params.get("sabranch.attn.wq"), params.get("sabranch.attn.bq"),
            params.get("sabranch.attn.wk"), params.get("sabranch.attn.bk"),
            params.get("sabranch.attn.wv"), params.get("sabranch.attn.bv"),
            params.get("sabranch.attn.wo"), params.get("sabranch.attn.bo")};
}

}  // namespace

void init_model_params(ParamStore& params, const ModelConfig& cfg) {
    cfg.validate();
    switch (cfg.similarity) {
        case SimilarityVariant::lmrl:
            init_mpr_params(params, cfg.mpr, cfg.embed_dim, cfg.seq_len);
            break;
        case SimilarityVariant::mpr_tsm:
            init_mpr_params(params, cfg.mpr, cfg.embed_dim, cfg.seq_len,
                            /*learned_similarity=*/false);
            break;
        case SimilarityVariant::tsm:
            break;
        case SimilarityVariant::sa: {
            const int c = cfg.embed_dim;
            for (const char* name : {"sabranch.attn.wq", "sabranch.attn.wk", "sabranch.attn.wv",
                                     "sabranch.attn.wo"})
                params.create(name, {c, c}, c);
            for (const char* name : {"sabranch.attn.bq", "sabranch.attn.bk", "sabranch.attn.bv",
                                     "sabranch.attn.bo"})
                params.create(name, {c}, c);
            break;
        }
    }
    init_rfl_params(params, cfg.rfl, cfg.embed_dim);
    init_fusion_params(params, cfg.fusion, cfg.branch_dim(), cfg.rfl.channels);
}

ModelOutputs model_forward(const Tensor& x, const ModelConfig& cfg, ParamStore& params) {
    if (!x.defined() || x.ndim() != 2 || x.rows() != cfg.seq_len || x.cols() != cfg.embed_dim)
        throw ShapeError("model input must be [" + std::to_string(cfg.seq_len) + " x " +
                         std::to_string(cfg.embed_dim) + "], got " +
                         (x.defined() ? x.shape_str() : "(undefined)"));
    ModelOutputs out;
    out.rfl_features = tcn_forward(x, cfg.rfl, params);
    out.fg = foreground_logits(out.rfl_features, params);

    switch (cfg.similarity) {
        case SimilarityVariant::lmrl:
            out.stack = mpr_forward(x, cfg.mpr, params);
            out.branch_out = out.stack->P;
            break;
        case SimilarityVariant::mpr_tsm:
            out.stack = mpr_from_similarity(neg_sqdist_matrix(x), cfg.mpr, params);
            out.branch_out = out.stack->P;
            break;
        case SimilarityVariant::tsm:
            out.branch_out = neg_sqdist_matrix(x);
            break;
        case SimilarityVariant::sa:
            out.branch_out = self_attention(x, sa_heads(cfg), sa_branch_params(params));
            break;
    }

    out.fused = integrate(out.branch_out, out.rfl_features, cfg.fusion, params);
    out.density = predict_density(out.fused, cfg.fusion, params);
    return out;
}

}  // namespace lmrl
