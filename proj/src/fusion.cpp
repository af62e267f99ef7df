#include "lmrl/fusion.hpp"

#include "lmrl/errors.hpp"
#include "lmrl/ops.hpp"

namespace lmrl {

FusionMode fusion_mode_from_string(const std::string& s) {
    if (s == "rfl_only") return FusionMode::rfl_only;
    if (s == "mpr_only") return FusionMode::mpr_only;
    if (s == "weighted_avg") return FusionMode::weighted_avg;
    if (s == "concat") return FusionMode::concat;
    throw ConfigError("unknown fusion mode '" + s +
                      "' (expected rfl_only, mpr_only, weighted_avg or concat)");
}

std::string to_string(FusionMode m) {
    switch (m) {
        case FusionMode::rfl_only: return "rfl_only";
        case FusionMode::mpr_only: return "mpr_only";
        case FusionMode::weighted_avg: return "weighted_avg";
        case FusionMode::concat: return "concat";
    }
    throw ConfigError("invalid fusion mode value");
}

void FusionConfig::validate() const {
    if (fused_dim < 2 || fused_dim % 2 != 0)
        throw ConfigError("fused_dim must be even and positive, got " + std::to_string(fused_dim));
    if (predictor_layers < 1) throw ConfigError("predictor_layers must be positive");
    if (predictor_heads < 1) throw ConfigError("predictor_heads must be positive");
    if (fused_dim % predictor_heads != 0)
        throw ConfigError("fused_dim " + std::to_string(fused_dim) + " not divisible by " +
                          std::to_string(predictor_heads) + " predictor heads");
}

void init_fusion_params(ParamStore& params, const FusionConfig& cfg, int mpr_dim, int rfl_dim) {
    cfg.validate();
    const int cp = cfg.fused_dim;
    const int half = cp / 2;
    switch (cfg.mode) {
        case FusionMode::rfl_only:
            params.create("fusion.proj_rfl.w", {rfl_dim, cp}, rfl_dim);
            params.create("fusion.proj_rfl.b", {cp}, rfl_dim);
            break;
        case FusionMode::mpr_only:
            params.create("fusion.proj_mpr.w", {mpr_dim, cp}, mpr_dim);
            params.create("fusion.proj_mpr.b", {cp}, mpr_dim);
            break;
        case FusionMode::weighted_avg:
            params.create("fusion.proj_mpr.w", {mpr_dim, cp}, mpr_dim);
            params.create("fusion.proj_mpr.b", {cp}, mpr_dim);
            params.create("fusion.proj_rfl.w", {rfl_dim, cp}, rfl_dim);
            params.create("fusion.proj_rfl.b", {cp}, rfl_dim);
            params.create_const("fusion.sigma1", {1}, 0.5);
            params.create_const("fusion.sigma2", {1}, 0.5);
            break;
        case FusionMode::concat:
            params.create("fusion.proj_mpr.w", {mpr_dim, half}, mpr_dim);
            params.create("fusion.proj_mpr.b", {half}, mpr_dim);
            params.create("fusion.proj_rfl.w", {rfl_dim, half}, rfl_dim);
            params.create("fusion.proj_rfl.b", {half}, rfl_dim);
            break;
    }
    params.create_const("fusion.ln.gain", {cp}, 1.0);
    params.create_const("fusion.ln.shift", {cp}, 0.0);

    for (int l = 0; l < cfg.predictor_layers; ++l) {
        const std::string p = "predictor.layer" + std::to_string(l);
        for (const char* name : {".attn.wq", ".attn.wk", ".attn.wv", ".attn.wo"})
            params.create(p + name, {cp, cp}, cp);
        for (const char* name : {".attn.bq", ".attn.bk", ".attn.bv", ".attn.bo"})
            params.create(p + name, {cp}, cp);
        params.create(p + ".ff1.w", {cp, 4 * cp}, cp);
        params.create(p + ".ff1.b", {4 * cp}, cp);
        params.create(p + ".ff2.w", {4 * cp, cp}, 4 * cp);
        params.create(p + ".ff2.b", {cp}, 4 * cp);
        params.create_const(p + ".ln1.gain", {cp}, 1.0);
        params.create_const(p + ".ln1.shift", {cp}, 0.0);
        params.create_const(p + ".ln2.gain", {cp}, 1.0);
        params.create_const(p + ".ln2.shift", {cp}, 0.0);
    }
    params.create("predictor.head.w", {cp, 1}, cp);
    params.create("predictor.head.b", {1}, cp);
}

namespace {

Tensor project(const Tensor& x, ParamStore& params, const std::string& which) {
    return linear(x, params.get("fusion.proj_" + which + ".w"),
                  params.get("fusion.proj_" + which + ".b"));
}

}  // namespace

Tensor integrate(const Tensor& mpr_out, const Tensor& rfl_out, const FusionConfig& cfg,
                 ParamStore& params) {
    cfg.validate();
    Tensor combined;
    switch (cfg.mode) {
        case FusionMode::rfl_only:
            combined = project(rfl_out, params, "rfl");
            break;
        case FusionMode::mpr_only:
            combined = project(mpr_out, params, "mpr");
            break;
        case FusionMode::weighted_avg:
            combined = add(mul_scalar(project(mpr_out, params, "mpr"), params.get("fusion.sigma1")),
                           mul_scalar(project(rfl_out, params, "rfl"), params.get("fusion.sigma2")));
            break;
        case FusionMode::concat:
            combined = concat_cols(
                {project(mpr_out, params, "mpr"), project(rfl_out, params, "rfl")});
            break;
    }
    return relu(layer_norm(combined, params.get("fusion.ln.gain"), params.get("fusion.ln.shift"),
                           1e-5));
}

DensityMap predict_density(const Tensor& fused, const FusionConfig& cfg, ParamStore& params) {
    cfg.validate();
    Tensor x = fused;
    for (int l = 0; l < cfg.predictor_layers; ++l) {
        const std::string p = "predictor.layer" + std::to_string(l);
        AttentionParams attn{params.get(p + ".attn.wq"), params.get(p + ".attn.bq"),
                             params.get(p + ".attn.wk"), params.get(p + ".attn.bk"),
                             params.get(p + ".attn.wv"), params.get(p + ".attn.bv"),
                             params.get(p + ".attn.wo"), params.get(p + ".attn.bo")};
        x = layer_norm(add(x, self_attention(x, cfg.predictor_heads, attn)),
                       params.get(p + ".ln1.gain"), params.get(p + ".ln1.shift"), 1e-5);
        Tensor ff = linear(relu(linear(x, params.get(p + ".ff1.w"), params.get(p + ".ff1.b"))),
                           params.get(p + ".ff2.w"), params.get(p + ".ff2.b"));
        x = layer_norm(add(x, ff), params.get(p + ".ln2.gain"), params.get(p + ".ln2.shift"),
                       1e-5);
    }
    DensityMap d;
    d.values = linear(x, params.get("predictor.head.w"), params.get("predictor.head.b"));
    d.count = sum_all(d.values);
    return d;
}

double count_from_density(const DensityMap& d) {
    double acc = 0.0;
    for (const double v : d.values.data()) acc += v;
    return acc;
}

}  // namespace lmrl
