#include "lmrl/rfl.hpp"

#include <cstdio>
#include <string>

#include "lmrl/errors.hpp"
#include "lmrl/ops.hpp"

namespace lmrl {

int RflConfig::receptive_field() const {
    long spread = 0;
    long d = 1;
    for (int i = 0; i < n_blocks; ++i) {
        spread += d;
        d *= dilation_base;
    }
    return static_cast<int>(1 + (kernel_size - 1) * spread);
}

void RflConfig::validate(int seq_len) const {
    if (n_blocks < 1) throw ConfigError("rfl n_blocks must be positive");
    if (channels < 1) throw ConfigError("rfl channels must be positive");
    if (kernel_size < 1 || kernel_size % 2 == 0)
        throw ConfigError("rfl kernel_size must be odd and positive");
    if (dilation_base < 1) throw ConfigError("rfl dilation_base must be positive");
    const int rf = receptive_field();
    if (rf > 4 * seq_len)
        std::fprintf(stderr,
                     "lmrl: warning: rfl receptive field %d exceeds 4x sequence length %d\n", rf,
                     seq_len);
}

void init_rfl_params(ParamStore& params, const RflConfig& cfg, int embed_dim) {
    params.create("rfl.entry.w", {1, embed_dim, cfg.channels}, embed_dim);
    params.create("rfl.entry.b", {cfg.channels}, embed_dim);
    const int ch = cfg.channels;
    for (int i = 0; i < cfg.n_blocks; ++i) {
        const std::string p = "rfl.block" + std::to_string(i);
        params.create(p + ".dilated.w", {cfg.kernel_size, ch, ch}, cfg.kernel_size * ch);
        params.create(p + ".dilated.b", {ch}, cfg.kernel_size * ch);
        params.create(p + ".pointwise.w", {1, ch, ch}, ch);
        params.create(p + ".pointwise.b", {ch}, ch);
    }
    params.create("rfl.head.w", {ch, 2}, ch);
    params.create("rfl.head.b", {2}, ch);
}

Tensor tcn_forward(const Tensor& x, const RflConfig& cfg, ParamStore& params) {
    cfg.validate(x.rows());
    Tensor h = conv1d(x, params.get("rfl.entry.w"), params.get("rfl.entry.b"), 1);
    int dilation = 1;
    for (int i = 0; i < cfg.n_blocks; ++i) {
        const std::string p = "rfl.block" + std::to_string(i);
        Tensor b = relu(conv1d(h, params.get(p + ".dilated.w"), params.get(p + ".dilated.b"),
                               dilation));
        b = conv1d(b, params.get(p + ".pointwise.w"), params.get(p + ".pointwise.b"), 1);
        h = add(h, b);
        dilation *= cfg.dilation_base;
    }
    return h;
}

ForegroundPrediction foreground_logits(const Tensor& features, ParamStore& params) {
    ForegroundPrediction out;
    out.logits = linear(features, params.get("rfl.head.w"), params.get("rfl.head.b"));
    out.probs = softmax_rows(out.logits);
    const int n = out.probs.rows();
    out.hard_mask.resize(n);
    for (int t = 0; t < n; ++t)
        out.hard_mask[t] = out.probs.at(t, 1) > out.probs.at(t, 0) ? 1 : 0;
    return out;
}

}  // namespace lmrl
