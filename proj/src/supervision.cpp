#include "lmrl/supervision.hpp"

#include <cmath>
#include <string>

#include "lmrl/errors.hpp"
#include "lmrl/ops.hpp"

namespace lmrl {

void LossConfig::validate() const {
    if (alpha < 0) throw ConfigError("loss alpha must be nonnegative");
    if (margin < 0) throw ConfigError("triplet margin must be nonnegative");
    if (max_triplets < 1) throw ConfigError("max_triplets must be positive");
    if (!l_den && !l_loc && !l_tri)
        throw ConfigError("at least one loss term must be enabled");
}

namespace {

void check_cycles(const CycleAnnotations& ann, int n) {
    int prev_end = 0;
    for (const auto& [s, e] : ann.cycles) {
        if (s < 0 || e > n)
            throw DataError("cycle [" + std::to_string(s) + ", " + std::to_string(e) +
                            ") out of range for " + std::to_string(n) + " frames");
        if (e <= s)
            throw DataError("cycle [" + std::to_string(s) + ", " + std::to_string(e) +
                            ") is empty or reversed");
        if (s < prev_end)
            throw DataError("cycles overlap or are unsorted at [" + std::to_string(s) + ", " +
                            std::to_string(e) + ")");
        prev_end = e;
    }
}

}  // namespace

std::vector<int> foreground_mask(const CycleAnnotations& ann, int n) {
    check_cycles(ann, n);
    std::vector<int> mask(n, 0);
    for (const auto& [s, e] : ann.cycles)
        for (int t = s; t < e; ++t) mask[t] = 1;
    return mask;
}

DensityMap density_gt(const CycleAnnotations& ann, int n) {
    check_cycles(ann, n);
    DensityMap d;
    d.values = Tensor::zeros({n, 1});
    auto& v = d.values.data();
    for (const auto& [s, e] : ann.cycles) {
        const double mu = (s + e - 1) / 2.0;
        const double sigma = (e - s) / 6.0;
        double mass = 0.0;
        for (int t = s; t < e; ++t) {
            const double z = (t - mu) / sigma;
            v[t] = std::exp(-0.5 * z * z);
            mass += v[t];
        }
        for (int t = s; t < e; ++t) v[t] /= mass;
    }
    d.count = sum_all(d.values);
    return d;
}

Tensor loss_count(const DensityMap& pred, const DensityMap& gt, double alpha) {
    if (pred.values.shape() != gt.values.shape())
        throw ShapeError("density shapes disagree: " + pred.values.shape_str() + " vs " +
                         gt.values.shape_str());
    const double c_gt = count_from_density(gt);
    if (c_gt <= 0.0) throw DataError("ground-truth count must be positive");
    Tensor rel = scale(abs_val(add_const(pred.count, -c_gt)), 1.0 / c_gt);
    if (alpha == 0.0) return rel;
    Tensor mse = mean_all(square(sub(pred.values, gt.values)));
    return add(rel, scale(mse, alpha));
}

Tensor loss_loc(const Tensor& probs, const std::vector<int>& mask) {
    if (!probs.defined() || probs.ndim() != 2 || probs.cols() != 2)
        throw ShapeError("loss_loc expects [N x 2] probabilities, got " +
                         (probs.defined() ? probs.shape_str() : "(undefined)"));
    const int n = probs.rows();
    if (static_cast<int>(mask.size()) != n)
        throw ShapeError("mask length " + std::to_string(mask.size()) +
                         " does not match probabilities with " + std::to_string(n) + " rows");
    Tensor sel = Tensor::zeros({n, 2});
    for (int t = 0; t < n; ++t) {
        if (mask[t] != 0 && mask[t] != 1)
            throw DataError("foreground mask must be binary, found " + std::to_string(mask[t]));
        sel.data()[t * 2 + mask[t]] = 1.0;
    }
    Tensor ce = scale(sum_all(mul(log_clamped(probs, 1e-12), sel)), -1.0 / n);
    if (n < 2) return ce;
    Tensor diff = sub(slice_rows(probs, 1, n), slice_rows(probs, 0, n - 1));
    Tensor smooth = scale(sum_all(square(diff)), 1.0 / (2.0 * n));
    return add(ce, smooth);
}

std::vector<Triplet> sample_triplets(const std::vector<int>& mask, Rng& rng, int max_triplets) {
    std::vector<int> fg, bg;
    for (size_t t = 0; t < mask.size(); ++t) (mask[t] ? fg : bg).push_back(static_cast<int>(t));
    if (fg.size() < 2 || bg.empty() || max_triplets < 1) return {};
    std::vector<Triplet> out;
    out.reserve(static_cast<size_t>(max_triplets));
    const int nf = static_cast<int>(fg.size());
    const int nb = static_cast<int>(bg.size());
    for (int i = 0; i < max_triplets; ++i) {
        const int ai = rng.uniform_int(0, nf - 1);
        int pi = rng.uniform_int(0, nf - 2);
        if (pi >= ai) ++pi;
        const int ni = rng.uniform_int(0, nb - 1);
        out.push_back({fg[ai], fg[pi], bg[ni]});
    }
    return out;
}

Tensor loss_triplet(const Tensor& emb, const std::vector<Triplet>& triplets, double margin) {
    if (triplets.empty()) return Tensor::scalar(0.0);
    const int n = emb.rows();
    std::vector<int> as, ps, ns;
    for (const Triplet& t : triplets) {
        if (t.anchor < 0 || t.anchor >= n || t.positive < 0 || t.positive >= n ||
            t.negative < 0 || t.negative >= n)
            throw DataError("triplet index out of range for " + std::to_string(n) + " rows");
        as.push_back(t.anchor);
        ps.push_back(t.positive);
        ns.push_back(t.negative);
    }
    Tensor a = gather_rows(emb, as);
    Tensor dap = sqrt_guarded(sum_rows(square(sub(a, gather_rows(emb, ps)))));
    Tensor dan = sqrt_guarded(sum_rows(square(sub(a, gather_rows(emb, ns)))));
    return mean_all(relu(add_const(sub(dap, dan), margin)));
}

Tensor total_loss(const DensityMap& pred, const DensityMap& gt, const Tensor& probs,
                  const std::vector<int>& mask, const Tensor& branch_emb,
                  const std::vector<Triplet>& triplets, const LossConfig& cfg) {
    cfg.validate();
    Tensor total;
    auto accumulate = [&total](Tensor term) {
        total = total.defined() ? add(total, term) : term;
    };
    if (cfg.l_den) accumulate(loss_count(pred, gt, cfg.alpha));
    if (cfg.l_loc) accumulate(loss_loc(probs, mask));
    if (cfg.l_tri) accumulate(loss_triplet(branch_emb, triplets, cfg.margin));
    return total;
}

}  // namespace lmrl
