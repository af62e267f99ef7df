#include "lmrl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lmrl/errors.hpp"

namespace lmrl {

std::pair<double, double> mae_obo(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.empty()) throw DataError("mae_obo needs at least one video");
    double mae = 0.0, obo = 0.0;
    for (const auto& [gt, pred] : pairs) {
        if (gt <= 0.0) throw DataError("ground-truth count must be positive");
        const double p = std::max(pred, 0.0);
        mae += std::fabs(p - gt) / gt;
        if (std::fabs(p - gt) <= 1.0) obo += 1.0;
    }
    const double n = static_cast<double>(pairs.size());
    return {mae / n, obo / n};
}

namespace {

void check_masks(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size())
        throw DataError("mask lengths disagree: " + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()));
    if (a.empty()) throw DataError("masks must be non-empty");
}

std::vector<int> run_labels(const std::vector<int>& mask) {
    std::vector<int> labels;
    for (size_t t = 0; t < mask.size(); ++t)
        if (t == 0 || mask[t] != mask[t - 1]) labels.push_back(mask[t]);
    return labels;
}

// [start, end) spans of foreground runs
std::vector<std::pair<int, int>> fg_segments(const std::vector<int>& mask) {
    std::vector<std::pair<int, int>> segs;
    const int n = static_cast<int>(mask.size());
    int t = 0;
    while (t < n) {
        if (mask[t]) {
            int s = t;
            while (t < n && mask[t]) ++t;
            segs.emplace_back(s, t);
        } else {
            ++t;
        }
    }
    return segs;
}

int levenshtein(const std::vector<int>& a, const std::vector<int>& b) {
    const size_t n = a.size(), m = b.size();
    std::vector<int> prev(m + 1), cur(m + 1);
    for (size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
    for (size_t i = 1; i <= n; ++i) {
        cur[0] = static_cast<int>(i);
        for (size_t j = 1; j <= m; ++j) {
            const int sub_cost = a[i - 1] == b[j - 1] ? 0 : 1;
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + sub_cost});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

double iou(std::pair<int, int> a, std::pair<int, int> b) {
    const int inter = std::max(0, std::min(a.second, b.second) - std::max(a.first, b.first));
    const int uni = (a.second - a.first) + (b.second - b.first) - inter;
    return uni > 0 ? static_cast<double>(inter) / uni : 0.0;
}

}  // namespace

double frame_accuracy(const std::vector<int>& pred_mask, const std::vector<int>& gt_mask) {
    check_masks(pred_mask, gt_mask);
    int match = 0;
    for (size_t t = 0; t < gt_mask.size(); ++t)
        if (pred_mask[t] == gt_mask[t]) ++match;
    return 100.0 * match / static_cast<double>(gt_mask.size());
}

double edit_score(const std::vector<int>& pred_mask, const std::vector<int>& gt_mask) {
    check_masks(pred_mask, gt_mask);
    const std::vector<int> lp = run_labels(pred_mask);
    const std::vector<int> lg = run_labels(gt_mask);
    const int dist = levenshtein(lp, lg);
    const double denom = static_cast<double>(std::max(lp.size(), lg.size()));
    return 100.0 * (1.0 - dist / denom);
}

double f1_at(const std::vector<int>& pred_mask, const std::vector<int>& gt_mask,
             double tau_percent) {
    check_masks(pred_mask, gt_mask);
    if (tau_percent <= 0.0 || tau_percent >= 100.0)
        throw ConfigError("f1 overlap threshold must lie in (0, 100)");
    const auto pred = fg_segments(pred_mask);
    const auto gt = fg_segments(gt_mask);
    if (pred.empty() && gt.empty()) return 100.0;
    if (pred.empty() || gt.empty()) return 0.0;
    const double tau = tau_percent / 100.0;
    std::vector<char> used(pred.size(), 0);
    int tp = 0;
    for (const auto& g : gt) {
        int best = -1;
        double best_iou = 0.0;
        for (size_t i = 0; i < pred.size(); ++i) {
            if (used[i]) continue;
            const double v = iou(g, pred[i]);
            if (v > best_iou) {
                best_iou = v;
                best = static_cast<int>(i);
            }
        }
        if (best >= 0 && best_iou >= tau) {
            used[best] = 1;
            ++tp;
        }
    }
    const double precision = static_cast<double>(tp) / pred.size();
    const double recall = static_cast<double>(tp) / gt.size();
    if (precision + recall == 0.0) return 0.0;
    return 100.0 * 2.0 * precision * recall / (precision + recall);
}

double autocorr_count(const Tensor& x) {
    if (!x.defined() || x.ndim() != 2 || x.rows() < 4)
        throw DataError("autocorr_count needs a [N x C] sequence with N >= 4");
    const int n = x.rows(), c = x.cols();
    std::vector<double> signal(n, 0.0);
    for (int t = 0; t < n; ++t) {
        double acc = 0.0;
        for (int ch = 0; ch < c; ++ch) acc += x.at(t, ch);
        signal[t] = acc / c;
    }
    double mean = 0.0;
    for (const double v : signal) mean += v;
    mean /= n;
    for (double& v : signal) v -= mean;
    double norm = 0.0;
    for (const double v : signal) norm += v * v;
    if (norm <= 0.0) return 0.0;

    const int max_lag = n / 2;
    std::vector<double> r(max_lag + 1, 0.0);
    for (int lag = 1; lag <= max_lag; ++lag) {
        double acc = 0.0;
        for (int t = 0; t + lag < n; ++t) acc += signal[t] * signal[t + lag];
        r[lag] = acc / norm;
    }
    for (int lag = 2; lag <= max_lag; ++lag) {
        const double left = r[lag - 1];
        const double right = lag + 1 <= max_lag ? r[lag + 1] : -1.0;
        if (r[lag] > 0.2 && r[lag] > left && r[lag] >= right)
            return static_cast<double>(n) / lag;
    }
    return 0.0;
}

}  // namespace lmrl
