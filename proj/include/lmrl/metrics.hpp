#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lmrl/tensor.hpp"

namespace lmrl {

struct PerVideo {
    std::string id;
    double gt_count = 0.0;
    double pred_count = 0.0;
};

struct EvalReport {
    double mae = 0.0;
    double obo = 0.0;        // fraction in [0,1]
    double frame_acc = 0.0;  // percent
    double edit = 0.0;       // percent
    std::map<int, double> f1;  // tau percent -> percent
    std::vector<PerVideo> per_video;
};

// pairs are (gt_count, pred_count); predictions clamped at 0 before scoring.
std::pair<double, double> mae_obo(const std::vector<std::pair<double, double>>& pairs);

double frame_accuracy(const std::vector<int>& pred_mask, const std::vector<int>& gt_mask);

// Masks collapse to maximal-run label sequences; score is normalized
// Levenshtein similarity, in percent.
double edit_score(const std::vector<int>& pred_mask, const std::vector<int>& gt_mask);

// Segment-level F1 with greedy IoU matching at tau percent.
double f1_at(const std::vector<int>& pred_mask, const std::vector<int>& gt_mask,
             double tau_percent);

// Channel-mean autocorrelation baseline: first local peak at lag >= 2 above
// 0.2 gives count N/lag; 0 when no such peak.
double autocorr_count(const Tensor& x);

}  // namespace lmrl
