#pragma once

#include <vector>

#include "lmrl/fusion.hpp"
#include "lmrl/rng.hpp"
#include "lmrl/synthgen.hpp"
#include "lmrl/tensor.hpp"

namespace lmrl {

struct LossConfig {
    double alpha = 1.0;   // weight of the density MSE inside the counting loss
    double margin = 0.5;  // triplet hinge margin
    bool l_den = true;
    bool l_loc = true;
    bool l_tri = true;
    int max_triplets = 32;

    void validate() const;
};

struct Triplet {
    int anchor = 0;
    int positive = 0;
    int negative = 0;
};

// mask[t] = 1 iff t falls inside some annotated cycle.
std::vector<int> foreground_mask(const CycleAnnotations& ann, int n);

// Per cycle: discretized Gaussian centered at (s+e-1)/2 with sigma=(e-s)/6,
// truncated to [s,e) and renormalized so each cycle contributes mass exactly 1.
DensityMap density_gt(const CycleAnnotations& ann, int n);

// |c - c_gt| / c_gt + alpha * mean((y - y_gt)^2)
Tensor loss_count(const DensityMap& pred, const DensityMap& gt, double alpha);

// Mean cross-entropy against the true class plus (1/2N) * sum of squared
// temporal probability differences.
Tensor loss_loc(const Tensor& probs, const std::vector<int>& mask);

// Up to max_triplets (anchor, positive) foreground pairs with a background
// negative; empty when the mask cannot support one.
std::vector<Triplet> sample_triplets(const std::vector<int>& mask, Rng& rng, int max_triplets);

// Mean over triplets of max{d(a,p) - d(a,n) + margin, 0} with L2 distance.
Tensor loss_triplet(const Tensor& emb, const std::vector<Triplet>& triplets, double margin);

Tensor total_loss(const DensityMap& pred, const DensityMap& gt, const Tensor& probs,
                  const std::vector<int>& mask, const Tensor& branch_emb,
                  const std::vector<Triplet>& triplets, const LossConfig& cfg);

}  // namespace lmrl
