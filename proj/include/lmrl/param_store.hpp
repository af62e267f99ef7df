#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "lmrl/tensor.hpp"

namespace lmrl {

// Named bag of trainable tensors.  Each parameter is initialized from its own
// RNG stream derived from (seed, name), so initial values depend only on the
// seed and the name — not on creation order.
class ParamStore {
public:
    explicit ParamStore(uint64_t seed) : seed_(seed) {}

    // uniform(-1/sqrt(fan_in), +1/sqrt(fan_in))
    Tensor& create(const std::string& name, std::vector<int> shape, int fan_in);
    Tensor& create_const(const std::string& name, std::vector<int> shape, double value);

    Tensor& get(const std::string& name);
    const Tensor& get(const std::string& name) const;
    bool has(const std::string& name) const { return params_.count(name) != 0; }

    const std::vector<std::string>& names() const { return order_; }
    uint64_t seed() const { return seed_; }
    long total_size() const;
    void zero_grads();

private:
    Tensor& insert(const std::string& name, Tensor t);

    uint64_t seed_;
    std::vector<std::string> order_;
    std::unordered_map<std::string, Tensor> params_;
};

class AdamOptimizer {
public:
    AdamOptimizer(ParamStore& params, double lr, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8);

    // One Adam update over every parameter, then gradients are cleared.
    // Throws TrainingError naming the parameter if any gradient is non-finite.
    void step();

    long step_count() const { return t_; }
    double lr() const { return lr_; }

private:
    struct Slot {
        std::vector<double> m, v;
    };

    ParamStore& params_;
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::unordered_map<std::string, Slot> state_;
};

}  // namespace lmrl
