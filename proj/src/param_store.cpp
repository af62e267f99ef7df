#include "lmrl/param_store.hpp"

#include <cmath>

#include "lmrl/errors.hpp"
#include "lmrl/kernels.hpp"
#include "lmrl/rng.hpp"

namespace lmrl {

Tensor& ParamStore::insert(const std::string& name, Tensor t) {
    if (params_.count(name))
        throw ConfigError("duplicate parameter name '" + name + "'");
    t.set_requires_grad(true);
    auto [it, ok] = params_.emplace(name, std::move(t));
    (void)ok;
    order_.push_back(name);
    return it->second;
}

Tensor& ParamStore::create(const std::string& name, std::vector<int> shape, int fan_in) {
    if (fan_in < 1) throw ConfigError("parameter '" + name + "' needs positive fan_in");
    Tensor t = Tensor::zeros(shape);
    Rng rng(Rng::derive(seed_, name, 0));
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (auto& v : t.data()) v = rng.uniform(-bound, bound);
    return insert(name, std::move(t));
}

Tensor& ParamStore::create_const(const std::string& name, std::vector<int> shape, double value) {
    return insert(name, Tensor::full(std::move(shape), value));
}

Tensor& ParamStore::get(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw ConfigError("unknown parameter '" + name + "'");
    return it->second;
}

const Tensor& ParamStore::get(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw ConfigError("unknown parameter '" + name + "'");
    return it->second;
}

long ParamStore::total_size() const {
    long n = 0;
    for (const auto& name : order_) n += params_.at(name).size();
    return n;
}

void ParamStore::zero_grads() {
    for (const auto& name : order_) params_.at(name).zero_grad();
}

AdamOptimizer::AdamOptimizer(ParamStore& params, double lr, double beta1, double beta2, double eps)
    : params_(params), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    if (lr <= 0) throw ConfigError("learning rate must be positive");
    if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1)
        throw ConfigError("Adam betas must lie in [0, 1)");
}

void AdamOptimizer::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (const auto& name : params_.names()) {
        Tensor& p = params_.get(name);
        p.ensure_grad();
        const auto& g = p.grad();
        for (const double gv : g)
            if (!std::isfinite(gv))
                throw TrainingError("non-finite gradient in parameter '" + name + "'");
        Slot& slot = state_[name];
        if (slot.m.empty()) {
            slot.m.assign(g.size(), 0.0);
            slot.v.assign(g.size(), 0.0);
        }
        kernels::adam_update(p.data().data(), g.data(), slot.m.data(), slot.v.data(),
                             static_cast<int64_t>(g.size()), lr_, beta1_, beta2_, eps_, bc1, bc2);
        p.zero_grad();
    }
}

}  // namespace lmrl
