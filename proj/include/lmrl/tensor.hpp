#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace lmrl {

namespace detail {

// Shared node state. Ops create fresh nodes; values are treated as immutable
// once an op has produced them. `parents` + `backprop` form the recorded
// graph, which backward() walks in reverse topological order and then frees.
struct TensorNode {
    std::vector<int> shape;
    std::vector<double> value;
    std::vector<double> grad;  // allocated lazily, same length as value
    bool requires_grad = false;
    bool graph_freed = false;
    std::vector<std::shared_ptr<TensorNode>> parents;
    std::function<void()> backprop;

    long size() const { return static_cast<long>(value.size()); }
    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    }
};

}  // namespace detail

// Value-semantic handle to a graph node. Copies share state.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
    static Tensor full(std::vector<int> shape, double fill, bool requires_grad = false);
    static Tensor from(std::vector<int> shape, std::vector<double> data,
                       bool requires_grad = false);
    static Tensor scalar(double v, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const std::vector<int>& shape() const;
    int ndim() const;
    int dim(int i) const;
    long size() const;
    // 2-d conveniences; throw on other ranks.
    int rows() const;
    int cols() const;

    std::vector<double>& data();
    const std::vector<double>& data() const;
    const std::vector<double>& grad() const;
    bool has_grad() const;
    void ensure_grad();
    void zero_grad();

    bool requires_grad() const;
    void set_requires_grad(bool rg);

    double scalar_value() const;  // size-1 tensors only
    double at(int i) const { return data()[i]; }
    double at(int i, int j) const { return data()[static_cast<long>(i) * cols() + j]; }

    std::string shape_str() const;

    detail::TensorNode* node() const { return node_.get(); }
    const std::shared_ptr<detail::TensorNode>& handle() const { return node_; }

private:
    explicit Tensor(std::shared_ptr<detail::TensorNode> n) : node_(std::move(n)) {}
    std::shared_ptr<detail::TensorNode> node_;
};

// Reverse-mode sweep from a scalar loss. Gradients accumulate additively into
// every requires_grad tensor reachable through the recorded graph; the graph
// is freed afterwards (a second backward through the same nodes throws).
void backward(const Tensor& loss);

// Thread-local recording switch; ops skip taping while disabled.
bool grad_enabled();
struct NoGradGuard {
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool prev_;
};

// Helper for op implementations: marks `out` as requiring grad and attaches
// the closure when recording is on and any parent requires grad.
void attach_backward(Tensor& out, std::vector<Tensor> parents, std::function<void()> fn);

}  // namespace lmrl
