#include "lmrl/tensor.hpp"

#include <sstream>
#include <unordered_set>

#include "lmrl/errors.hpp"

namespace lmrl {

namespace {

thread_local bool g_grad_enabled = true;

long shape_product(const std::vector<int>& shape) {
    long n = 1;
    for (const int d : shape) {
        if (d <= 0) throw ShapeError("tensor dimensions must be positive");
        n *= d;
    }
    return n;
}

}  // namespace

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
    return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(std::vector<int> shape, double fill, bool requires_grad) {
    auto node = std::make_shared<detail::TensorNode>();
    const long n = shape_product(shape);
    node->shape = std::move(shape);
    node->value.assign(static_cast<size_t>(n), fill);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

Tensor Tensor::from(std::vector<int> shape, std::vector<double> data, bool requires_grad) {
    const long n = shape_product(shape);
    if (n != static_cast<long>(data.size()))
        throw ShapeError("data length " + std::to_string(data.size()) +
                         " does not match shape product " + std::to_string(n));
    auto node = std::make_shared<detail::TensorNode>();
    node->shape = std::move(shape);
    node->value = std::move(data);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

Tensor Tensor::scalar(double v, bool requires_grad) {
    return from({1}, {v}, requires_grad);
}

const std::vector<int>& Tensor::shape() const {
    if (!node_) throw UsageError("operation on an undefined tensor");
    return node_->shape;
}

int Tensor::ndim() const { return static_cast<int>(shape().size()); }

int Tensor::dim(int i) const { return shape().at(static_cast<size_t>(i)); }

long Tensor::size() const {
    if (!node_) throw UsageError("operation on an undefined tensor");
    return node_->size();
}

int Tensor::rows() const {
    if (ndim() != 2) throw ShapeError("rows() requires a 2-d tensor, got " + shape_str());
    return node_->shape[0];
}

int Tensor::cols() const {
    if (ndim() != 2) throw ShapeError("cols() requires a 2-d tensor, got " + shape_str());
    return node_->shape[1];
}

std::vector<double>& Tensor::data() {
    if (!node_) throw UsageError("operation on an undefined tensor");
    return node_->value;
}

const std::vector<double>& Tensor::data() const {
    if (!node_) throw UsageError("operation on an undefined tensor");
    return node_->value;
}

const std::vector<double>& Tensor::grad() const {
    if (!node_) throw UsageError("operation on an undefined tensor");
    return node_->grad;
}

bool Tensor::has_grad() const { return node_ && node_->grad.size() == node_->value.size(); }

void Tensor::ensure_grad() {
    if (!node_) throw UsageError("operation on an undefined tensor");
    node_->ensure_grad();
}

void Tensor::zero_grad() {
    if (!node_) throw UsageError("operation on an undefined tensor");
    node_->grad.assign(node_->value.size(), 0.0);
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

void Tensor::set_requires_grad(bool rg) {
    if (!node_) throw UsageError("operation on an undefined tensor");
    node_->requires_grad = rg;
}

double Tensor::scalar_value() const {
    if (size() != 1) throw UsageError("scalar_value() on tensor of shape " + shape_str());
    return node_->value[0];
}

std::string Tensor::shape_str() const {
    if (!node_) return "(undefined)";
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < node_->shape.size(); ++i) {
        if (i) os << 'x';
        os << node_->shape[i];
    }
    os << ']';
    return os.str();
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

void attach_backward(Tensor& out, std::vector<Tensor> parents, std::function<void()> fn) {
    if (!g_grad_enabled) return;
    bool any = false;
    for (const auto& p : parents) any = any || p.requires_grad();
    if (!any) return;
    auto* node = out.node();
    node->requires_grad = true;
    node->parents.reserve(parents.size());
    for (auto& p : parents) node->parents.push_back(p.handle());
    node->backprop = std::move(fn);
}

void backward(const Tensor& loss) {
    if (!loss.defined()) throw UsageError("backward() on an undefined tensor");
    if (loss.size() != 1)
        throw UsageError("backward() requires a scalar loss, got shape " + loss.shape_str());
    auto* root = loss.node();
    if (root->graph_freed)
        throw UsageError("backward() called on a graph that was already freed");
    if (!root->requires_grad) {
        // Nothing reachable requires grad; still a valid (empty) sweep.
        root->graph_freed = !root->parents.empty();
        return;
    }

    // Iterative post-order DFS to get a topological order.
    std::vector<detail::TensorNode*> order;
    std::unordered_set<detail::TensorNode*> visited;
    struct Frame {
        detail::TensorNode* node;
        size_t next_parent;
    };
    std::vector<Frame> stack{{root, 0}};
    visited.insert(root);
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_parent < f.node->parents.size()) {
            detail::TensorNode* p = f.node->parents[f.next_parent++].get();
            if (p->requires_grad && visited.insert(p).second) stack.push_back({p, 0});
        } else {
            order.push_back(f.node);
            stack.pop_back();
        }
    }

    root->ensure_grad();
    root->grad[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        (*it)->ensure_grad();
        if ((*it)->backprop) (*it)->backprop();
    }
    // Free the graph: drop closures and parent links so node memory can be
    // reclaimed as handles go out of scope. Leaf gradients stay in place.
    for (auto* node : order) {
        node->backprop = nullptr;
        if (!node->parents.empty()) {
            node->parents.clear();
            node->graph_freed = true;
        }
    }
}

}  // namespace lmrl
