#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "bdss/errors.hpp"

namespace bdss {

using Shape = std::vector<int>;

std::string shape_str(const Shape& s);
std::size_t shape_numel(const Shape& s);  // throws config_error on non-positive extents

// Graph recording switch. Ops built while recording is off produce plain
// value tensors with no parents, so inference frees intermediates eagerly.
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

// Dense row-major tensor doubling as a reverse-mode autodiff node. Copies are
// shared handles. Values are written once by the producing op; leaves (inputs
// and parameters) may be mutated between graph builds. Gradients accumulate
// additively on leaves until zero_grad().
template <typename T>
class Tensor {
 public:
  struct Node {
    Shape shape;
    std::vector<T> values;
    std::vector<T> grad;  // empty until first accumulation
    bool requires_grad = false;
    std::vector<Tensor<T>> parents;       // empty for leaves
    std::function<void(Node&)> backprop;  // empty for leaves

    static void ensure_grad(Node& n) {
      if (n.grad.empty()) n.grad.assign(n.values.size(), T(0));
    }
  };

  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    const std::size_t n = shape_numel(shape);
    return leaf(std::move(shape), std::vector<T>(n, T(0)), requires_grad);
  }

  static Tensor full(Shape shape, T value, bool requires_grad = false) {
    const std::size_t n = shape_numel(shape);
    return leaf(std::move(shape), std::vector<T>(n, value), requires_grad);
  }

  static Tensor from(Shape shape, std::vector<T> values, bool requires_grad = false) {
    if (shape_numel(shape) != values.size())
      throw config_error("tensor shape " + shape_str(shape) + " does not match " +
                         std::to_string(values.size()) + " values");
    return leaf(std::move(shape), std::move(values), requires_grad);
  }

  static Tensor scalar(T value) { return from({1}, {value}); }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return n().shape; }
  int dim(int i) const { return n().shape.at(static_cast<std::size_t>(i)); }
  int rank() const { return static_cast<int>(n().shape.size()); }
  std::size_t numel() const { return n().values.size(); }

  std::span<const T> data() const { return {n().values.data(), n().values.size()}; }
  std::span<T> values() { return {n().values.data(), n().values.size()}; }
  T item() const {
    if (numel() != 1) throw config_error("item() requires a single-element tensor");
    return n().values[0];
  }

  bool requires_grad() const { return n().requires_grad; }
  void set_requires_grad(bool rg) { n().requires_grad = rg; }
  bool is_leaf() const { return !n().backprop; }

  bool has_grad() const { return !n().grad.empty(); }
  std::span<const T> grad() const { return {n().grad.data(), n().grad.size()}; }
  std::span<T> grad_values() {
    Node::ensure_grad(n());
    return {n().grad.data(), n().grad.size()};
  }
  void zero_grad() {
    auto& g = n().grad;
    std::fill(g.begin(), g.end(), T(0));
  }

  // Reverse-mode sweep from a scalar. Leaf gradients accumulate additively
  // across repeated calls; interior gradients are rebuilt per sweep.
  void backward() const;

  Node* node() const { return node_.get(); }

  // Op builder. When recording is off or no parent requires grad, the result
  // is a plain leaf-like value node.
  static Tensor make_node(Shape shape, std::vector<T> values, std::vector<Tensor<T>> parents,
                          std::function<void(Node&)> backprop) {
    if (shape_numel(shape) != values.size())
      throw config_error("op produced " + std::to_string(values.size()) +
                         " values for shape " + shape_str(shape));
    bool track = grad_enabled();
    if (track) {
      track = false;
      for (const auto& p : parents) track = track || p.requires_grad();
    }
    Tensor out;
    out.node_ = std::make_shared<Node>();
    out.node_->shape = std::move(shape);
    out.node_->values = std::move(values);
    if (track) {
      out.node_->requires_grad = true;
      out.node_->parents = std::move(parents);
      out.node_->backprop = std::move(backprop);
    }
    return out;
  }

 private:
  static Tensor leaf(Shape shape, std::vector<T> values, bool requires_grad) {
    Tensor t;
    t.node_ = std::make_shared<Node>();
    t.node_->shape = std::move(shape);
    t.node_->values = std::move(values);
    t.node_->requires_grad = requires_grad;
    return t;
  }

  Node& n() const {
    if (!node_) throw config_error("use of undefined tensor");
    return *node_;
  }

  std::shared_ptr<Node> node_;
};

template <typename T>
void Tensor<T>::backward() const {
  Node& root = n();
  if (root.values.size() != 1)
    throw config_error("backward requires a scalar loss, got shape " + shape_str(root.shape));
  if (!root.requires_grad) return;

  // Reverse post-order DFS over grad-requiring nodes: consumers before parents.
  std::vector<Node*> order;
  std::vector<std::pair<Node*, std::size_t>> stack;
  std::unordered_set<Node*> visited;
  stack.emplace_back(&root, 0);
  visited.insert(&root);
  while (!stack.empty()) {
    Node* node = stack.back().first;
    const std::size_t i = stack.back().second;
    if (i < node->parents.size()) {
      ++stack.back().second;
      Node* parent = node->parents[i].node();
      if (parent->requires_grad && visited.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* node : order)
    if (node->backprop) node->grad.clear();
  Node::ensure_grad(root);
  root.grad[0] += T(1);

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backprop && !node->grad.empty()) node->backprop(*node);
  }
}

}  // namespace bdss
