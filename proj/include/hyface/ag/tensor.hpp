// Copyright (c) 2026 hyface authors
// Licensed under the Apache License, Version 2.0
//
// Small define-by-run autodiff engine. Nodes are created in program order;
// reverse-topological order is simply descending creation id, which keeps
// backward() deterministic. Double precision throughout so finite-difference
// gradient checks are meaningful.

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <unordered_set>
#include <vector>

#include "hyface/core/error.hpp"
#include "hyface/core/rng.hpp"

namespace hyface::ag {

struct Node {
  std::vector<int> shape;
  std::vector<double> val;
  std::vector<double> grad;  // sized lazily by backward()
  bool requires_grad = false;
  uint64_t id = 0;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void()> backward_fn;

  int64_t numel() const {
    int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
  }
  void ensure_grad() {
    if (grad.size() != val.size()) grad.assign(val.size(), 0.0);
  }
};

inline uint64_t& node_counter() {
  static uint64_t c = 0;
  return c;
}

inline bool& grad_mode() {
  static bool enabled = true;
  return enabled;
}

/// Scoped no-grad region: ops created inside build no graph.
struct NoGradGuard {
  bool prev;
  NoGradGuard() : prev(grad_mode()) { grad_mode() = false; }
  ~NoGradGuard() { grad_mode() = prev; }
};

class Tensor {
 public:
  std::shared_ptr<Node> n;

  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : n(std::move(node)) {}

  bool defined() const { return n != nullptr; }
  const std::vector<int>& shape() const { return n->shape; }
  int dim(int i) const { return n->shape[static_cast<size_t>(i)]; }
  int rank() const { return static_cast<int>(n->shape.size()); }
  int64_t numel() const { return n->numel(); }
  int rows() const { return n->shape.at(0); }
  int cols() const { return n->shape.at(1); }

  std::vector<double>& data() { return n->val; }
  const std::vector<double>& data() const { return n->val; }
  std::vector<double>& grad() { return n->grad; }

  double item() const {
    require(numel() == 1, ErrorCode::ShapeMismatch, "ag", "item() on non-scalar");
    return n->val[0];
  }

  double at(int64_t r, int64_t c) const { return n->val[r * cols() + c]; }

  bool requires_grad() const { return n->requires_grad; }

  static Tensor make(std::vector<int> shape, std::vector<double> val,
                     bool requires_grad = false) {
    auto node = std::make_shared<Node>();
    node->shape = std::move(shape);
    node->val = std::move(val);
    node->requires_grad = requires_grad && grad_mode();
    node->id = ++node_counter();
    int64_t expect = node->numel();
    require(expect == static_cast<int64_t>(node->val.size()),
            ErrorCode::ShapeMismatch, "ag", "data size does not match shape");
    return Tensor(node);
  }

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false) {
    int64_t n = 1;
    for (int d : shape) n *= d;
    return make(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
  }

  static Tensor full(std::vector<int> shape, double v, bool requires_grad = false) {
    int64_t n = 1;
    for (int d : shape) n *= d;
    return make(std::move(shape), std::vector<double>(n, v), requires_grad);
  }

  static Tensor scalar(double v, bool requires_grad = false) {
    return make({1}, {v}, requires_grad);
  }

  static Tensor randn(std::vector<int> shape, Rng& rng, double stdev = 1.0,
                      bool requires_grad = false) {
    int64_t n = 1;
    for (int d : shape) n *= d;
    std::vector<double> v(n);
    for (auto& x : v) x = stdev * rng.normal();
    return make(std::move(shape), std::move(v), requires_grad);
  }

  /// Stop gradients: value copy outside the graph.
  Tensor detach() const {
    return make(n->shape, n->val, false);
  }

  /// Reverse-mode sweep from this scalar.
  void backward() {
    require(numel() == 1, ErrorCode::ShapeMismatch, "ag",
            "backward() must start from a scalar");
    // collect the reachable subgraph
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<Node*> stack{n.get()};
    while (!stack.empty()) {
      Node* cur = stack.back();
      stack.pop_back();
      if (!cur->requires_grad || seen.count(cur)) continue;
      seen.insert(cur);
      order.push_back(cur);
      for (auto& p : cur->parents) stack.push_back(p.get());
    }
    std::sort(order.begin(), order.end(),
              [](const Node* a, const Node* b) { return a->id > b->id; });
    n->ensure_grad();
    n->grad[0] += 1.0;
    for (Node* node : order) {
      if (node->backward_fn) node->backward_fn();
    }
  }
};

// Shared plumbing for op implementations.
inline Tensor op_result(std::vector<int> shape, std::vector<double> val,
                        std::vector<Tensor> parents,
                        std::function<void(Node&)> backward) {
  bool needs = false;
  if (grad_mode())
    for (const auto& p : parents) needs |= p.n->requires_grad;
  Tensor out = Tensor::make(std::move(shape), std::move(val), needs);
  if (needs) {
    for (auto& p : parents) out.n->parents.push_back(p.n);
    Node* self = out.n.get();
    out.n->backward_fn = [self, backward]() { backward(*self); };
  }
  return out;
}

inline void accumulate(Node& parent, int64_t index, double g) {
  parent.ensure_grad();
  parent.grad[index] += g;
}

}  // namespace hyface::ag
