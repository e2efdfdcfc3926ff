// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "pulsevoc/nn/tensor.h"

namespace pulsevoc::nn {

// Graph node. Leaves that require grad are parameters; interior nodes keep
// their inputs alive only while something requires grad.
struct Node {
  Tensor value;
  Tensor grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  // Zero-initialized on first use.
  Tensor& grad_buffer();
};

class Var {
 public:
  Var() = default;
  explicit Var(Tensor value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Tensor& value() const { return node_->value; }
  // Parameter updates only; never mutate an interior node.
  Tensor& mutable_value() { return node_->value; }
  const Tensor& grad() const { return node_->grad; }
  Tensor& mutable_grad() { return node_->grad_buffer(); }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  const Shape& shape() const { return node_->value.shape(); }
  std::size_t dim(std::size_t i) const { return node_->value.dim(i); }
  const std::shared_ptr<Node>& node() const { return node_; }

  void zero_grad();
  // Constant sharing this value, cut from the graph.
  Var detach() const { return Var(node_->value, false); }
  double item() const { return node_->value.item(); }

 private:
  friend Var make_result(Tensor, const std::vector<Var>&, std::function<void(Node&)>);
  std::shared_ptr<Node> node_;
};

inline Var constant(Tensor t) { return Var(std::move(t), false); }
inline Var parameter(Tensor t) { return Var(std::move(t), true); }

// Wraps an op result. The backward closure receives the output node and
// accumulates into node.inputs[i]->grad_buffer() for inputs that require
// grad. Both are dropped when no input requires grad.
Var make_result(Tensor value, const std::vector<Var>& inputs, std::function<void(Node&)> backward);

// Reverse pass from a single-element root, seeding d(root)/d(root) = 1.
void backward(const Var& root);

// Fingerprint of the branches taken by piecewise ops (leaky_relu sign,
// log_floor clamp, max-pool argmax, mae sign) evaluated on this thread while
// the recorder is alive. Two evaluations with equal fingerprints lie on the
// same smooth piece. Recorders do not nest.
class BranchRecorder {
 public:
  BranchRecorder();
  ~BranchRecorder();
  BranchRecorder(const BranchRecorder&) = delete;
  BranchRecorder& operator=(const BranchRecorder&) = delete;

  std::uint64_t fingerprint() const { return hash_; }
  void mix(std::uint64_t v) { hash_ = (hash_ ^ v) * 1099511628211ULL; }

 private:
  std::uint64_t hash_ = 1469598103934665603ULL;
};

// The active recorder of this thread, or nullptr.
BranchRecorder* active_branch_recorder();

}  // namespace pulsevoc::nn
