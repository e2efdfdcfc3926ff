// Copyright 2026 The pulsevoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "pulsevoc/nn/autograd.h"

#include <fmt/format.h>

#include <unordered_set>

#include "pulsevoc/error.h"

namespace pulsevoc::nn {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(nn::numel(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != nn::numel(shape_)) {
    throw_invalid(fmt::format("tensor data has {} elements, shape {} needs {}", data_.size(),
                              shape_str(shape_), nn::numel(shape_)));
  }
}

double Tensor::item() const {
  if (data_.size() != 1) throw_invalid(fmt::format("item() on tensor of shape {}", shape_str(shape_)));
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
  return Tensor(std::move(shape), data_);
}

Tensor& Node::grad_buffer() {
  if (grad.numel() != value.numel()) grad = Tensor(value.shape(), 0.0);
  return grad;
}

Var::Var(Tensor value, bool requires_grad) : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

void Var::zero_grad() {
  if (node_) node_->grad = Tensor();
}

Var make_result(Tensor value, const std::vector<Var>& inputs, std::function<void(Node&)> backward) {
  Var out(std::move(value), false);
  for (const Var& in : inputs) {
    if (in.requires_grad()) {
      out.node_->requires_grad = true;
      break;
    }
  }
  if (out.node_->requires_grad) {
    out.node_->inputs.reserve(inputs.size());
    for (const Var& in : inputs) out.node_->inputs.push_back(in.node());
    out.node_->backward = std::move(backward);
  }
  return out;
}

void backward(const Var& root) {
  if (!root.defined() || root.value().numel() != 1) {
    throw_invalid("backward() needs a single-element root");
  }
  if (!root.requires_grad()) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{root.node().get(), 0}};
  seen.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (child && child->requires_grad && !seen.count(child)) {
        seen.insert(child);
        stack.push_back({child, 0});
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  root.node()->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward && node->grad.numel() == node->value.numel()) node->backward(*node);
  }
}

namespace {
thread_local BranchRecorder* g_recorder = nullptr;
}  // namespace

BranchRecorder::BranchRecorder() {
  if (g_recorder) throw_invalid("BranchRecorder: recorders do not nest");
  g_recorder = this;
}

BranchRecorder::~BranchRecorder() { g_recorder = nullptr; }

BranchRecorder* active_branch_recorder() { return g_recorder; }

}  // namespace pulsevoc::nn
