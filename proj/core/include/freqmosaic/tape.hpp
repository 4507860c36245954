#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "freqmosaic/tensor.hpp"

namespace freqmosaic {

class Tape;

namespace detail {

struct Node {
  bool complex = false;
  Tensor value;          // real nodes
  ComplexTensor cvalue;  // complex nodes
  bool requires_grad = false;
  Tape* tape = nullptr;
  Tensor* bound = nullptr;  // external leaf receiving the gradient
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  // Gradient buffers; empty until something downstream contributes.
  std::vector<double> grad_re;
  std::vector<double> grad_im;

  std::size_t numel() const { return complex ? cvalue.numel() : value.numel(); }
  bool reached() const { return !grad_re.empty(); }
  std::span<double> grad_re_mut();
  std::span<double> grad_im_mut();
};

}  // namespace detail

/// Handle to a real-valued node. Nodes that do not depend on any
/// requires_grad leaf are not recorded and are freed with their last handle.
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

  const Tensor& value() const { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  std::size_t dim(std::size_t i) const { return shape().at(i); }
  bool requires_grad() const { return node_->requires_grad; }
  Tape* tape() const { return node_->tape; }
  bool valid() const { return static_cast<bool>(node_); }

  // Gradient accumulated by the last backward call (zeros if unreached).
  Tensor grad() const;

  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

/// Handle to a complex-valued node. Gradients treat re/im as two
/// independent real planes.
class CVar {
 public:
  CVar() = default;
  explicit CVar(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

  const ComplexTensor& value() const { return node_->cvalue; }
  const Shape& shape() const { return node_->cvalue.shape(); }
  std::size_t dim(std::size_t i) const { return shape().at(i); }
  bool requires_grad() const { return node_->requires_grad; }
  Tape* tape() const { return node_->tape; }

  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

/// Untracked value; never receives a gradient.
Var constant(Tensor value);
CVar constant(ComplexTensor value);

/// Records differentiable operations in creation order and replays them
/// backwards. Single-owner: one thread records and runs backward.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf bound to an external tensor. If `t.requires_grad()`, backward
  // writes d(loss)/d(t) into t's grad buffer (zeros when unreachable).
  Var leaf(Tensor& t);

  // Leaf that owns its value; the gradient is read back through Var::grad.
  Var variable(Tensor value);

  void backward(const Var& loss);

  std::size_t size() const { return nodes_.size(); }
  std::size_t backward_calls() const { return backward_calls_; }

  // Used by op implementations.
  template <typename Fn>
  std::shared_ptr<detail::Node> record(std::shared_ptr<detail::Node> node, Fn&& fn) {
    node->tape = this;
    node->requires_grad = true;
    node->backward = std::forward<Fn>(fn);
    nodes_.push_back(node);
    return node;
  }

 private:
  std::vector<std::shared_ptr<detail::Node>> nodes_;
  std::size_t backward_calls_ = 0;
};

/// Number of Tape::backward calls made on this thread so far.
std::size_t backward_pass_count();

}  // namespace freqmosaic
