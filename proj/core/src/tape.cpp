#include "freqmosaic/tape.hpp"

#include <algorithm>
#include <unordered_map>

#include "freqmosaic/error.hpp"

namespace freqmosaic {
namespace {
thread_local std::size_t g_backward_passes = 0;
}

namespace detail {

std::span<double> Node::grad_re_mut() {
  if (grad_re.empty()) grad_re.assign(numel(), 0.0);
  return grad_re;
}

std::span<double> Node::grad_im_mut() {
  if (grad_re.empty()) grad_re.assign(numel(), 0.0);
  if (grad_im.empty()) grad_im.assign(numel(), 0.0);
  return grad_im;
}

}  // namespace detail

Tensor Var::grad() const {
  if (!node_->reached()) return Tensor::zeros(shape());
  return Tensor(shape(), node_->grad_re);
}

Var constant(Tensor value) {
  auto node = std::make_shared<detail::Node>();
  node->value = std::move(value);
  return Var(std::move(node));
}

CVar constant(ComplexTensor value) {
  auto node = std::make_shared<detail::Node>();
  node->complex = true;
  node->cvalue = std::move(value);
  return CVar(std::move(node));
}

Var Tape::leaf(Tensor& t) {
  auto node = std::make_shared<detail::Node>();
  node->value = Tensor(t.shape(), t.storage());
  node->bound = &t;
  if (!t.requires_grad()) return Var(std::move(node));
  return Var(record(std::move(node), std::function<void(detail::Node&)>{}));
}

Var Tape::variable(Tensor value) {
  auto node = std::make_shared<detail::Node>();
  node->value = std::move(value);
  return Var(record(std::move(node), std::function<void(detail::Node&)>{}));
}

void Tape::backward(const Var& loss) {
  require(loss.valid(), "backward on an empty handle");
  require(loss.value().numel() == 1,
          "backward requires a scalar loss, got shape " + shape_string(loss.shape()));
  require(!loss.requires_grad() || loss.tape() == this, "loss was not produced on this tape");

  for (auto& n : nodes_) {
    n->grad_re.clear();
    n->grad_im.clear();
  }
  if (loss.requires_grad()) {
    loss.node()->grad_re_mut()[0] = 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
      auto& n = **it;
      if (n.reached() && n.backward) n.backward(n);
    }
  }

  // The same external tensor may be bound more than once; contributions add.
  std::unordered_map<Tensor*, std::vector<double>> leaf_grads;
  for (auto& n : nodes_) {
    if (!n->bound || !n->bound->requires_grad()) continue;
    auto& g = leaf_grads[n->bound];
    if (g.empty()) g.assign(n->bound->numel(), 0.0);
    if (n->reached())
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n->grad_re[i];
  }
  for (auto& [tensor, g] : leaf_grads) tensor->set_grad(std::move(g));

  ++backward_calls_;
  ++g_backward_passes;
}

std::size_t backward_pass_count() { return g_backward_passes; }

}  // namespace freqmosaic
