#include "freqmosaic/ops.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <initializer_list>

#include "freqmosaic/error.hpp"
#include "freqmosaic/fft.hpp"
#include "freqmosaic/kernels.hpp"

namespace freqmosaic {
namespace {

using detail::Node;
using NodePtr = std::shared_ptr<Node>;
using BackwardFn = std::function<void(Node&)>;

Tape* common_tape(std::initializer_list<const NodePtr*> inputs) {
  Tape* tape = nullptr;
  for (const auto* in : inputs) {
    if (!(*in)->requires_grad) continue;
    if (tape && tape != (*in)->tape) throw ContractViolation("operands recorded on different tapes");
    tape = (*in)->tape;
  }
  return tape;
}

NodePtr finish(NodePtr node, std::initializer_list<const NodePtr*> inputs, BackwardFn fn) {
  Tape* tape = common_tape(inputs);
  if (!tape) return node;
  for (const auto* in : inputs) node->inputs.push_back(*in);
  return tape->record(std::move(node), std::move(fn));
}

Var finish_real(Tensor value, std::initializer_list<const NodePtr*> inputs, BackwardFn fn) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  return Var(finish(std::move(node), inputs, std::move(fn)));
}

CVar finish_complex(ComplexTensor value, std::initializer_list<const NodePtr*> inputs,
                    BackwardFn fn) {
  auto node = std::make_shared<Node>();
  node->complex = true;
  node->cvalue = std::move(value);
  return CVar(finish(std::move(node), inputs, std::move(fn)));
}

void require_rank3(const Shape& s, const char* op) {
  require(s.size() == 3, std::string(op) + " expects [C,H,W], got " + shape_string(s));
}

// Shape relation for binary elementwise ops.
enum class Broadcast { none, a_mask, b_mask };

Broadcast broadcast_kind(const Shape& a, const Shape& b, const char* op) {
  if (a == b) return Broadcast::none;
  const bool spatial_match = a.size() == 3 && b.size() == 3 && a[1] == b[1] && a[2] == b[2];
  if (spatial_match && a[0] == 1) return Broadcast::a_mask;
  if (spatial_match && b[0] == 1) return Broadcast::b_mask;
  throw ContractViolation(std::string(op) + ": shapes " + shape_string(a) + " and " +
                          shape_string(b) + " do not broadcast");
}

// Index into an operand that may be a [1,H,W] mask under broadcasting.
inline std::size_t bidx(std::size_t i, bool is_mask, std::size_t plane) {
  return is_mask ? i % plane : i;
}

}  // namespace

// ---------------------------------------------------------------------------
// Convolution

Var conv2d(const Var& input, const Var& weight, const Var& bias, std::size_t padding, BorderMode mode) {
  const auto& is = input.shape();
  const auto& ws = weight.shape();
  require_rank3(is, "conv2d");
  require(ws.size() == 4 && ws[2] == ws[3] && ws[2] % 2 == 1,
          "conv2d weight must be [Cout,Cin,k,k] with odd k, got " + shape_string(ws));
  require(ws[1] == is[0], "conv2d: input has " + std::to_string(is[0]) +
                              " channels but weight expects " + std::to_string(ws[1]));
  require(padding == (ws[2] - 1) / 2, "conv2d: padding must be (k-1)/2");
  require(bias.shape() == Shape{ws[0]}, "conv2d: bias must be [Cout]");

  Tensor out(Shape{ws[0], is[1], is[2]});
  kernels::conv2d_forward(input.value(), weight.value(), bias.value(), padding, mode, out);

  return finish_real(std::move(out), {&input.node(), &weight.node(), &bias.node()},
                     [padding, mode](Node& self) {
                       auto& in = *self.inputs[0];
                       auto& w = *self.inputs[1];
                       auto& b = *self.inputs[2];
                       if (in.requires_grad)
                         kernels::conv2d_backward_input(self.grad_re, w.value, in.value.shape(),
                                                        padding, mode, in.grad_re_mut());
                       if (w.requires_grad || b.requires_grad) {
                         std::vector<double> gw(w.value.numel(), 0.0), gb(b.value.numel(), 0.0);
                         kernels::conv2d_backward_params(self.grad_re, in.value, w.value.shape(),
                                                         padding, mode, gw, gb);
                         if (w.requires_grad) {
                           auto g = w.grad_re_mut();
                           for (std::size_t i = 0; i < g.size(); ++i) g[i] += gw[i];
                         }
                         if (b.requires_grad) {
                           auto g = b.grad_re_mut();
                           for (std::size_t i = 0; i < g.size(); ++i) g[i] += gb[i];
                         }
                       }
                     });
}

// ---------------------------------------------------------------------------
// Fourier transforms

namespace {
ComplexTensor node_cgrad(const Node& n) {
  std::vector<double> im = n.grad_im.empty() ? std::vector<double>(n.numel(), 0.0) : n.grad_im;
  return ComplexTensor(n.cvalue.shape(), n.grad_re, std::move(im));
}
}  // namespace

CVar fft2(const Var& x) {
  require_rank3(x.shape(), "fft2");
  return finish_complex(fft2(x.value()), {&x.node()}, [](Node& self) {
    auto& in = *self.inputs[0];
    // Real input: adjoint of the C-linear map restricted to the real part.
    const auto back = fft2_adjoint(node_cgrad(self));
    auto g = in.grad_re_mut();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += back.re()[i];
  });
}

CVar fft2(const CVar& x) {
  require_rank3(x.shape(), "fft2");
  return finish_complex(fft2(x.value()), {&x.node()}, [](Node& self) {
    auto& in = *self.inputs[0];
    const auto back = fft2_adjoint(node_cgrad(self));
    auto gr = in.grad_re_mut();
    auto gi = in.grad_im_mut();
    for (std::size_t i = 0; i < gr.size(); ++i) {
      gr[i] += back.re()[i];
      gi[i] += back.im()[i];
    }
  });
}

CVar ifft2(const CVar& x) {
  require_rank3(x.shape(), "ifft2");
  return finish_complex(ifft2(x.value()), {&x.node()}, [](Node& self) {
    auto& in = *self.inputs[0];
    const auto back = fft2(node_cgrad(self));
    const double norm = 1.0 / static_cast<double>(self.cvalue.dim(1) * self.cvalue.dim(2));
    auto gr = in.grad_re_mut();
    auto gi = in.grad_im_mut();
    for (std::size_t i = 0; i < gr.size(); ++i) {
      gr[i] += norm * back.re()[i];
      gi[i] += norm * back.im()[i];
    }
  });
}

Var real(const CVar& x) {
  return finish_real(x.value().real_part(), {&x.node()}, [](Node& self) {
    auto g = self.inputs[0]->grad_re_mut();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad_re[i];
  });
}

Var imag(const CVar& x) {
  return finish_real(x.value().imag_part(), {&x.node()}, [](Node& self) {
    auto g = self.inputs[0]->grad_im_mut();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad_re[i];
  });
}

Var cabs(const CVar& x) {
  const auto& v = x.value();
  Tensor out(v.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::hypot(v.re()[i], v.im()[i]);
  return finish_real(std::move(out), {&x.node()}, [](Node& self) {
    auto& in = *self.inputs[0];
    auto gr = in.grad_re_mut();
    auto gi = in.grad_im_mut();
    for (std::size_t i = 0; i < gr.size(); ++i) {
      const double m = self.value[i];
      if (m == 0.0) continue;
      gr[i] += self.grad_re[i] * in.cvalue.re()[i] / m;
      gi[i] += self.grad_re[i] * in.cvalue.im()[i] / m;
    }
  });
}

// ---------------------------------------------------------------------------
// Pointwise

Var relu(const Var& x) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::max(0.0, x.value()[i]);
  return finish_real(std::move(out), {&x.node()}, [](Node& self) {
    auto& in = *self.inputs[0];
    auto g = in.grad_re_mut();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (in.value[i] > 0.0) g[i] += self.grad_re[i];
  });
}

Var sigmoid(const Var& x) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = 1.0 / (1.0 + std::exp(-x.value()[i]));
  return finish_real(std::move(out), {&x.node()}, [](Node& self) {
    auto g = self.inputs[0]->grad_re_mut();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double y = self.value[i];
      g[i] += self.grad_re[i] * y * (1.0 - y);
    }
  });
}

Var abs(const Var& x) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::abs(x.value()[i]);
  return finish_real(std::move(out), {&x.node()}, [](Node& self) {
    auto& in = *self.inputs[0];
    auto g = in.grad_re_mut();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = in.value[i];
      if (v > 0.0) g[i] += self.grad_re[i];
      else if (v < 0.0) g[i] -= self.grad_re[i];
    }
  });
}

Var scale(const Var& x, double s) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = s * x.value()[i];
  return finish_real(std::move(out), {&x.node()}, [s](Node& self) {
    auto g = self.inputs[0]->grad_re_mut();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * self.grad_re[i];
  });
}

namespace {

// Shared implementation of add (sign=+1) and sub (sign=-1).
Var add_signed(const Var& a, const Var& b, double sign, const char* name) {
  const auto kind = broadcast_kind(a.shape(), b.shape(), name);
  const bool a_mask = kind == Broadcast::a_mask, b_mask = kind == Broadcast::b_mask;
  const Shape out_shape = a_mask ? b.shape() : a.shape();
  const std::size_t plane = out_shape.size() == 3 ? out_shape[1] * out_shape[2] : 1;
  Tensor out(out_shape);
  for (std::size_t i = 0; i < out.numel(); ++i)
    out[i] = a.value()[bidx(i, a_mask, plane)] + sign * b.value()[bidx(i, b_mask, plane)];
  return finish_real(std::move(out), {&a.node(), &b.node()},
                     [sign, a_mask, b_mask, plane](Node& self) {
                       auto& na = *self.inputs[0];
                       auto& nb = *self.inputs[1];
                       const auto n = self.value.numel();
                       if (na.requires_grad) {
                         auto g = na.grad_re_mut();
                         for (std::size_t i = 0; i < n; ++i)
                           g[bidx(i, a_mask, plane)] += self.grad_re[i];
                       }
                       if (nb.requires_grad) {
                         auto g = nb.grad_re_mut();
                         for (std::size_t i = 0; i < n; ++i)
                           g[bidx(i, b_mask, plane)] += sign * self.grad_re[i];
                       }
                     });
}

}  // namespace

Var add(const Var& a, const Var& b) { return add_signed(a, b, 1.0, "add"); }
Var sub(const Var& a, const Var& b) { return add_signed(a, b, -1.0, "sub"); }

Var mul(const Var& a, const Var& b) {
  const auto kind = broadcast_kind(a.shape(), b.shape(), "mul");
  const bool a_mask = kind == Broadcast::a_mask, b_mask = kind == Broadcast::b_mask;
  const Shape out_shape = a_mask ? b.shape() : a.shape();
  const std::size_t plane = out_shape.size() == 3 ? out_shape[1] * out_shape[2] : 1;
  Tensor out(out_shape);
  for (std::size_t i = 0; i < out.numel(); ++i)
    out[i] = a.value()[bidx(i, a_mask, plane)] * b.value()[bidx(i, b_mask, plane)];
  return finish_real(std::move(out), {&a.node(), &b.node()}, [a_mask, b_mask, plane](Node& self) {
    auto& na = *self.inputs[0];
    auto& nb = *self.inputs[1];
    const auto n = self.value.numel();
    if (na.requires_grad) {
      auto g = na.grad_re_mut();
      for (std::size_t i = 0; i < n; ++i)
        g[bidx(i, a_mask, plane)] += self.grad_re[i] * nb.value[bidx(i, b_mask, plane)];
    }
    if (nb.requires_grad) {
      auto g = nb.grad_re_mut();
      for (std::size_t i = 0; i < n; ++i)
        g[bidx(i, b_mask, plane)] += self.grad_re[i] * na.value[bidx(i, a_mask, plane)];
    }
  });
}

CVar complex_mul(const CVar& x, const Var& mask) {
  const auto kind = broadcast_kind(x.shape(), mask.shape(), "complex_mul");
  require(kind != Broadcast::a_mask || x.dim(0) == mask.dim(0),
          "complex_mul: the mask must not have more channels than the spectrum");
  const bool m_mask = kind == Broadcast::b_mask;
  const std::size_t plane = x.dim(1) * x.dim(2);
  const auto& v = x.value();
  ComplexTensor out(v.shape());
  for (std::size_t i = 0; i < v.numel(); ++i) {
    const double m = mask.value()[bidx(i, m_mask, plane)];
    out.re()[i] = v.re()[i] * m;
    out.im()[i] = v.im()[i] * m;
  }
  return finish_complex(std::move(out), {&x.node(), &mask.node()}, [m_mask, plane](Node& self) {
    auto& nx = *self.inputs[0];
    auto& nm = *self.inputs[1];
    const auto n = self.cvalue.numel();
    const bool has_im = !self.grad_im.empty();
    if (nx.requires_grad) {
      auto gr = nx.grad_re_mut();
      auto gi = nx.grad_im_mut();
      for (std::size_t i = 0; i < n; ++i) {
        const double m = nm.value[bidx(i, m_mask, plane)];
        gr[i] += self.grad_re[i] * m;
        if (has_im) gi[i] += self.grad_im[i] * m;
      }
    }
    if (nm.requires_grad) {
      auto g = nm.grad_re_mut();
      for (std::size_t i = 0; i < n; ++i) {
        double d = self.grad_re[i] * nx.cvalue.re()[i];
        if (has_im) d += self.grad_im[i] * nx.cvalue.im()[i];
        g[bidx(i, m_mask, plane)] += d;
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Layout

Var concat_channels(const Var& a, const Var& b) { return concat_channels(std::vector<Var>{a, b}); }

Var concat_channels(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_channels: no inputs");
  const auto& s0 = parts[0].shape();
  require_rank3(s0, "concat_channels");
  std::size_t channels = 0;
  for (const auto& p : parts) {
    require_rank3(p.shape(), "concat_channels");
    require(p.dim(1) == s0[1] && p.dim(2) == s0[2], "concat_channels: spatial sizes differ");
    channels += p.dim(0);
  }
  Tensor out(Shape{channels, s0[1], s0[2]});
  std::size_t offset = 0;
  for (const auto& p : parts) {
    std::copy(p.value().data().begin(), p.value().data().end(), out.data().begin() + offset);
    offset += p.value().numel();
  }

  Tape* tape = nullptr;
  for (const auto& p : parts) {
    if (!p.requires_grad()) continue;
    if (tape && tape != p.tape()) throw ContractViolation("operands recorded on different tapes");
    tape = p.tape();
  }
  auto node = std::make_shared<Node>();
  node->value = std::move(out);
  if (!tape) return Var(node);
  for (const auto& p : parts) node->inputs.push_back(p.node());
  return Var(tape->record(std::move(node), [](Node& self) {
    std::size_t off = 0;
    for (auto& in : self.inputs) {
      const auto n = in->value.numel();
      if (in->requires_grad) {
        auto g = in->grad_re_mut();
        for (std::size_t i = 0; i < n; ++i) g[i] += self.grad_re[off + i];
      }
      off += n;
    }
  }));
}

// ---------------------------------------------------------------------------
// Channel attention helpers

Var global_avg_pool(const Var& x) {
  require_rank3(x.shape(), "global_avg_pool");
  const auto c = x.dim(0), plane = x.dim(1) * x.dim(2);
  Tensor out(Shape{c, 1, 1});
  for (std::size_t ch = 0; ch < c; ++ch) {
    double s = 0.0;
    for (std::size_t i = 0; i < plane; ++i) s += x.value()[ch * plane + i];
    out[ch] = s / static_cast<double>(plane);
  }
  return finish_real(std::move(out), {&x.node()}, [plane](Node& self) {
    auto g = self.inputs[0]->grad_re_mut();
    for (std::size_t ch = 0; ch < self.value.numel(); ++ch) {
      const double d = self.grad_re[ch] / static_cast<double>(plane);
      for (std::size_t i = 0; i < plane; ++i) g[ch * plane + i] += d;
    }
  });
}

Var scale_channels(const Var& x, const Var& s) {
  require_rank3(x.shape(), "scale_channels");
  require(s.shape() == Shape{x.dim(0), 1, 1}, "scale_channels: scale must be [C,1,1]");
  const auto c = x.dim(0), plane = x.dim(1) * x.dim(2);
  Tensor out(x.shape());
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t i = 0; i < plane; ++i)
      out[ch * plane + i] = x.value()[ch * plane + i] * s.value()[ch];
  return finish_real(std::move(out), {&x.node(), &s.node()}, [c, plane](Node& self) {
    auto& nx = *self.inputs[0];
    auto& ns = *self.inputs[1];
    if (nx.requires_grad) {
      auto g = nx.grad_re_mut();
      for (std::size_t ch = 0; ch < c; ++ch)
        for (std::size_t i = 0; i < plane; ++i)
          g[ch * plane + i] += self.grad_re[ch * plane + i] * ns.value[ch];
    }
    if (ns.requires_grad) {
      auto g = ns.grad_re_mut();
      for (std::size_t ch = 0; ch < c; ++ch) {
        double d = 0.0;
        for (std::size_t i = 0; i < plane; ++i)
          d += self.grad_re[ch * plane + i] * nx.value[ch * plane + i];
        g[ch] += d;
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Resampling and binarization

namespace {

struct AxisTap {
  std::size_t i0, i1;
  double frac;
};

std::vector<AxisTap> axis_taps(std::size_t src, std::size_t dst) {
  std::vector<AxisTap> taps(dst);
  const double ratio = static_cast<double>(src) / static_cast<double>(dst);
  const double max_coord = static_cast<double>(src - 1);
  for (std::size_t i = 0; i < dst; ++i) {
    double s = (static_cast<double>(i) + 0.5) * ratio - 0.5;
    s = std::clamp(s, 0.0, max_coord);
    const auto i0 = static_cast<std::size_t>(std::floor(s));
    taps[i] = {i0, std::min(i0 + 1, src - 1), s - static_cast<double>(i0)};
  }
  return taps;
}

}  // namespace

Var bilinear_upsample(const Var& x, std::size_t height, std::size_t width) {
  require_rank3(x.shape(), "bilinear_upsample");
  const auto c = x.dim(0), h = x.dim(1), w = x.dim(2);
  require(h > 0 && w > 0 && height > 0 && width > 0, "bilinear_upsample: zero-sized input");
  require(h <= height && w <= width, "bilinear_upsample: target smaller than source");
  auto ty = axis_taps(h, height);
  auto tx = axis_taps(w, width);

  Tensor out(Shape{c, height, width});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < height; ++y)
      for (std::size_t xx = 0; xx < width; ++xx) {
        const auto& a = ty[y];
        const auto& b = tx[xx];
        const double top = (1.0 - b.frac) * x.value().at(ch, a.i0, b.i0) + b.frac * x.value().at(ch, a.i0, b.i1);
        const double bot = (1.0 - b.frac) * x.value().at(ch, a.i1, b.i0) + b.frac * x.value().at(ch, a.i1, b.i1);
        out.at(ch, y, xx) = (1.0 - a.frac) * top + a.frac * bot;
      }

  return finish_real(std::move(out), {&x.node()},
                     [ty = std::move(ty), tx = std::move(tx), c, h, w, height, width](Node& self) {
                       auto g = self.inputs[0]->grad_re_mut();
                       for (std::size_t ch = 0; ch < c; ++ch)
                         for (std::size_t y = 0; y < height; ++y)
                           for (std::size_t xx = 0; xx < width; ++xx) {
                             const double go = self.grad_re[(ch * height + y) * width + xx];
                             const auto& a = ty[y];
                             const auto& b = tx[xx];
                             auto at = [&](std::size_t yy, std::size_t x2) -> double& {
                               return g[(ch * h + yy) * w + x2];
                             };
                             at(a.i0, b.i0) += go * (1.0 - a.frac) * (1.0 - b.frac);
                             at(a.i0, b.i1) += go * (1.0 - a.frac) * b.frac;
                             at(a.i1, b.i0) += go * a.frac * (1.0 - b.frac);
                             at(a.i1, b.i1) += go * a.frac * b.frac;
                           }
                     });
}

Var binarize_ste(const Var& x) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] = x.value()[i] > 0.0 ? 1.0 : 0.0;
  return finish_real(std::move(out), {&x.node()}, [](Node& self) {
    auto& in = *self.inputs[0];
    auto g = in.grad_re_mut();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (std::abs(in.value[i]) <= 1.0) g[i] += self.grad_re[i];
  });
}

// ---------------------------------------------------------------------------
// Reductions

Var sum(const Var& x) {
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  return finish_real(Tensor::scalar(s), {&x.node()}, [](Node& self) {
    auto g = self.inputs[0]->grad_re_mut();
    for (auto& v : g) v += self.grad_re[0];
  });
}

Var mean(const Var& x) {
  require(x.value().numel() > 0, "mean of an empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.value().numel()));
}

Var l1_mean(const Var& a, const Var& b) {
  require(a.shape() == b.shape(),
          "l1_mean: shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  return mean(abs(sub(a, b)));
}

}  // namespace freqmosaic
