#include "freqmosaic/kernels.hpp"

#include <algorithm>
#include <vector>

#include "freqmosaic/error.hpp"

// AVX2 and baseline builds of the hot loops, picked at load time. AVX2
// without FMA keeps results identical to the baseline build.
#if defined(__GNUC__) && defined(__x86_64__) && !defined(__clang__)
#define FREQMOSAIC_VECTOR_CLONES __attribute__((target_clones("avx2", "default")))
#else
#define FREQMOSAIC_VECTOR_CLONES
#endif

namespace freqmosaic::kernels {
namespace {

// dst[i] += sum over taps (ky, kx) of w[ky*K+kx] * src[i + ky*stride + kx],
// taps added in row-major order. The buffers never overlap.
template <std::size_t K>
void correlate_fixed(double* __restrict dst, const double* __restrict src, std::size_t stride, const double* w,
                     std::size_t n) {
  double wk[K * K];
  std::copy_n(w, K * K, wk);
  for (std::size_t i = 0; i < n; ++i) {
    double v = dst[i];
    for (std::size_t ky = 0; ky < K; ++ky)
      for (std::size_t kx = 0; kx < K; ++kx) v += wk[ky * K + kx] * src[i + ky * stride + kx];
    dst[i] = v;
  }
}

FREQMOSAIC_VECTOR_CLONES
void correlate(double* dst, const double* src, std::size_t stride, const double* w, std::size_t k, std::size_t n) {
  if (std::all_of(w, w + k * k, [](double v) { return v == 0.0; })) return;
  switch (k) {
    case 1: return correlate_fixed<1>(dst, src, stride, w, n);
    case 3: return correlate_fixed<3>(dst, src, stride, w, n);
    case 5: return correlate_fixed<5>(dst, src, stride, w, n);
    default:
      for (std::size_t ky = 0; ky < k; ++ky)
        for (std::size_t kx = 0; kx < k; ++kx) {
          const double wv = w[ky * k + kx];
          const double* s = src + ky * stride + kx;
          for (std::size_t i = 0; i < n; ++i) dst[i] += wv * s[i];
        }
  }
}

// out[ky*K+kx] += sum_i g[i] * src[i + ky*stride + kx] for every tap at once.
template <std::size_t K>
void tap_dots_fixed(const double* __restrict g, const double* __restrict src, std::size_t stride, std::size_t n,
                    double* out) {
  constexpr std::size_t lanes = 4;
  double acc[K * K][lanes] = {};
  std::size_t i = 0;
  for (; i + lanes <= n; i += lanes)
    for (std::size_t ky = 0; ky < K; ++ky)
      for (std::size_t kx = 0; kx < K; ++kx)
        for (std::size_t l = 0; l < lanes; ++l) acc[ky * K + kx][l] += g[i + l] * src[i + l + ky * stride + kx];
  for (; i < n; ++i)
    for (std::size_t ky = 0; ky < K; ++ky)
      for (std::size_t kx = 0; kx < K; ++kx) acc[ky * K + kx][0] += g[i] * src[i + ky * stride + kx];
  for (std::size_t t = 0; t < K * K; ++t) out[t] += (acc[t][0] + acc[t][1]) + (acc[t][2] + acc[t][3]);
}

FREQMOSAIC_VECTOR_CLONES
void tap_dots(const double* g, const double* src, std::size_t stride, std::size_t k, std::size_t n, double* out) {
  switch (k) {
    case 1: return tap_dots_fixed<1>(g, src, stride, n, out);
    case 3: return tap_dots_fixed<3>(g, src, stride, n, out);
    case 5: return tap_dots_fixed<5>(g, src, stride, n, out);
    default:
      for (std::size_t ky = 0; ky < k; ++ky)
        for (std::size_t kx = 0; kx < k; ++kx) {
          double acc = 0.0;
          for (std::size_t i = 0; i < n; ++i) acc += g[i] * src[i + ky * stride + kx];
          out[ky * k + kx] += acc;
        }
  }
}

// Mirror index without repeating the edge sample: -1 -> 1, n -> n-2.
std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
  const auto sn = static_cast<std::ptrdiff_t>(n);
  if (i < 0) i = -i;
  if (i >= sn) i = 2 * sn - 2 - i;
  return static_cast<std::size_t>(i);
}

struct Padded {
  std::vector<double> data;
  std::size_t h, w;
};

Padded pad_input(const double* src, std::size_t channels, std::size_t h, std::size_t w, std::size_t pad,
                 BorderMode mode) {
  Padded p{std::vector<double>(channels * (h + 2 * pad) * (w + 2 * pad), 0.0), h + 2 * pad, w + 2 * pad};
  if (mode == BorderMode::zeros) {
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t y = 0; y < h; ++y)
        std::copy_n(src + (c * h + y) * w, w, p.data.data() + (c * p.h + y + pad) * p.w + pad);
    return p;
  }
  require(pad < h && pad < w, "conv2d: reflected borders need the image larger than the padding");
  const auto sp = static_cast<std::ptrdiff_t>(pad);
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t y = 0; y < p.h; ++y) {
      const double* srow = src + (c * h + reflect(static_cast<std::ptrdiff_t>(y) - sp, h)) * w;
      double* drow = p.data.data() + (c * p.h + y) * p.w;
      for (std::size_t x = 0; x < p.w; ++x) drow[x] = srow[reflect(static_cast<std::ptrdiff_t>(x) - sp, w)];
    }
  return p;
}

}  // namespace

// All three kernels work on row-major planes with the padded row stride, so
// each kernel tap becomes one contiguous multiply-add over the plane. Outputs
// at x >= w in a strided row are scratch and never read back.

void conv2d_forward(const Tensor& input, const Tensor& weight, const Tensor& bias,
                    std::size_t padding, BorderMode mode, Tensor& out) {
  const auto cin = input.dim(0), h = input.dim(1), w = input.dim(2);
  const auto cout = weight.dim(0), k = weight.dim(2);
  const auto in = pad_input(input.data().data(), cin, h, w, padding, mode);
  const auto pplane = in.h * in.w, stride = in.w;
  const std::size_t span = (h - 1) * stride + w;
  const double* wt = weight.data().data();
  double* o = out.data().data();
  std::vector<double> acc(span);

  for (std::size_t co = 0; co < cout; ++co) {
    std::fill(acc.begin(), acc.end(), bias[co]);
    double* a = acc.data();
    for (std::size_t ci = 0; ci < cin; ++ci) {
      const double* iplane = in.data.data() + ci * pplane;
      correlate(a, iplane, stride, wt + (co * cin + ci) * k * k, k, span);
    }
    for (std::size_t y = 0; y < h; ++y) std::copy_n(a + y * stride, w, o + (co * h + y) * w);
  }
}

namespace {

// grad_out re-laid with the padded row stride, zeros in the gap columns,
// starting `lead` samples into each channel block of `block` samples.
std::vector<double> stride_grad(std::span<const double> grad_out, std::size_t channels, std::size_t h,
                                std::size_t w, std::size_t stride, std::size_t lead, std::size_t block) {
  std::vector<double> g(channels * block, 0.0);
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t y = 0; y < h; ++y)
      std::copy_n(grad_out.data() + (c * h + y) * w, w, g.data() + c * block + lead + y * stride);
  return g;
}

}  // namespace

void conv2d_backward_input(std::span<const double> grad_out, const Tensor& weight,
                           const Shape& input_shape, std::size_t padding, BorderMode mode,
                           std::span<double> grad_input) {
  const auto cin = input_shape[0], h = input_shape[1], w = input_shape[2];
  const auto cout = weight.dim(0), k = weight.dim(2);
  const auto ph = h + 2 * padding, pw = w + 2 * padding;
  const std::size_t taps = k * k, lead = (k - 1) * pw + (k - 1);
  const auto g = stride_grad(grad_out, cout, h, w, pw, lead, lead + ph * pw);

  std::vector<double> flipped(weight.numel());
  const double* wt = weight.data().data();
  for (std::size_t f = 0; f < cout * cin; ++f)
    for (std::size_t t = 0; t < taps; ++t) flipped[f * taps + t] = wt[f * taps + taps - 1 - t];

  // Gradient with respect to the padded input as a correlation of the
  // gradient with the flipped kernel, then folded back onto the samples the
  // padding was copied from.
  std::vector<double> gpad(cin * ph * pw, 0.0);
  for (std::size_t ci = 0; ci < cin; ++ci) {
    double* gp = gpad.data() + ci * ph * pw;
    for (std::size_t co = 0; co < cout; ++co)
      correlate(gp, g.data() + co * (lead + ph * pw), pw, flipped.data() + (co * cin + ci) * taps, k, ph * pw);
  }
  if (mode == BorderMode::zeros) {
    for (std::size_t c = 0; c < cin; ++c)
      for (std::size_t y = 0; y < h; ++y) {
        const double* grow = gpad.data() + (c * ph + y + padding) * pw + padding;
        double* dst = grad_input.data() + (c * h + y) * w;
        for (std::size_t x = 0; x < w; ++x) dst[x] += grow[x];
      }
    return;
  }
  const auto sp = static_cast<std::ptrdiff_t>(padding);
  for (std::size_t c = 0; c < cin; ++c)
    for (std::size_t y = 0; y < ph; ++y) {
      const std::size_t sy = reflect(static_cast<std::ptrdiff_t>(y) - sp, h);
      const double* grow = gpad.data() + (c * ph + y) * pw;
      double* dst = grad_input.data() + (c * h + sy) * w;
      for (std::size_t x = 0; x < pw; ++x) dst[reflect(static_cast<std::ptrdiff_t>(x) - sp, w)] += grow[x];
    }
}

void conv2d_backward_params(std::span<const double> grad_out, const Tensor& input,
                            const Shape& weight_shape, std::size_t padding, BorderMode mode,
                            std::span<double> grad_weight, std::span<double> grad_bias) {
  const auto cin = input.dim(0), h = input.dim(1), w = input.dim(2);
  const auto cout = weight_shape[0], k = weight_shape[2];
  const auto plane = h * w;
  const auto in = pad_input(input.data().data(), cin, h, w, padding, mode);
  const auto pplane = in.h * in.w, stride = in.w;
  const std::size_t span = (h - 1) * stride + w;
  const auto g = stride_grad(grad_out, cout, h, w, stride, 0, span);

  for (std::size_t co = 0; co < cout; ++co) {
    const double* gsrc = grad_out.data() + co * plane;
    double bsum = 0.0;
    for (std::size_t i = 0; i < plane; ++i) bsum += gsrc[i];
    grad_bias[co] += bsum;

    const double* gplane = g.data() + co * span;
    for (std::size_t ci = 0; ci < cin; ++ci)
      tap_dots(gplane, in.data.data() + ci * pplane, stride, k, span, grad_weight.data() + (co * cin + ci) * k * k);
  }
}

}  // namespace freqmosaic::kernels
