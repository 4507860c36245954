#pragma once

// Independent reference implementations used only by tests. None of these
// call into the library code paths they are compared against.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "freqmosaic/tensor.hpp"

namespace oracle {

using freqmosaic::ComplexTensor;
using freqmosaic::Shape;
using freqmosaic::Tensor;

inline Tensor random_tensor(Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = dist(rng);
  return t;
}

// O(N^2) double-sum DFT of each [H,W] plane, X(u,v) = sum x(y,x) e^{-2pi i (uy/H + vx/W)}.
inline ComplexTensor direct_dft(const Tensor& x) {
  const auto c = x.dim(0), h = x.dim(1), w = x.dim(2);
  ComplexTensor out(x.shape());
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t u = 0; u < h; ++u)
      for (std::size_t v = 0; v < w; ++v) {
        std::complex<double> acc = 0.0;
        for (std::size_t y = 0; y < h; ++y)
          for (std::size_t xx = 0; xx < w; ++xx) {
            const double phase = -2.0 * std::numbers::pi *
                                 (static_cast<double>(u * y) / static_cast<double>(h) +
                                  static_cast<double>(v * xx) / static_cast<double>(w));
            acc += x.at(ch, y, xx) * std::polar(1.0, phase);
          }
        const auto i = (ch * h + u) * w + v;
        out.re()[i] = acc.real();
        out.im()[i] = acc.imag();
      }
  return out;
}

// Six nested loops, no shortcuts. Out-of-range taps read zero, or the
// mirrored sample (-1 -> 1, n -> n-2) when `mirror` is set.
inline Tensor direct_conv(const Tensor& in, const Tensor& w, const Tensor& b, bool mirror = false) {
  const long cin = static_cast<long>(in.dim(0)), h = static_cast<long>(in.dim(1)),
             wd = static_cast<long>(in.dim(2));
  const long cout = static_cast<long>(w.dim(0)), k = static_cast<long>(w.dim(2));
  const long pad = (k - 1) / 2;
  Tensor out(Shape{static_cast<std::size_t>(cout), in.dim(1), in.dim(2)});
  for (long co = 0; co < cout; ++co)
    for (long y = 0; y < h; ++y)
      for (long x = 0; x < wd; ++x) {
        double acc = b[static_cast<std::size_t>(co)];
        for (long ci = 0; ci < cin; ++ci)
          for (long ky = 0; ky < k; ++ky)
            for (long kx = 0; kx < k; ++kx) {
              long sy = y + ky - pad, sx = x + kx - pad;
              if (!mirror && (sy < 0 || sy >= h || sx < 0 || sx >= wd)) continue;
              if (sy < 0) sy = -sy;
              if (sy >= h) sy = 2 * h - 2 - sy;
              if (sx < 0) sx = -sx;
              if (sx >= wd) sx = 2 * wd - 2 - sx;
              acc += w[static_cast<std::size_t>(((co * cin + ci) * k + ky) * k + kx)] *
                     in.at(static_cast<std::size_t>(ci), static_cast<std::size_t>(sy),
                           static_cast<std::size_t>(sx));
            }
        out.at(static_cast<std::size_t>(co), static_cast<std::size_t>(y),
               static_cast<std::size_t>(x)) = acc;
      }
  return out;
}

// Scalar bilinear interpolation of a 1-D signal under half-pixel centers.
inline double interp_1d(const std::vector<double>& src, std::size_t dst_size, std::size_t i) {
  const double n = static_cast<double>(src.size());
  double s = (static_cast<double>(i) + 0.5) * n / static_cast<double>(dst_size) - 0.5;
  if (s < 0.0) s = 0.0;
  if (s > n - 1.0) s = n - 1.0;
  const auto lo = static_cast<std::size_t>(s);
  const auto hi = lo + 1 < src.size() ? lo + 1 : lo;
  const double t = s - static_cast<double>(lo);
  return src[lo] + t * (src[hi] - src[lo]);
}

}  // namespace oracle
