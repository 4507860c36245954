#include "freqmosaic/bayer.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "freqmosaic/error.hpp"
#include "freqmosaic/fft.hpp"

namespace freqmosaic {

CfaImage mosaic(const Image& img, BayerPattern pattern) {
  require(img.height % 2 == 0 && img.width % 2 == 0,
          "mosaic requires even image dimensions, got " + std::to_string(img.height) + "x" +
              std::to_string(img.width));
  CfaImage cfa(img.height, img.width, pattern);
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x)
      cfa.at(y, x) = img.at(y, x, static_cast<std::size_t>(cfa_color(pattern, y, x)));
  return cfa;
}

Tensor rearrange_input(const CfaImage& cfa) {
  Tensor out(Shape{3, cfa.height, cfa.width});
  for (std::size_t y = 0; y < cfa.height; ++y)
    for (std::size_t x = 0; x < cfa.width; ++x)
      out.at(static_cast<std::size_t>(cfa_color(cfa.pattern, y, x)), y, x) = cfa.at(y, x);
  return out;
}

namespace {

void perturb(std::vector<double>& values, const NoiseSpec& spec) {
  require(spec.sigma >= 0.0, "noise sigma must be non-negative");
  if (spec.sigma == 0.0) return;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> dist(0.0, spec.sigma / 255.0);
  for (auto& v : values) v = std::clamp(v + dist(rng), 0.0, 1.0);
}

}  // namespace

CfaImage add_noise(const CfaImage& cfa, const NoiseSpec& spec) {
  CfaImage out = cfa;
  perturb(out.plane, spec);
  return out;
}

Image add_noise(const Image& img, const NoiseSpec& spec) {
  Image out = img;
  perturb(out.values, spec);
  return out;
}

Tensor make_noise_map(double sigma, std::size_t height, std::size_t width) {
  return Tensor(Shape{1, height, width}, sigma / 255.0);
}

Image bilinear_demosaic(const CfaImage& cfa) {
  const auto h = static_cast<long>(cfa.height), w = static_cast<long>(cfa.width);
  Image out(cfa.height, cfa.width);
  static constexpr long axial[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
  static constexpr long diagonal[4][2] = {{-1, -1}, {-1, 1}, {1, -1}, {1, 1}};

  auto average = [&](long y, long x, int color, const long (&taps)[4][2], double& result) {
    double s = 0.0;
    int n = 0;
    for (const auto& t : taps) {
      const long yy = y + t[0], xx = x + t[1];
      if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
      if (cfa_color(cfa.pattern, static_cast<std::size_t>(yy), static_cast<std::size_t>(xx)) != color)
        continue;
      s += cfa.at(static_cast<std::size_t>(yy), static_cast<std::size_t>(xx));
      ++n;
    }
    if (n == 0) return false;
    result = s / n;
    return true;
  };

  for (long y = 0; y < h; ++y)
    for (long x = 0; x < w; ++x) {
      const auto uy = static_cast<std::size_t>(y), ux = static_cast<std::size_t>(x);
      const int own = cfa_color(cfa.pattern, uy, ux);
      for (int c = 0; c < 3; ++c) {
        double v = 0.0;
        if (c == own) v = cfa.at(uy, ux);
        else if (!average(y, x, c, axial, v)) average(y, x, c, diagonal, v);
        out.at(uy, ux, static_cast<std::size_t>(c)) = v;
      }
    }
  return out;
}

Tensor pixel_unshuffle(const Tensor& x, std::size_t r) {
  require(x.rank() == 3, "pixel_unshuffle expects [C,H,W]");
  require(r >= 1 && x.dim(1) % r == 0 && x.dim(2) % r == 0,
          "pixel_unshuffle: factor " + std::to_string(r) + " does not divide " + shape_string(x.shape()));
  const auto c = x.dim(0), h = x.dim(1) / r, w = x.dim(2) / r;
  Tensor out(Shape{c * r * r, h, w});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t dy = 0; dy < r; ++dy)
      for (std::size_t dx = 0; dx < r; ++dx)
        for (std::size_t y = 0; y < h; ++y)
          for (std::size_t xx = 0; xx < w; ++xx)
            out.at(ch * r * r + dy * r + dx, y, xx) = x.at(ch, y * r + dy, xx * r + dx);
  return out;
}

Tensor pixel_shuffle(const Tensor& x, std::size_t r) {
  require(x.rank() == 3, "pixel_shuffle expects [C,H,W]");
  require(r >= 1 && x.dim(0) % (r * r) == 0, "pixel_shuffle: channels not divisible by r^2");
  const auto c = x.dim(0) / (r * r), h = x.dim(1), w = x.dim(2);
  Tensor out(Shape{c, h * r, w * r});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t dy = 0; dy < r; ++dy)
      for (std::size_t dx = 0; dx < r; ++dx)
        for (std::size_t y = 0; y < h; ++y)
          for (std::size_t xx = 0; xx < w; ++xx)
            out.at(ch, y * r + dy, xx * r + dx) = x.at(ch * r * r + dy * r + dx, y, xx);
  return out;
}

namespace {

Tensor magnitude(const ComplexTensor& X) {
  Tensor m(X.shape());
  for (std::size_t i = 0; i < m.numel(); ++i) m[i] = std::hypot(X.re()[i], X.im()[i]);
  return m;
}

void require_plane(const Tensor& x, const char* op) {
  require(x.rank() == 3 && x.dim(0) == 1, std::string(op) + " expects a [1,H,W] plane");
}

}  // namespace

Tensor spectrum(const Tensor& x) {
  require_plane(x, "spectrum");
  Tensor m = magnitude(fft2(x));
  for (auto& v : m.data()) v = std::log1p(v);
  m = fftshift(m);
  const auto [lo, hi] = std::minmax_element(m.data().begin(), m.data().end());
  const double low = *lo, range = *hi - *lo;
  for (auto& v : m.data()) v = range > 0.0 ? (v - low) / range : 0.0;
  return m;
}

Tensor spectrum_ratio_raw(const Tensor& a, const Tensor& b) {
  require_plane(a, "spectrum_ratio");
  require(a.shape() == b.shape(), "spectrum_ratio: shape mismatch");
  const Tensor ma = magnitude(fft2(a));
  const Tensor mb = magnitude(fft2(b));
  Tensor r(a.shape());
  for (std::size_t i = 0; i < r.numel(); ++i) r[i] = std::clamp(ma[i] / std::max(mb[i], 1e-8), 0.0, 4.0);
  return fftshift(r);
}

Tensor spectrum_ratio(const Tensor& a, const Tensor& b) {
  Tensor r = spectrum_ratio_raw(a, b);
  for (auto& v : r.data()) v *= 0.25;
  return r;
}

Tensor channel_plane(const Image& img, std::size_t c) {
  require(c < 3, "channel index out of range");
  const auto n = img.height * img.width;
  std::vector<double> v(img.values.begin() + static_cast<std::ptrdiff_t>(c * n),
                        img.values.begin() + static_cast<std::ptrdiff_t>((c + 1) * n));
  return Tensor(Shape{1, img.height, img.width}, std::move(v));
}

}  // namespace freqmosaic
