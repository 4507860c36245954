#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "freqmosaic/tensor.hpp"

namespace freqmosaic {

/// RGB image, stored planar (R plane, G plane, B plane) so it maps directly
/// onto a [3,H,W] tensor.
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;

  Image() = default;
  Image(std::size_t h, std::size_t w, double fill = 0.0) : height(h), width(w), values(3 * h * w, fill) {}

  double& at(std::size_t y, std::size_t x, std::size_t c) { return values[(c * height + y) * width + x]; }
  double at(std::size_t y, std::size_t x, std::size_t c) const { return values[(c * height + y) * width + x]; }

  Tensor to_tensor() const;
  static Image from_tensor(const Tensor& t);
  Image clamped() const;

  friend bool operator==(const Image&, const Image&) = default;
};

enum class BayerPattern : std::uint8_t { rggb, grbg, gbrg, bggr };

BayerPattern parse_pattern(const std::string& name);
std::string pattern_name(BayerPattern p);

/// Color (0=R, 1=G, 2=B) recorded at (y, x).
int cfa_color(BayerPattern p, std::size_t y, std::size_t x);

/// Single-plane Bayer observation.
struct CfaImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> plane;
  BayerPattern pattern = BayerPattern::rggb;

  CfaImage() = default;
  CfaImage(std::size_t h, std::size_t w, BayerPattern p = BayerPattern::rggb, double fill = 0.0)
      : height(h), width(w), plane(h * w, fill), pattern(p) {}

  double& at(std::size_t y, std::size_t x) { return plane[y * width + x]; }
  double at(std::size_t y, std::size_t x) const { return plane[y * width + x]; }

  /// [1,H,W] view of the plane.
  Tensor to_tensor() const;
  /// Sub-window; the crop origin must be even so the pattern is unchanged.
  CfaImage crop(std::size_t y0, std::size_t x0, std::size_t h, std::size_t w) const;

  friend bool operator==(const CfaImage&, const CfaImage&) = default;
};

}  // namespace freqmosaic
