#include "freqmosaic/image.hpp"

#include <algorithm>

#include "freqmosaic/error.hpp"

namespace freqmosaic {

Tensor Image::to_tensor() const { return Tensor(Shape{3, height, width}, values); }

Image Image::from_tensor(const Tensor& t) {
  require(t.rank() == 3 && t.dim(0) == 3, "image tensor must be [3,H,W], got " + shape_string(t.shape()));
  Image img(t.dim(1), t.dim(2));
  img.values = t.storage();
  return img;
}

Image Image::clamped() const {
  Image out = *this;
  for (auto& v : out.values) v = std::clamp(v, 0.0, 1.0);
  return out;
}

BayerPattern parse_pattern(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "rggb") return BayerPattern::rggb;
  if (s == "grbg") return BayerPattern::grbg;
  if (s == "gbrg") return BayerPattern::gbrg;
  if (s == "bggr") return BayerPattern::bggr;
  throw ContractViolation("unknown Bayer pattern '" + name + "'");
}

std::string pattern_name(BayerPattern p) {
  switch (p) {
    case BayerPattern::rggb: return "RGGB";
    case BayerPattern::grbg: return "GRBG";
    case BayerPattern::gbrg: return "GBRG";
    case BayerPattern::bggr: return "BGGR";
  }
  return "?";
}

int cfa_color(BayerPattern p, std::size_t y, std::size_t x) {
  // Colors of the 2x2 cell in reading order (0,0) (0,1) (1,0) (1,1).
  static constexpr int cells[4][4] = {
      {0, 1, 1, 2},  // RGGB
      {1, 0, 2, 1},  // GRBG
      {1, 2, 0, 1},  // GBRG
      {2, 1, 1, 0},  // BGGR
  };
  return cells[static_cast<int>(p)][(y % 2) * 2 + (x % 2)];
}

Tensor CfaImage::to_tensor() const { return Tensor(Shape{1, height, width}, plane); }

CfaImage CfaImage::crop(std::size_t y0, std::size_t x0, std::size_t h, std::size_t w) const {
  require(y0 % 2 == 0 && x0 % 2 == 0, "CFA crop origin must be even to keep the Bayer phase");
  require(y0 + h <= height && x0 + w <= width, "CFA crop exceeds image bounds");
  CfaImage out(h, w, pattern);
  for (std::size_t y = 0; y < h; ++y)
    std::copy_n(plane.begin() + static_cast<std::ptrdiff_t>((y0 + y) * width + x0), w,
                out.plane.begin() + static_cast<std::ptrdiff_t>(y * w));
  return out;
}

}  // namespace freqmosaic
