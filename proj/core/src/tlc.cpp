#include "freqmosaic/tlc.hpp"

#include <algorithm>

#include "freqmosaic/error.hpp"
#include "freqmosaic/parallel.hpp"

namespace freqmosaic {
namespace {

std::vector<std::size_t> axis_anchors(std::size_t extent, std::size_t patch, std::size_t stride) {
  std::vector<std::size_t> out{0};
  while (out.back() + patch < extent) out.push_back(std::min(out.back() + stride, extent - patch));
  return out;
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> TilePlan::anchors() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(size());
  for (auto r : rows)
    for (auto c : cols) out.emplace_back(r, c);
  return out;
}

std::vector<std::size_t> TilePlan::coverage() const {
  std::vector<std::size_t> count(height * width, 0);
  for (const auto& [r, c] : anchors())
    for (std::size_t y = r; y < r + patch; ++y)
      for (std::size_t x = c; x < c + patch; ++x) ++count[y * width + x];
  return count;
}

TilePlan plan_tiles(std::size_t height, std::size_t width, std::size_t patch, std::size_t stride) {
  require(patch >= 2 && patch % 2 == 0, "tile size must be even and positive");
  require(patch <= height && patch <= width,
          "tile size " + std::to_string(patch) + " exceeds image " + std::to_string(height) + "x" +
              std::to_string(width));
  if (stride == 0) stride = patch / 2;
  require(stride <= patch, "tile stride must not exceed the tile size");
  TilePlan plan;
  plan.height = height;
  plan.width = width;
  plan.patch = patch;
  plan.stride = stride;
  plan.rows = axis_anchors(height, patch, stride);
  plan.cols = axis_anchors(width, patch, stride);
  return plan;
}

Image demosaic_tiled(const PatchFn& fn, const CfaImage& cfa, std::size_t patch, std::size_t stride,
                     std::size_t threads) {
  const auto plan = plan_tiles(cfa.height, cfa.width, patch, stride);
  require(plan.stride % 2 == 0, "odd tile stride would shift the Bayer phase between tiles");
  require(cfa.height % 2 == 0 && cfa.width % 2 == 0,
          "tiled demosaicking needs even image dimensions to keep every tile on the Bayer phase");

  const auto anchors = plan.anchors();
  std::vector<Image> tiles(anchors.size());
  parallel_for(anchors.size(), threads, [&](std::size_t i) {
    const auto [r, c] = anchors[i];
    Image out = fn(cfa.crop(r, c, patch, patch));
    require(out.height == patch && out.width == patch, "patch function changed the tile size");
    tiles[i] = std::move(out);
  });

  // Each pixel keeps the first covering tile's value plus the mean deviation
  // of the others from it, so agreeing tiles reproduce that value exactly.
  Image base(cfa.height, cfa.width), deviation(cfa.height, cfa.width);
  std::vector<bool> seen(cfa.height * cfa.width, false);
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const auto [r, c] = anchors[i];
    for (std::size_t y = 0; y < patch; ++y)
      for (std::size_t x = 0; x < patch; ++x) {
        const bool first = !seen[(r + y) * cfa.width + c + x];
        seen[(r + y) * cfa.width + c + x] = true;
        for (std::size_t ch = 0; ch < 3; ++ch) {
          const double v = tiles[i].at(y, x, ch);
          if (first)
            base.at(r + y, c + x, ch) = v;
          else
            deviation.at(r + y, c + x, ch) += v - base.at(r + y, c + x, ch);
        }
      }
  }
  const auto count = plan.coverage();
  for (std::size_t ch = 0; ch < 3; ++ch)
    for (std::size_t y = 0; y < cfa.height; ++y)
      for (std::size_t x = 0; x < cfa.width; ++x)
        base.at(y, x, ch) += deviation.at(y, x, ch) / static_cast<double>(count[y * cfa.width + x]);
  return base;
}

Image demosaic_tiled(const ModelParams& params, const ModelConfig& cfg, const CfaImage& cfa, double sigma,
                     std::size_t patch, std::size_t stride, std::size_t threads) {
  return demosaic_tiled([&](const CfaImage& tile) { return demosaic_dfenet(tile, sigma, params, cfg); }, cfa,
                        patch, stride, threads);
}

}  // namespace freqmosaic
