#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "freqmosaic/image.hpp"
#include "freqmosaic/model.hpp"

namespace freqmosaic {

/// Overlapping square tiles covering an H x W image. Row and column anchors
/// are 0, t, 2t, ... with the last one clamped so the final tile ends exactly
/// on the border.
struct TilePlan {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t patch = 0;
  std::size_t stride = 0;
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;

  std::size_t size() const { return rows.size() * cols.size(); }
  /// Tiles in row-major anchor order.
  std::vector<std::pair<std::size_t, std::size_t>> anchors() const;
  /// Number of tiles covering each pixel, row-major.
  std::vector<std::size_t> coverage() const;
};

/// stride 0 selects the default p/2.
TilePlan plan_tiles(std::size_t height, std::size_t width, std::size_t patch, std::size_t stride = 0);

using PatchFn = std::function<Image(const CfaImage&)>;

/// Runs `fn` on every tile of `cfa` and averages overlapping outputs
/// uniformly. Tiles may run concurrently; accumulation follows anchor order,
/// so the result does not depend on `threads`.
Image demosaic_tiled(const PatchFn& fn, const CfaImage& cfa, std::size_t patch, std::size_t stride = 0,
                     std::size_t threads = 1);

Image demosaic_tiled(const ModelParams& params, const ModelConfig& cfg, const CfaImage& cfa, double sigma,
                     std::size_t patch, std::size_t stride = 0, std::size_t threads = 1);

}  // namespace freqmosaic
