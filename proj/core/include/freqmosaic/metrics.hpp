#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "freqmosaic/image.hpp"

namespace freqmosaic {

inline constexpr double psnr_cap_db = 99.0;

/// 10 log10(1 / MSE) over all channels jointly, data range 1. Returns
/// psnr_cap_db when MSE < 1e-12.
double psnr(const Image& a, const Image& b);

/// Mean SSIM over channels and valid 11x11 window positions (Gaussian window,
/// sigma 1.5, K1 = 0.01, K2 = 0.03, data range 1). No border padding.
double ssim(const Image& a, const Image& b);

struct MetricRow {
  std::string name;
  double psnr_db = 0.0;
  double ssim = 0.0;
};

struct MetricReport {
  std::vector<MetricRow> rows;
  double mean_psnr_db = 0.0;
  double mean_ssim = 0.0;

  /// "name,psnr_db,ssim" header, one row per image, then a MEAN row.
  std::string to_csv() const;
};

MetricReport make_report(std::vector<MetricRow> rows);

/// Pairs every image in `predicted` with the file of the same name in
/// `reference`. Rows keep the sorted file order regardless of `threads`.
MetricReport evaluate_dirs(const std::filesystem::path& predicted, const std::filesystem::path& reference,
                           std::size_t threads = 1);

}  // namespace freqmosaic
