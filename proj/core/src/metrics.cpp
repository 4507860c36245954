#include "freqmosaic/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "freqmosaic/error.hpp"
#include "freqmosaic/image_io.hpp"
#include "freqmosaic/parallel.hpp"

namespace freqmosaic {
namespace {

constexpr std::size_t window = 11;
constexpr double window_sigma = 1.5;

void check_same_shape(const Image& a, const Image& b) {
  require(a.height == b.height && a.width == b.width && a.values.size() == b.values.size(),
          "metric inputs differ in shape: " + std::to_string(a.height) + "x" + std::to_string(a.width) + " vs " +
              std::to_string(b.height) + "x" + std::to_string(b.width));
}

std::vector<double> gaussian_taps() {
  std::vector<double> g(window);
  double total = 0.0;
  for (std::size_t i = 0; i < window; ++i) {
    const double d = static_cast<double>(i) - static_cast<double>(window / 2);
    g[i] = std::exp(-d * d / (2.0 * window_sigma * window_sigma));
    total += g[i];
  }
  for (auto& v : g) v /= total;
  return g;
}

// Valid-mode separable filtering of one h x w plane.
std::vector<double> filter_valid(const double* src, std::size_t h, std::size_t w, const std::vector<double>& g) {
  const std::size_t oh = h - window + 1, ow = w - window + 1;
  std::vector<double> rows(h * ow, 0.0);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < window; ++k) acc += g[k] * src[y * w + x + k];
      rows[y * ow + x] = acc;
    }
  std::vector<double> out(oh * ow, 0.0);
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < window; ++k) acc += g[k] * rows[(y + k) * ow + x];
      out[y * ow + x] = acc;
    }
  return out;
}

}  // namespace

double psnr(const Image& a, const Image& b) {
  check_same_shape(a, b);
  require(!a.values.empty(), "psnr of empty images");
  double se = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    se += d * d;
  }
  const double mse = se / static_cast<double>(a.values.size());
  if (mse < 1e-12) return psnr_cap_db;
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& a, const Image& b) {
  check_same_shape(a, b);
  require(a.height >= window && a.width >= window, "ssim needs images of at least 11x11");
  const double c1 = (0.01 * 1.0) * (0.01 * 1.0);
  const double c2 = (0.03 * 1.0) * (0.03 * 1.0);
  const auto g = gaussian_taps();
  const std::size_t h = a.height, w = a.width, plane = h * w;

  double total = 0.0;
  std::size_t count = 0;
  std::vector<double> aa(plane), bb(plane), ab(plane);
  for (std::size_t c = 0; c < 3; ++c) {
    const double* pa = a.values.data() + c * plane;
    const double* pb = b.values.data() + c * plane;
    for (std::size_t i = 0; i < plane; ++i) {
      aa[i] = pa[i] * pa[i];
      bb[i] = pb[i] * pb[i];
      ab[i] = pa[i] * pb[i];
    }
    const auto mu_a = filter_valid(pa, h, w, g);
    const auto mu_b = filter_valid(pb, h, w, g);
    const auto e_aa = filter_valid(aa.data(), h, w, g);
    const auto e_bb = filter_valid(bb.data(), h, w, g);
    const auto e_ab = filter_valid(ab.data(), h, w, g);
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
      const double var_a = e_aa[i] - mu_a[i] * mu_a[i];
      const double var_b = e_bb[i] - mu_b[i] * mu_b[i];
      const double cov = e_ab[i] - mu_a[i] * mu_b[i];
      const double num = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
      const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (var_a + var_b + c2);
      total += num / den;
    }
    count += mu_a.size();
  }
  return total / static_cast<double>(count);
}

std::string MetricReport::to_csv() const {
  std::string out = "name,psnr_db,ssim\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, ",%.6f,%.8f\n", r.psnr_db, r.ssim);
    out += r.name + buf;
  }
  std::snprintf(buf, sizeof buf, "MEAN,%.6f,%.8f\n", mean_psnr_db, mean_ssim);
  return out + buf;
}

MetricReport make_report(std::vector<MetricRow> rows) {
  MetricReport report;
  report.rows = std::move(rows);
  if (report.rows.empty()) return report;
  for (const auto& r : report.rows) {
    report.mean_psnr_db += r.psnr_db;
    report.mean_ssim += r.ssim;
  }
  report.mean_psnr_db /= static_cast<double>(report.rows.size());
  report.mean_ssim /= static_cast<double>(report.rows.size());
  return report;
}

MetricReport evaluate_dirs(const std::filesystem::path& predicted, const std::filesystem::path& reference,
                           std::size_t threads) {
  const auto files = list_images(predicted);
  require(!files.empty(), "no images to evaluate in " + predicted.string());
  if (!std::filesystem::is_directory(reference)) throw IoError("not a directory: " + reference.string());
  std::vector<MetricRow> rows(files.size());
  parallel_for(files.size(), threads, [&](std::size_t i) {
    const auto name = files[i].filename();
    const auto ref_path = reference / name;
    if (!std::filesystem::exists(ref_path)) throw IoError("no reference image for " + name.string());
    const auto pred = read_image(files[i]);
    const auto ref = read_image(ref_path);
    rows[i] = {name.string(), psnr(pred, ref), ssim(pred, ref)};
  });
  return make_report(std::move(rows));
}

}  // namespace freqmosaic
