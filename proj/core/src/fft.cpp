#include "freqmosaic/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "freqmosaic/error.hpp"

namespace freqmosaic {
namespace {

// FFTW plans are cached per (channels, H, W). Planning is not thread-safe, so
// the cache is guarded; executing a plan on new arrays is.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t channels, std::size_t h, std::size_t w) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(channels, h, w);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    fftw_iodim dims[2] = {
        {static_cast<int>(h), static_cast<int>(w), static_cast<int>(w)},
        {static_cast<int>(w), 1, 1},
    };
    fftw_iodim batch = {static_cast<int>(channels), static_cast<int>(h * w),
                        static_cast<int>(h * w)};
    const std::size_t n = channels * h * w;
    std::vector<double> in(2 * n, 0.0), out(2 * n, 0.0);
    double* ri = in.data();
    double* ii = ri + n;
    double* ro = out.data();
    double* io = ro + n;
    fftw_plan plan = fftw_plan_guru_split_dft(2, dims, 1, &batch, ri, ii, ro, io,
                                              FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan) throw ContractViolation("fftw could not plan transform");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

void check_rank3(const Shape& s) {
  require(s.size() == 3 && s[1] >= 1 && s[2] >= 1,
          "fft2 expects a [C,H,W] tensor, got " + shape_string(s));
}

// Forward (sign -1) transform. The inverse-sign transform is obtained by
// swapping the real and imaginary planes on both input and output. FFTW's
// new-array execution requires the same re/im separation as at planning
// time, so each side goes through one contiguous [first | second] buffer.
ComplexTensor transform(const ComplexTensor& x, bool conjugate_sign) {
  check_rank3(x.shape());
  const auto c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const auto n = x.numel();
  ComplexTensor out(x.shape());
  if (n == 0) return out;
  fftw_plan plan = plan_cache().get(c, h, w);

  const auto first = conjugate_sign ? x.im() : x.re();
  const auto second = conjugate_sign ? x.re() : x.im();
  std::vector<double> in(2 * n), res(2 * n);
  std::copy(first.begin(), first.end(), in.begin());
  std::copy(second.begin(), second.end(), in.begin() + static_cast<std::ptrdiff_t>(n));
  fftw_execute_split_dft(plan, in.data(), in.data() + n, res.data(), res.data() + n);

  auto out_first = conjugate_sign ? out.im() : out.re();
  auto out_second = conjugate_sign ? out.re() : out.im();
  std::copy_n(res.begin(), n, out_first.begin());
  std::copy_n(res.begin() + static_cast<std::ptrdiff_t>(n), n, out_second.begin());
  return out;
}

}  // namespace

ComplexTensor fft2(const Tensor& x) {
  check_rank3(x.shape());
  return transform(ComplexTensor::from_real(x), false);
}

ComplexTensor fft2(const ComplexTensor& x) { return transform(x, false); }

ComplexTensor fft2_adjoint(const ComplexTensor& x) { return transform(x, true); }

ComplexTensor ifft2(const ComplexTensor& x) {
  ComplexTensor out = transform(x, true);
  const double norm = 1.0 / static_cast<double>(x.dim(1) * x.dim(2));
  for (auto& v : out.re()) v *= norm;
  for (auto& v : out.im()) v *= norm;
  return out;
}

Tensor fftshift(const Tensor& x) {
  check_rank3(x.shape());
  const auto c = x.dim(0), h = x.dim(1), w = x.dim(2);
  Tensor out(x.shape());
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t xx = 0; xx < w; ++xx)
        out.at(ch, (y + h / 2) % h, (xx + w / 2) % w) = x.at(ch, y, xx);
  return out;
}

}  // namespace freqmosaic
