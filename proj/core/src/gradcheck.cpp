#include "freqmosaic/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "freqmosaic/error.hpp"

namespace freqmosaic {
namespace {

double rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric));
}

}  // namespace

double grad_check(const ScalarFn& f, const Tensor& x, double eps) {
  require(eps > 0.0, "grad_check: eps must be positive");
  Tape tape;
  Var xv = tape.variable(x);
  Var loss = f(tape, xv);
  tape.backward(loss);
  const Tensor analytic = xv.grad();

  auto eval = [&](const Tensor& point) {
    Tape t;
    return f(t, t.variable(point)).value().item();
  };

  double worst = 0.0;
  Tensor probe = x;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + eps;
    const double up = eval(probe);
    probe[i] = orig - eps;
    const double down = eval(probe);
    probe[i] = orig;
    worst = std::max(worst, rel_error(analytic[i], (up - down) / (2.0 * eps)));
  }
  return worst;
}

GradCheckReport grad_check_params(const std::function<Var(Tape&)>& loss,
                                  const std::vector<Tensor*>& params, double eps,
                                  double fraction, std::uint64_t seed, double kink_tolerance) {
  require(eps > 0.0, "grad_check: eps must be positive");
  require(fraction > 0.0 && fraction <= 1.0, "grad_check: fraction must be in (0,1]");
  for (auto* p : params) p->set_requires_grad(true);
  {
    Tape tape;
    tape.backward(loss(tape));
  }

  auto eval = [&] {
    Tape t;
    return loss(t).value().item();
  };

  std::mt19937_64 rng(seed);
  GradCheckReport report;
  for (auto* p : params) {
    const std::vector<double> analytic(p->grad().begin(), p->grad().end());
    std::vector<std::size_t> idx(p->numel());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::size_t count = idx.size();
    if (fraction < 1.0) {
      std::shuffle(idx.begin(), idx.end(), rng);
      count = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * idx.size())));
    }
    for (std::size_t k = 0; k < count && k < idx.size(); ++k) {
      const auto i = idx[k];
      double& slot = p->storage()[i];
      const double orig = slot;
      slot = orig + eps;
      const double up = eval();
      slot = orig - eps;
      const double down = eval();
      ++report.coordinates;
      const double err = rel_error(analytic[i], (up - down) / (2.0 * eps));
      if (kink_tolerance <= 0.0 || err < kink_tolerance) {
        slot = orig;
        report.max_rel_error = std::max(report.max_rel_error, err);
        continue;
      }
      const double h = eps / 2.0;
      slot = orig + h;
      const double up_half = eval();
      slot = orig - h;
      const double down_half = eval();
      slot = orig;
      const double mid = eval();
      const double left_near = (mid - down_half) / h, left_far = (down_half - down) / h;
      const double right_near = (up_half - mid) / h, right_far = (up - up_half) / h;
      const bool left_smooth = rel_error(left_near, left_far) < kink_tolerance;
      const bool right_smooth = rel_error(right_near, right_far) < kink_tolerance;
      if (left_smooth != right_smooth) {
        ++report.kinks;
        const double one_sided = left_smooth ? left_near : right_near;
        report.max_kink_rel_error = std::max(report.max_kink_rel_error, rel_error(analytic[i], one_sided));
      } else {
        report.max_rel_error = std::max(report.max_rel_error, err);
      }
    }
  }
  return report;
}

}  // namespace freqmosaic
