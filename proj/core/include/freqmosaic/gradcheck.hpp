#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "freqmosaic/tape.hpp"

namespace freqmosaic {

/// Scalar function of one tensor, built on the given tape.
using ScalarFn = std::function<Var(Tape&, const Var&)>;

/// Max over coordinates of |analytic - central difference| / max(1, |central difference|).
/// Functions that route through binarize_ste have no contract here.
double grad_check(const ScalarFn& f, const Tensor& x, double eps = 1e-5);

struct GradCheckReport {
  double max_rel_error = 0.0;  // over coordinates not classified as kinks
  std::size_t coordinates = 0;
  std::size_t kinks = 0;
  double max_kink_rel_error = 0.0;  // one-sided check on the smooth side
};

/// Gradient check of a loss over several bound parameter tensors. `loss` must
/// bind every tensor in `params` through Tape::leaf. A `fraction` in (0,1]
/// of the coordinates (at least one per tensor) is sampled with `seed`.
///
/// With `kink_tolerance` > 0, a coordinate whose central difference misses by
/// more than that is re-examined with half-step one-sided slopes. When the
/// slopes on exactly one side of x are mutually consistent and the other side
/// is not, the step straddles a non-differentiable point (a ReLU or |.| kink);
/// the coordinate is then counted in `kinks` and judged by the one-sided slope
/// of the smooth side instead.
GradCheckReport grad_check_params(const std::function<Var(Tape&)>& loss,
                                  const std::vector<Tensor*>& params, double eps,
                                  double fraction = 1.0, std::uint64_t seed = 0,
                                  double kink_tolerance = 0.0);

}  // namespace freqmosaic
