#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "freqmosaic/model.hpp"

namespace freqmosaic {

struct GradSuiteOptions {
  double eps = 1e-5;
  double tolerance = 1e-4;
  std::size_t image_size = 32;        // network checks run on image_size^2 inputs
  double param_fraction = 0.01;       // sampled share of network parameters
  double lambda = 0.01;               // weight of the frequency loss in the total
  std::uint64_t seed = 0;
};

struct GradSuiteEntry {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  std::size_t kinks = 0;  // coordinates judged one-sidedly, see grad_check_params
  double max_kink_rel_error = 0.0;
  bool passed = false;
};

/// Central-difference checks of every differentiable op, the model blocks and
/// the training losses through the full network built from `cfg`. Selector
/// tensors are excluded: their gradient is a straight-through estimate.
/// `progress` is called after each entry when set.
std::vector<GradSuiteEntry> run_gradcheck_suite(const ModelConfig& cfg, const GradSuiteOptions& opt,
                                                const std::function<void(const GradSuiteEntry&)>& progress = {});

}  // namespace freqmosaic
