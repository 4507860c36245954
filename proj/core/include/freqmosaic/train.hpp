#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <vector>

#include "freqmosaic/image.hpp"
#include "freqmosaic/model.hpp"

namespace freqmosaic {

struct TrainConfig {
  std::size_t iterations = 1000;
  std::size_t batch_size = 1;
  std::size_t crop = 32;
  double lr_max = 1e-4;
  double lr_min = 1e-6;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double lambda = 0.01;
  double sigma_min = 0.0;
  double sigma_max = 20.0;
  bool augment = true;
  std::uint64_t seed = 0;
  std::size_t checkpoint_every = 0;  // 0 disables periodic checkpoints
  std::filesystem::path checkpoint_path;  // empty: no checkpoint files
  std::filesystem::path log_path;         // empty: no CSV log

  void validate() const;
};

/// Mean absolute difference.
Var loss_rec(const Var& output, const Var& target);

/// Sum over intermediates of mean|Re dF| + mean|Im dF|, where dF is the
/// difference of the 2D spectra of intermediate and target.
Var loss_fft(const std::vector<Var>& intermediates, const Var& target);

double cosine_lr(std::size_t step, std::size_t total, double lr_max, double lr_min);

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::size_t step = 0;
};

/// Moment buffers shaped like every parameter of `params`, in canonical order.
AdamState make_adam_state(ModelParams& params);

/// One Adam step with bias correction over the parameters whose role is
/// accepted by `include`; gradients are read from the tensors' grad buffers.
/// The step counter advances once per call.
void adam_update(ModelParams& params, AdamState& state, double lr, const TrainConfig& cfg,
                 const std::function<bool(ParamRole)>& include);

struct Sample {
  CfaImage cfa;
  double sigma = 0.0;
  Tensor target;  // [3,H,W]
};

struct StepLosses {
  double loss_fft = 0.0;  // weighted by lambda
  double loss_rec = 0.0;
};

/// Stage 1: forward, lambda * L_fft, backward, Adam on backbone and restorers.
/// Returns the weighted, batch-averaged loss.
double frequency_pass(const std::vector<Sample>& batch, ModelParams& params, const ModelConfig& model_cfg,
                      AdamState& state, double lr, const TrainConfig& cfg);

/// Stage 2: fresh forward, L_rec, backward, Adam on the backbone only.
double reconstruction_pass(const std::vector<Sample>& batch, ModelParams& params, const ModelConfig& model_cfg,
                           AdamState& state, double lr, const TrainConfig& cfg);

/// frequency_pass followed by reconstruction_pass on the same mini-batch.
StepLosses stagewise_step(const std::vector<Sample>& batch, ModelParams& params, const ModelConfig& model_cfg,
                          AdamState& state, double lr, const TrainConfig& cfg);

struct LogRow {
  std::size_t iter = 0;
  double lr = 0.0;
  double loss_fft = 0.0;
  double loss_rec = 0.0;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<LogRow> log;
};

/// Deterministic sampler: random image, crop, flip/rot90, noise level,
/// noise, mosaic.
class SampleStream {
 public:
  SampleStream(const std::vector<Image>& images, const TrainConfig& cfg);
  Sample next();

 private:
  const std::vector<Image>& images_;
  TrainConfig cfg_;
  std::mt19937_64 rng_;
};

TrainResult train(const std::vector<Image>& images, const TrainConfig& cfg, const ModelConfig& model_cfg);

/// Loads every PNG/PPM in `dir` (sorted by name) and trains on it.
TrainResult train_loop(const std::filesystem::path& dir, const TrainConfig& cfg, const ModelConfig& model_cfg);

}  // namespace freqmosaic
