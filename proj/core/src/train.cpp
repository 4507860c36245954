#include "freqmosaic/train.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <numbers>

#include "freqmosaic/bayer.hpp"
#include "freqmosaic/error.hpp"
#include "freqmosaic/image_io.hpp"
#include "freqmosaic/ops.hpp"

namespace freqmosaic {

void TrainConfig::validate() const {
  require(lr_min <= lr_max, "lr_min must not exceed lr_max");
  require(lambda >= 0.0, "lambda must be non-negative");
  require(batch_size >= 1, "batch size must be >= 1");
  require(crop >= 2 && crop % 2 == 0, "crop size must be even");
  require(sigma_min >= 0.0 && sigma_min <= sigma_max, "noise range must satisfy 0 <= sigma_min <= sigma_max");
}

Var loss_rec(const Var& output, const Var& target) {
  require(output.shape() == target.shape(), "loss_rec: shape mismatch " + shape_string(output.shape()) + " vs " +
                                                shape_string(target.shape()));
  return l1_mean(output, target);
}

Var loss_fft(const std::vector<Var>& intermediates, const Var& target) {
  require(!intermediates.empty(), "loss_fft needs at least one intermediate");
  const CVar target_spectrum = fft2(target);
  const Var target_re = real(target_spectrum), target_im = imag(target_spectrum);
  Var total;
  for (const auto& i : intermediates) {
    require(i.shape() == target.shape(), "loss_fft: shape mismatch " + shape_string(i.shape()) + " vs " +
                                             shape_string(target.shape()));
    const CVar spectrum = fft2(i);
    const Var term = add(l1_mean(real(spectrum), target_re), l1_mean(imag(spectrum), target_im));
    total = total.valid() ? add(total, term) : term;
  }
  return total;
}

double cosine_lr(std::size_t step, std::size_t total, double lr_max, double lr_min) {
  require(step <= total, "cosine_lr: step beyond schedule");
  if (total == 0) return lr_max;
  const double phase = std::numbers::pi * static_cast<double>(step) / static_cast<double>(total);
  return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(phase));
}

AdamState make_adam_state(ModelParams& params) {
  AdamState s;
  for (const auto& p : params.list()) {
    s.m.emplace_back(p.tensor->shape());
    s.v.emplace_back(p.tensor->shape());
  }
  return s;
}

void adam_update(ModelParams& params, AdamState& state, double lr, const TrainConfig& cfg,
                 const std::function<bool(ParamRole)>& include) {
  const auto list = params.list();
  require(state.m.size() == list.size(), "optimizer state does not match the parameter set");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < list.size(); ++k) {
    if (!include(list[k].role)) continue;
    Tensor& p = *list[k].tensor;
    if (!p.has_grad()) continue;
    const auto g = p.grad();
    auto m = state.m[k].data();
    auto v = state.v[k].data();
    auto w = p.data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.eps);
    }
  }
}

namespace {

Var accumulate(const Var& total, const Var& term) { return total.valid() ? add(total, term) : term; }

}  // namespace

double frequency_pass(const std::vector<Sample>& batch, ModelParams& params, const ModelConfig& model_cfg,
                      AdamState& state, double lr, const TrainConfig& cfg) {
  require(!batch.empty(), "empty mini-batch");
  params.set_requires_grad(true);
  Tape tape;
  Var total;
  for (const auto& s : batch) {
    const auto r = dfenet_forward(tape, s.cfa, s.sigma, params, model_cfg);
    total = accumulate(total, loss_fft(r.intermediates, constant(s.target)));
  }
  total = scale(total, cfg.lambda / static_cast<double>(batch.size()));
  tape.backward(total);
  adam_update(params, state, lr, cfg, [](ParamRole) { return true; });
  return total.value().item();
}

double reconstruction_pass(const std::vector<Sample>& batch, ModelParams& params, const ModelConfig& model_cfg,
                           AdamState& state, double lr, const TrainConfig& cfg) {
  require(!batch.empty(), "empty mini-batch");
  params.set_requires_grad(true);
  Tape tape;
  Var total;
  for (const auto& s : batch) {
    const auto r = dfenet_forward(tape, s.cfa, s.sigma, params, model_cfg);
    total = accumulate(total, loss_rec(r.output, constant(s.target)));
  }
  total = scale(total, 1.0 / static_cast<double>(batch.size()));
  tape.backward(total);
  adam_update(params, state, lr, cfg, [](ParamRole role) { return role != ParamRole::restorer; });
  return total.value().item();
}

StepLosses stagewise_step(const std::vector<Sample>& batch, ModelParams& params, const ModelConfig& model_cfg,
                          AdamState& state, double lr, const TrainConfig& cfg) {
  StepLosses losses;
  losses.loss_fft = frequency_pass(batch, params, model_cfg, state, lr, cfg);
  losses.loss_rec = reconstruction_pass(batch, params, model_cfg, state, lr, cfg);
  return losses;
}

SampleStream::SampleStream(const std::vector<Image>& images, const TrainConfig& cfg)
    : images_(images), cfg_(cfg), rng_(cfg.seed) {
  require(!images_.empty(), "training set is empty");
  for (const auto& img : images_)
    require(img.height >= cfg.crop && img.width >= cfg.crop,
            "training image " + std::to_string(img.height) + "x" + std::to_string(img.width) +
                " is smaller than the crop size " + std::to_string(cfg.crop));
}

Sample SampleStream::next() {
  const auto n = cfg_.crop;
  const auto& src = images_[std::uniform_int_distribution<std::size_t>(0, images_.size() - 1)(rng_)];
  const auto y0 = std::uniform_int_distribution<std::size_t>(0, src.height - n)(rng_);
  const auto x0 = std::uniform_int_distribution<std::size_t>(0, src.width - n)(rng_);

  bool hflip = false, vflip = false;
  int rot = 0;
  if (cfg_.augment) {
    hflip = std::bernoulli_distribution(0.5)(rng_);
    vflip = std::bernoulli_distribution(0.5)(rng_);
    rot = std::uniform_int_distribution<int>(0, 3)(rng_);
  }
  const double sigma = std::uniform_real_distribution<double>(cfg_.sigma_min, cfg_.sigma_max)(rng_);
  const std::uint64_t noise_seed = rng_();

  Image crop(n, n);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t x = 0; x < n; ++x) {
        std::size_t sy = y, sx = x;
        for (int k = 0; k < rot; ++k) {  // rotate by 90 degrees k times
          const std::size_t ty = sx, tx = n - 1 - sy;
          sy = ty;
          sx = tx;
        }
        if (hflip) sx = n - 1 - sx;
        if (vflip) sy = n - 1 - sy;
        crop.at(y, x, c) = src.at(y0 + sy, x0 + sx, c);
      }

  Sample s;
  s.sigma = sigma;
  s.target = crop.to_tensor();
  s.cfa = mosaic(add_noise(crop, {sigma, noise_seed}));
  return s;
}

TrainResult train(const std::vector<Image>& images, const TrainConfig& cfg, const ModelConfig& model_cfg) {
  cfg.validate();
  model_cfg.validate();
  require(model_cfg.train_height == cfg.crop && model_cfg.train_width == cfg.crop,
          "model training size must equal the crop size");

  TrainResult result;
  result.checkpoint.config = model_cfg;
  result.checkpoint.params = init_params(model_cfg, cfg.seed);
  ModelParams& params = result.checkpoint.params;
  AdamState state = make_adam_state(params);
  SampleStream stream(images, cfg);

  std::ofstream log;
  if (!cfg.log_path.empty()) {
    log.open(cfg.log_path);
    if (!log) throw IoError("cannot open training log " + cfg.log_path.string());
    log << "iter,lr,loss_fft,loss_rec\n";
  }

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    std::vector<Sample> batch;
    for (std::size_t b = 0; b < cfg.batch_size; ++b) batch.push_back(stream.next());
    const double lr = cosine_lr(it, cfg.iterations, cfg.lr_max, cfg.lr_min);
    const auto losses = stagewise_step(batch, params, model_cfg, state, lr, cfg);
    const LogRow row{it, lr, losses.loss_fft, losses.loss_rec};
    result.log.push_back(row);
    if (log.is_open()) {
      char line[160];
      std::snprintf(line, sizeof line, "%zu,%.9g,%.9g,%.9g\n", row.iter, row.lr, row.loss_fft, row.loss_rec);
      log << line << std::flush;
    }
    if (cfg.checkpoint_every > 0 && !cfg.checkpoint_path.empty() && (it + 1) % cfg.checkpoint_every == 0)
      save_checkpoint(cfg.checkpoint_path, result.checkpoint);
  }

  for (auto& p : params.list()) {
    p.tensor->clear_grad();
    p.tensor->set_requires_grad(false);
  }
  if (!cfg.checkpoint_path.empty()) save_checkpoint(cfg.checkpoint_path, result.checkpoint);
  return result;
}

TrainResult train_loop(const std::filesystem::path& dir, const TrainConfig& cfg, const ModelConfig& model_cfg) {
  std::vector<Image> images;
  for (const auto& f : list_images(dir)) images.push_back(read_image(f));
  require(!images.empty(), "no training images found in " + dir.string());
  return train(images, cfg, model_cfg);
}

}  // namespace freqmosaic
