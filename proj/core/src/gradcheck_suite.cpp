#include "freqmosaic/gradcheck_suite.hpp"

#include <random>

#include "freqmosaic/bayer.hpp"
#include "freqmosaic/error.hpp"
#include "freqmosaic/gradcheck.hpp"
#include "freqmosaic/ops.hpp"
#include "freqmosaic/train.hpp"

namespace freqmosaic {
namespace {

Tensor uniform(Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t(std::move(shape));
  for (auto& v : t.storage()) v = dist(rng);
  return t;
}

// Weighted sums keep the upstream gradient non-uniform.
Var probe(const Var& x, std::uint64_t seed) { return sum(mul(x, constant(uniform(x.shape(), seed)))); }

Var probe(const CVar& x, std::uint64_t seed) { return add(probe(real(x), seed), probe(imag(x), seed + 1)); }

std::vector<Tensor*> non_selector(ModelParams& p) {
  std::vector<Tensor*> out;
  for (auto& r : p.list())
    if (r.name.find("selector") == std::string::npos) out.push_back(r.tensor);
  return out;
}

class Runner {
 public:
  Runner(const GradSuiteOptions& opt, const std::function<void(const GradSuiteEntry&)>& progress)
      : opt_(opt), progress_(progress) {}

  void op(const std::string& name, const Tensor& x, const ScalarFn& f) {
    GradSuiteEntry e;
    e.name = name;
    e.max_rel_error = grad_check(f, x, opt_.eps);
    e.coordinates = x.numel();
    record(std::move(e));
  }

  void params(const std::string& name, const std::function<Var(Tape&)>& loss, const std::vector<Tensor*>& ps,
              double fraction) {
    const auto r = grad_check_params(loss, ps, opt_.eps, fraction, opt_.seed + results_.size(), opt_.tolerance);
    for (auto* p : ps) {
      p->clear_grad();
      p->set_requires_grad(false);
    }
    GradSuiteEntry e;
    e.name = name;
    e.max_rel_error = r.max_rel_error;
    e.coordinates = r.coordinates;
    e.kinks = r.kinks;
    e.max_kink_rel_error = r.max_kink_rel_error;
    record(std::move(e));
  }

  std::vector<GradSuiteEntry> take() { return std::move(results_); }

 private:
  void record(GradSuiteEntry e) {
    e.passed = e.max_rel_error < opt_.tolerance && e.max_kink_rel_error < opt_.tolerance;
    if (progress_) progress_(e);
    results_.push_back(std::move(e));
  }

  GradSuiteOptions opt_;
  std::function<void(const GradSuiteEntry&)> progress_;
  std::vector<GradSuiteEntry> results_;
};

}  // namespace

std::vector<GradSuiteEntry> run_gradcheck_suite(const ModelConfig& cfg, const GradSuiteOptions& opt,
                                                const std::function<void(const GradSuiteEntry&)>& progress) {
  cfg.validate();
  require(opt.eps > 0.0 && opt.tolerance > 0.0, "gradcheck: eps and tolerance must be positive");
  require(opt.image_size % 4 == 0 && opt.image_size % cfg.selector_scale == 0,
          "gradcheck: image size must be a multiple of 4 and of the selector scale");
  Runner run(opt, progress);
  const std::uint64_t s = opt.seed;

  // Elementary ops on small random inputs.
  const Tensor a = uniform({2, 4, 5}, s + 1), b = uniform({2, 4, 5}, s + 2);
  const Tensor w3 = uniform({3, 2, 3, 3}, s + 3), bias3 = uniform({3}, s + 4);
  for (auto mode : {BorderMode::zeros, BorderMode::reflect}) {
    const std::string tag = mode == BorderMode::zeros ? "" : " (reflect)";
    run.op("conv2d input" + tag, a, [&](Tape& t, const Var& v) {
      return probe(conv2d(v, t.variable(w3), t.variable(bias3), 1, mode), s + 10);
    });
    run.op("conv2d weight" + tag, w3, [&](Tape& t, const Var& v) {
      return probe(conv2d(t.variable(a), v, t.variable(bias3), 1, mode), s + 10);
    });
    run.op("conv2d bias" + tag, bias3, [&](Tape& t, const Var& v) {
      return probe(conv2d(t.variable(a), t.variable(w3), v, 1, mode), s + 10);
    });
  }
  run.op("relu", a, [&](Tape&, const Var& v) { return probe(relu(v), s + 11); });
  run.op("sigmoid", a, [&](Tape&, const Var& v) { return probe(sigmoid(v), s + 12); });
  run.op("abs", a, [&](Tape&, const Var& v) { return probe(abs(v), s + 13); });
  run.op("scale", a, [&](Tape&, const Var& v) { return probe(scale(v, -1.7), s + 14); });
  run.op("add", a, [&](Tape& t, const Var& v) { return probe(add(v, t.variable(b)), s + 15); });
  run.op("sub", a, [&](Tape& t, const Var& v) { return probe(sub(t.variable(b), v), s + 16); });
  run.op("mul", a, [&](Tape& t, const Var& v) { return probe(mul(v, t.variable(b)), s + 17); });
  run.op("concat_channels", a, [&](Tape& t, const Var& v) {
    return probe(concat_channels({t.variable(b), v, v}), s + 18);
  });
  run.op("global_avg_pool", a, [&](Tape&, const Var& v) { return probe(global_avg_pool(v), s + 19); });
  const Tensor gate = uniform({2, 1, 1}, s + 5);
  run.op("scale_channels x", a, [&](Tape& t, const Var& v) {
    return probe(scale_channels(v, t.variable(gate)), s + 20);
  });
  run.op("scale_channels s", gate, [&](Tape& t, const Var& v) {
    return probe(scale_channels(t.variable(a), v), s + 20);
  });
  run.op("bilinear_upsample", uniform({1, 3, 4}, s + 6), [&](Tape&, const Var& v) {
    return probe(bilinear_upsample(v, 7, 9), s + 21);
  });
  run.op("fft2", a, [&](Tape&, const Var& v) { return probe(fft2(v), s + 22); });
  run.op("ifft2", a, [&](Tape&, const Var& v) { return probe(ifft2(fft2(mul(v, v))), s + 23); });
  run.op("complex_mul", a, [&](Tape& t, const Var& v) {
    return probe(complex_mul(fft2(t.variable(b)), v), s + 24);
  });
  run.op("real/imag", a, [&](Tape&, const Var& v) {
    const CVar x = fft2(v);
    return add(probe(real(x), s + 25), scale(probe(imag(x), s + 26), 0.5));
  });
  run.op("cabs", a, [&](Tape&, const Var& v) { return probe(cabs(fft2(v)), s + 27); });
  run.op("sum/mean", a, [&](Tape&, const Var& v) { return add(sum(mul(v, v)), mean(relu(v))); });
  run.op("l1_mean", a, [&](Tape& t, const Var& v) { return l1_mean(v, t.variable(b)); });

  // Losses with respect to their inputs.
  const std::size_t n = opt.image_size;
  const Tensor target = uniform({3, n, n}, s + 30, 0.0, 1.0);
  run.op("loss_rec", uniform({3, n, n}, s + 31, 0.0, 1.0),
         [&](Tape&, const Var& v) { return loss_rec(v, constant(target)); });
  const Tensor other = uniform({3, n, n}, s + 32, 0.0, 1.0);
  run.op("loss_fft", uniform({3, n, n}, s + 33, 0.0, 1.0),
         [&](Tape& t, const Var& v) { return loss_fft({v, t.variable(other)}, constant(target)); });

  // Model blocks and the full network at the requested configuration.
  auto params = init_params(cfg, s + 40);
  const auto c = cfg.channels;
  const Tensor feat = uniform({c, n / 2, n / 2}, s + 41);
  auto& g0 = params.groups[0];
  {
    std::vector<Tensor*> ps;
    for (auto* cp : {&g0.blocks[0].conv1, &g0.blocks[0].conv2, &g0.blocks[0].ca_down, &g0.blocks[0].ca_up}) {
      ps.push_back(&cp->weight);
      ps.push_back(&cp->bias);
    }
    run.params("rcab", [&](Tape& t) { return probe(rcab_forward(t, constant(feat), g0.blocks[0]), s + 42); }, ps,
               1.0);
  }
  {
    const CVar fs = fft2(constant(feat));
    const CVar fc = fft2(constant(uniform({1, n / 2, n / 2}, s + 43, 0.0, 1.0)));
    run.params("ffd", [&](Tape& t) { return probe(ffd_forward(t, fs, fc, g0.ffd), s + 44); },
               {&g0.ffd.reduce.weight, &g0.ffd.reduce.bias, &g0.ffd.expand.weight, &g0.ffd.expand.bias}, 1.0);
  }
  run.op("rfeg input", feat, [&](Tape& t, const Var& v) {
    return probe(rfeg_forward(t, v, constant(uniform({1, n / 2, n / 2}, s + 45, 0.0, 1.0)), g0, cfg.n1), s + 46);
  });

  Image rgb(n, n);
  {
    std::mt19937_64 rng(s + 50);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& v : rgb.values) v = u(rng);
  }
  const CfaImage cfa = mosaic(rgb);
  const Tensor truth = rgb.to_tensor();
  const double sigma = 5.0;
  const auto net = non_selector(params);
  run.params("network L_rec", [&](Tape& t) {
    return loss_rec(dfenet_forward(t, cfa, sigma, params, cfg).output, constant(truth));
  }, net, opt.param_fraction);
  run.params("network L_fft", [&](Tape& t) {
    return loss_fft(dfenet_forward(t, cfa, sigma, params, cfg).intermediates, constant(truth));
  }, net, opt.param_fraction);
  run.params("network lambda*L_fft + L_rec", [&](Tape& t) {
    const auto r = dfenet_forward(t, cfa, sigma, params, cfg);
    return add(scale(loss_fft(r.intermediates, constant(truth)), opt.lambda), loss_rec(r.output, constant(truth)));
  }, net, opt.param_fraction);

  return run.take();
}

}  // namespace freqmosaic
