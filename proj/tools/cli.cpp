#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "freqmosaic/bayer.hpp"
#include "freqmosaic/error.hpp"
#include "freqmosaic/gradcheck_suite.hpp"
#include "freqmosaic/image_io.hpp"
#include "freqmosaic/linegen.hpp"
#include "freqmosaic/metrics.hpp"
#include "freqmosaic/model.hpp"
#include "freqmosaic/parallel.hpp"
#include "freqmosaic/tlc.hpp"
#include "freqmosaic/train.hpp"

namespace freqmosaic::cli {
namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config " + path + " is not valid JSON: " + e.what());
  }
}

// Copies config values into options that were not given on the command line.
// Keys are long option names without the leading dashes.
void apply_config(CLI::App& cmd, const json& cfg, const std::string& source) {
  if (!cfg.is_object()) throw UsageError("config " + source + " must be a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    CLI::Option* opt = cmd.get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") throw UsageError("unknown config key '" + key + "' in " + source);
    if (opt->count() > 0) continue;
    std::string text;
    if (value.is_string())
      text = value.get<std::string>();
    else if (value.is_boolean())
      text = value.get<bool>() ? "true" : "false";
    else if (value.is_number())
      text = value.dump();
    else
      throw UsageError("config key '" + key + "' must be a string, number or boolean");
    opt->add_result(text);
    opt->run_callback();
  }
}

BayerPattern pattern_option(const std::string& name) {
  try {
    return parse_pattern(name);
  } catch (const ContractViolation& e) {
    throw UsageError(e.what());
  }
}

struct MosaicArgs {
  std::string input, output, pattern = "rggb";
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

struct DemosaicArgs {
  std::string input, output, method = "bilinear", ckpt, pattern = "rggb";
  double sigma = 0.0;
  bool tlc = false;
  std::size_t patch = 128, stride = 0;
};

struct TrainArgs {
  std::string config, data, out = "model.ckpt", log;
  TrainConfig train;
  ModelConfig model;
};

struct EvalArgs {
  std::string predicted, reference, out;
};

struct GenArgs {
  std::size_t n = 37;
  std::uint64_t seed = 0;
  std::string dir;
  std::size_t size = 128;
};

struct SpectrumArgs {
  std::string input, output, ratio;
  std::size_t channel = 1;
};

struct GradArgs {
  ModelConfig model;
  GradSuiteOptions suite;
};

int cmd_mosaic(const MosaicArgs& a, std::ostream& out) {
  const auto pattern = pattern_option(a.pattern);
  Image img = read_image(a.input);
  require(img.height % 2 == 0 && img.width % 2 == 0,
          "image is " + std::to_string(img.height) + "x" + std::to_string(img.width) + "; mosaicking needs even sizes");
  if (a.sigma > 0.0) img = add_noise(img, NoiseSpec{a.sigma, a.seed});
  write_cfa(a.output, mosaic(img, pattern));
  out << "wrote " << a.output << " (" << img.height << "x" << img.width << ", " << a.pattern << ")\n";
  return ok;
}

int cmd_demosaic(const DemosaicArgs& a, std::ostream& out) {
  const auto cfa = read_cfa(a.input, pattern_option(a.pattern));
  Image result;
  if (a.method == "bilinear") {
    if (a.tlc) throw UsageError("--tlc applies to --method dfenet only");
    result = bilinear_demosaic(cfa);
  } else {
    if (a.ckpt.empty()) throw UsageError("--method dfenet needs --ckpt");
    const auto ckpt = load_checkpoint(a.ckpt);
    if (a.tlc) {
      if (a.stride % 2 == 1)
        throw ContractViolation("stride " + std::to_string(a.stride) +
                                " is odd; tiles would start on a different Bayer phase");
      result = demosaic_tiled(ckpt.params, ckpt.config, cfa, a.sigma, a.patch, a.stride, threads_from_env());
    } else {
      result = demosaic_dfenet(cfa, a.sigma, ckpt.params, ckpt.config);
    }
  }
  write_image(a.output, result);
  out << "wrote " << a.output << " (" << a.method << (a.tlc ? ", tiled" : "") << ")\n";
  return ok;
}

int cmd_train(TrainArgs a, std::ostream& out) {
  if (a.data.empty()) throw UsageError("train needs --data (or \"data\" in the config)");
  a.model.train_height = a.model.train_width = a.train.crop;
  a.train.checkpoint_path = a.out;
  a.train.log_path = a.log;
  const auto start = std::chrono::steady_clock::now();
  const auto result = train_loop(a.data, a.train, a.model);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out << "trained " << a.train.iterations << " iterations in " << std::fixed << std::setprecision(1) << secs
      << " s";
  if (!result.log.empty())
    out << std::setprecision(6) << ", final L_rec " << result.log.back().loss_rec << ", lambda*L_fft "
        << result.log.back().loss_fft;
  out << "\ncheckpoint " << a.out << "\n";
  return ok;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const auto report = evaluate_dirs(a.predicted, a.reference, threads_from_env());
  const auto csv = report.to_csv();
  if (!a.out.empty()) {
    std::ofstream f(a.out, std::ios::binary);
    if (!(f << csv)) throw IoError("cannot write " + a.out);
  }
  out << csv;
  return ok;
}

int cmd_gen_dataset(const GenArgs& a, std::ostream& out) {
  if (a.n == 0) throw ContractViolation("gen-dataset needs n >= 1");
  const auto m = gen_dataset(a.n, a.seed, a.dir, a.size, threads_from_env());
  out << "wrote " << m.entries.size() << " images and manifest.json to " << a.dir << "\n";
  return ok;
}

int cmd_spectrum(const SpectrumArgs& a, std::ostream& out) {
  if (a.channel > 2) throw UsageError("--channel must be 0, 1 or 2");
  const auto img = read_image(a.input);
  const Tensor plane = channel_plane(img, a.channel);
  Tensor heat;
  if (a.ratio.empty()) {
    heat = spectrum(plane);
  } else {
    const auto ref = read_image(a.ratio);
    require(ref.height == img.height && ref.width == img.width, "--ratio image must match the input size");
    heat = spectrum_ratio(plane, channel_plane(ref, a.channel));
  }
  write_plane(a.output, heat);
  out << "wrote " << a.output << "\n";
  return ok;
}

int cmd_gradcheck(const GradArgs& a, std::ostream& out) {
  a.model.validate();
  bool all_passed = true;
  double worst = 0.0;
  char line[160];
  const auto entries = run_gradcheck_suite(a.model, a.suite, [&](const GradSuiteEntry& e) {
    std::snprintf(line, sizeof line, "%-30s max_rel_err %.3e  coords %6zu  kinks %4zu  %s\n", e.name.c_str(),
                  std::max(e.max_rel_error, e.max_kink_rel_error), e.coordinates, e.kinks,
                  e.passed ? "ok" : "FAIL");
    out << line << std::flush;
  });
  for (const auto& e : entries) {
    all_passed = all_passed && e.passed;
    worst = std::max({worst, e.max_rel_error, e.max_kink_rel_error});
  }
  std::snprintf(line, sizeof line, "max rel err %.3e (tolerance %.1e): %s\n", worst, a.suite.tolerance,
                all_passed ? "PASS" : "FAIL");
  out << line;
  return all_passed ? ok : contract_violation;
}

void add_model_options(CLI::App& cmd, ModelConfig& m) {
  cmd.add_option("--channels", m.channels, "feature channels C")->capture_default_str();
  cmd.add_option("--groups", m.groups, "number of groups M")->capture_default_str();
  cmd.add_option("--n1", m.n1, "coarse blocks per group")->capture_default_str();
  cmd.add_option("--n2", m.n2, "refinement blocks per group")->capture_default_str();
  cmd.add_option("--selector-scale", m.selector_scale, "selector downscale s")->capture_default_str();
  cmd.add_option("--reduction", m.reduction, "channel attention reduction")->capture_default_str();
}

ModelConfig desk_model() {
  ModelConfig m;
  m.channels = 16;
  m.groups = 2;
  m.n1 = 2;
  m.n2 = 2;
  m.selector_scale = 8;
  m.reduction = 4;
  m.train_height = m.train_width = 32;
  return m;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayer demosaicking with frequency-domain feature selection", "freqmosaic"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "freqmosaic 0.1.0");

  std::string config;
  const auto config_option = [&config](CLI::App* cmd) {
    cmd->add_option("--config", config, "JSON file with option values; command-line flags win")
        ->check(CLI::ExistingFile);
  };

  MosaicArgs mosaic_args;
  auto* mosaic_cmd = app.add_subcommand("mosaic", "sample an RGB image through a Bayer CFA");
  mosaic_cmd->add_option("input", mosaic_args.input, "RGB image")->required();
  mosaic_cmd->add_option("output", mosaic_args.output, "single-plane CFA image")->required();
  mosaic_cmd->add_option("--pattern", mosaic_args.pattern, "rggb, grbg, gbrg or bggr")->capture_default_str();
  mosaic_cmd->add_option("--sigma", mosaic_args.sigma, "noise level on the 0-255 scale")->capture_default_str();
  mosaic_cmd->add_option("--seed", mosaic_args.seed, "noise seed")->capture_default_str();
  config_option(mosaic_cmd);

  DemosaicArgs dm;
  auto* demosaic_cmd = app.add_subcommand("demosaic", "reconstruct RGB from a CFA image");
  demosaic_cmd->add_option("input", dm.input, "single-plane CFA image")->required();
  demosaic_cmd->add_option("output", dm.output, "RGB output")->required();
  demosaic_cmd->add_option("--method", dm.method)->check(CLI::IsMember({"bilinear", "dfenet"}))->capture_default_str();
  demosaic_cmd->add_option("--ckpt", dm.ckpt, "checkpoint for --method dfenet");
  demosaic_cmd->add_option("--sigma", dm.sigma, "noise level fed to the network")->capture_default_str();
  demosaic_cmd->add_option("--pattern", dm.pattern, "CFA layout of the input")->capture_default_str();
  demosaic_cmd->add_flag("--tlc", dm.tlc, "run on overlapping tiles and average the overlaps");
  demosaic_cmd->add_option("--patch", dm.patch, "tile size")->capture_default_str();
  demosaic_cmd->add_option("--stride", dm.stride, "tile stride (0: patch/2); must be even")->capture_default_str();
  config_option(demosaic_cmd);

  TrainArgs tr;
  tr.model = desk_model();
  auto* train_cmd = app.add_subcommand("train", "train a model on a directory of images");
  train_cmd->add_option("config", tr.config, "JSON config (same keys as the flags)")->check(CLI::ExistingFile);
  train_cmd->add_option("--data", tr.data, "directory of training images");
  train_cmd->add_option("--out", tr.out, "checkpoint path")->capture_default_str();
  train_cmd->add_option("--log", tr.log, "CSV loss log");
  train_cmd->add_option("--iterations", tr.train.iterations)->capture_default_str();
  train_cmd->add_option("--batch-size", tr.train.batch_size)->capture_default_str();
  train_cmd->add_option("--crop", tr.train.crop, "training crop (also the model's training size)")
      ->capture_default_str();
  train_cmd->add_option("--lr-max", tr.train.lr_max)->capture_default_str();
  train_cmd->add_option("--lr-min", tr.train.lr_min)->capture_default_str();
  train_cmd->add_option("--lambda", tr.train.lambda, "weight of the frequency loss")->capture_default_str();
  train_cmd->add_option("--sigma-min", tr.train.sigma_min)->capture_default_str();
  train_cmd->add_option("--sigma-max", tr.train.sigma_max)->capture_default_str();
  train_cmd->add_option("--augment", tr.train.augment, "random flips and rotations (true/false)")
      ->capture_default_str();
  train_cmd->add_option("--seed", tr.train.seed)->capture_default_str();
  train_cmd->add_option("--checkpoint-every", tr.train.checkpoint_every)->capture_default_str();
  add_model_options(*train_cmd, tr.model);

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "PSNR and SSIM of predictions against references");
  eval_cmd->add_option("predicted", ev.predicted, "directory of predictions")->required();
  eval_cmd->add_option("reference", ev.reference, "directory of ground truth with matching names")->required();
  eval_cmd->add_option("--out", ev.out, "also write the CSV here");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-dataset", "render a line-pattern test set");
  gen_cmd->add_option("n", gen.n, "number of images")->required();
  gen_cmd->add_option("seed", gen.seed, "global seed")->required();
  gen_cmd->add_option("dir", gen.dir, "output directory")->required();
  gen_cmd->add_option("--size", gen.size, "image size")->capture_default_str();

  SpectrumArgs sp;
  auto* spectrum_cmd = app.add_subcommand("spectrum", "write a log-magnitude spectrum or spectrum-ratio heatmap");
  spectrum_cmd->alias("analyze-spectrum");
  spectrum_cmd->add_option("input", sp.input)->required();
  spectrum_cmd->add_option("output", sp.output)->required();
  spectrum_cmd->add_option("--ratio", sp.ratio, "reference image; writes |F(input)| / |F(ref)|");
  spectrum_cmd->add_option("--channel", sp.channel, "0=R, 1=G, 2=B")->capture_default_str();

  GradArgs gc;
  gc.model = desk_model();
  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference check of every op, block and loss");
  grad_cmd->alias("grad-check");
  add_model_options(*grad_cmd, gc.model);
  grad_cmd->add_option("--size", gc.suite.image_size, "input size for the network checks")->capture_default_str();
  grad_cmd->add_option("--fraction", gc.suite.param_fraction, "share of network parameters sampled")
      ->capture_default_str();
  grad_cmd->add_option("--eps", gc.suite.eps, "central-difference step")->capture_default_str();
  grad_cmd->add_option("--tolerance", gc.suite.tolerance)->capture_default_str();
  grad_cmd->add_option("--seed", gc.suite.seed)->capture_default_str();
  config_option(grad_cmd);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, eo;
    const int code = app.exit(e, o, eo);
    out << o.str();
    err << eo.str();
    return code == 0 ? ok : usage;
  }

  CLI::App* cmd = app.get_subcommands().front();
  if (cmd == train_cmd && !tr.config.empty()) apply_config(*cmd, read_json_file(tr.config), tr.config);
  if (!config.empty()) apply_config(*cmd, read_json_file(config), config);

  if (cmd == mosaic_cmd) return cmd_mosaic(mosaic_args, out);
  if (cmd == demosaic_cmd) return cmd_demosaic(dm, out);
  if (cmd == train_cmd) return cmd_train(tr, out);
  if (cmd == eval_cmd) return cmd_eval(ev, out);
  if (cmd == gen_cmd) return cmd_gen_dataset(gen, out);
  if (cmd == spectrum_cmd) return cmd_spectrum(sp, out);
  gc.model.train_height = gc.model.train_width = gc.suite.image_size;
  return cmd_gradcheck(gc, out);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return usage;
  } catch (const CLI::Error& e) {
    err << "usage error: " << e.what() << "\n";
    return usage;
  } catch (const CorruptCheckpoint& e) {
    err << "corrupt checkpoint: " << e.what() << "\n";
    return corrupt_checkpoint;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return io_error;
  } catch (const ContractViolation& e) {
    err << "contract violation: " << e.what() << "\n";
    return contract_violation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return contract_violation;
  }
}

}  // namespace freqmosaic::cli
