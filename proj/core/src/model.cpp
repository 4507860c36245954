#include "freqmosaic/model.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <zlib.h>

#include "freqmosaic/error.hpp"
#include "freqmosaic/ops.hpp"
#include "freqmosaic/serialize.hpp"

namespace freqmosaic {

void ModelConfig::validate() const {
  require(channels >= 1 && groups >= 1, "model needs at least one channel and one group");
  require(reduction >= 1 && channels % reduction == 0,
          "channels (" + std::to_string(channels) + ") must be divisible by the RCAB reduction (" +
              std::to_string(reduction) + ")");
  require(selector_scale >= 1, "selector scale must be >= 1");
  require(train_height % selector_scale == 0 && train_width % selector_scale == 0,
          "training size must be divisible by the selector scale");
  require(train_height >= selector_scale && train_width >= selector_scale, "training size smaller than selector scale");
}

namespace {

template <typename Params, typename Fn>
void visit_params(Params& p, Fn&& fn) {
  auto conv = [&](const std::string& name, auto& c, ParamRole role) {
    fn(name + ".weight", c.weight, role);
    fn(name + ".bias", c.bias, role);
  };
  conv("init", p.init, ParamRole::backbone);
  for (std::size_t g = 0; g < p.groups.size(); ++g) {
    auto& grp = p.groups[g];
    const std::string prefix = "group" + std::to_string(g) + ".";
    for (std::size_t b = 0; b < grp.blocks.size(); ++b) {
      const std::string bp = prefix + "block" + std::to_string(b) + ".";
      conv(bp + "conv1", grp.blocks[b].conv1, ParamRole::backbone);
      conv(bp + "conv2", grp.blocks[b].conv2, ParamRole::backbone);
      conv(bp + "ca_down", grp.blocks[b].ca_down, ParamRole::backbone);
      conv(bp + "ca_up", grp.blocks[b].ca_up, ParamRole::backbone);
    }
    fn(prefix + "selector_gn", grp.selector_gn, ParamRole::backbone);
    fn(prefix + "selector_sp", grp.selector_sp, ParamRole::backbone);
    conv(prefix + "ffd.reduce", grp.ffd.reduce, ParamRole::backbone);
    conv(prefix + "ffd.expand", grp.ffd.expand, ParamRole::backbone);
    conv(prefix + "fuse", grp.fuse, ParamRole::backbone);
    conv(prefix + "restorer", grp.restorer, ParamRole::restorer);
  }
  conv("final", p.final, ParamRole::backbone);
}

ConvParams make_conv(std::size_t cout, std::size_t cin, std::size_t k, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cin * k * k));
  std::uniform_real_distribution<double> dist(-bound, bound);
  ConvParams c{Tensor(Shape{cout, cin, k, k}), Tensor(Shape{cout})};
  for (auto& v : c.weight.data()) v = dist(rng);
  return c;
}

}  // namespace

std::vector<ParamRef> ModelParams::list() {
  std::vector<ParamRef> out;
  visit_params(*this, [&](const std::string& name, Tensor& t, ParamRole role) { out.push_back({name, &t, role}); });
  return out;
}

std::size_t ModelParams::parameter_count() {
  std::size_t n = 0;
  for (const auto& p : list()) n += p.tensor->numel();
  return n;
}

void ModelParams::set_requires_grad(bool on) {
  for (auto& p : list()) p.tensor->set_requires_grad(on);
}

ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  const auto c = cfg.channels;
  ModelParams p;
  p.init = make_conv(c, 4, 3, rng);
  for (std::size_t g = 0; g < cfg.groups; ++g) {
    GroupParams grp;
    for (std::size_t b = 0; b < cfg.blocks(); ++b) {
      RcabParams r;
      r.conv1 = make_conv(c, c, 3, rng);
      r.conv2 = make_conv(c, c, 3, rng);
      r.ca_down = make_conv(c / cfg.reduction, c, 1, rng);
      r.ca_up = make_conv(c, c / cfg.reduction, 1, rng);
      grp.blocks.push_back(std::move(r));
    }
    grp.selector_gn = Tensor(Shape{1, cfg.selector_height(), cfg.selector_width()}, 0.1);
    grp.selector_sp = Tensor(Shape{1, cfg.selector_height(), cfg.selector_width()}, 0.1);
    grp.ffd.reduce = make_conv(c, 2 * c + 2, 1, rng);
    grp.ffd.expand = make_conv(c, c, 1, rng);
    grp.fuse = make_conv(c, 2 * c, 3, rng);
    grp.restorer = make_conv(3, c, 1, rng);
    p.groups.push_back(std::move(grp));
  }
  p.final = make_conv(3, c, 3, rng);
  return p;
}

Var conv_layer(Tape& tape, const Var& x, ConvParams& p) {
  const auto k = p.weight.dim(2);
  return conv2d(x, tape.leaf(p.weight), tape.leaf(p.bias), (k - 1) / 2, BorderMode::reflect);
}

Var rcab_forward(Tape& tape, const Var& x, RcabParams& p) {
  const Var body = conv_layer(tape, relu(conv_layer(tape, x, p.conv1)), p.conv2);
  const Var pooled = global_avg_pool(body);
  const Var attention = sigmoid(conv_layer(tape, relu(conv_layer(tape, pooled, p.ca_down)), p.ca_up));
  return add(x, scale_channels(body, attention));
}

Selection select_frequencies(Tape& tape, const Var& features, Tensor& selector) {
  require(selector.rank() == 3 && selector.dim(0) == 1, "selector must be [1,h,w]");
  const Var up = bilinear_upsample(tape.leaf(selector), features.dim(1), features.dim(2));
  Selection s;
  s.mask = binarize_ste(up);
  s.value = complex_mul(fft2(features), s.mask);
  return s;
}

Var ffd_forward(Tape& tape, const CVar& feature_sel, const CVar& cfa_sel, FfdParams& p) {
  const double norm = 1.0 / static_cast<double>(feature_sel.dim(1) * feature_sel.dim(2));
  const Var stacked = scale(concat_channels({real(feature_sel), imag(feature_sel), real(cfa_sel), imag(cfa_sel)}), norm);
  return sigmoid(conv_layer(tape, relu(conv_layer(tape, stacked, p.reduce)), p.expand));
}

SfeOutput sfe_forward(Tape& tape, const Var& coarse, const Var& cfa_plane, GroupParams& p, std::size_t n1) {
  SfeOutput out;
  const Selection gn = select_frequencies(tape, coarse, p.selector_gn);
  Var generated = real(ifft2(gn.value));
  for (std::size_t b = n1; b < p.blocks.size(); ++b) generated = rcab_forward(tape, generated, p.blocks[b]);

  const Selection sp = select_frequencies(tape, coarse, p.selector_sp);
  const CVar cfa_sel = complex_mul(fft2(cfa_plane), sp.mask);
  out.suppressor = ffd_forward(tape, sp.value, cfa_sel, p.ffd);
  out.suppressed = real(ifft2(complex_mul(sp.value, out.suppressor)));
  out.generated = generated;
  out.mask_gn = gn.mask;
  out.mask_sp = sp.mask;
  return out;
}

Var rfeg_forward(Tape& tape, const Var& prev, const Var& cfa_plane, GroupParams& p, std::size_t n1) {
  Var coarse = prev;
  for (std::size_t b = 0; b < n1; ++b) coarse = rcab_forward(tape, coarse, p.blocks[b]);
  const SfeOutput sfe = sfe_forward(tape, coarse, cfa_plane, p, n1);
  return conv_layer(tape, concat_channels(sfe.generated, sfe.suppressed), p.fuse);
}

ForwardResult dfenet_forward(Tape& tape, const CfaImage& cfa, double sigma, ModelParams& params,
                             const ModelConfig& cfg) {
  require(cfa.height % 2 == 0 && cfa.width % 2 == 0, "input dimensions must be even");
  require(cfa.height % cfg.selector_scale == 0 && cfa.width % cfg.selector_scale == 0,
          "input " + std::to_string(cfa.height) + "x" + std::to_string(cfa.width) +
              " is not divisible by the selector scale " + std::to_string(cfg.selector_scale));
  require(params.groups.size() == cfg.groups, "parameter set does not match the model configuration");

  const Var input = concat_channels(constant(rearrange_input(cfa)), constant(make_noise_map(sigma, cfa.height, cfa.width)));
  const Var cfa_plane = constant(cfa.to_tensor());

  ForwardResult result;
  Var features = conv_layer(tape, input, params.init);
  for (auto& group : params.groups) {
    features = rfeg_forward(tape, features, cfa_plane, group, cfg.n1);
    result.intermediates.push_back(conv_layer(tape, features, group.restorer));
  }
  result.output = conv_layer(tape, features, params.final);
  return result;
}

Image demosaic_dfenet(const CfaImage& cfa, double sigma, const ModelParams& params, const ModelConfig& cfg) {
  ModelParams local = params;
  local.set_requires_grad(false);
  Tape tape;
  const auto result = dfenet_forward(tape, cfa, sigma, local, cfg);
  return Image::from_tensor(result.output.value()).clamped();
}

namespace {

constexpr std::uint32_t kCheckpointVersion = 1;

std::uint32_t crc_of(const std::string& bytes) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ostringstream body(std::ios::binary);
  body.write("DFEN", 4);
  write_u32(body, kCheckpointVersion);
  const auto& c = ckpt.config;
  for (std::size_t v : {c.channels, c.groups, c.n1, c.n2, c.selector_scale, c.reduction, c.train_height, c.train_width})
    write_u32(body, static_cast<std::uint32_t>(v));
  visit_params(ckpt.params, [&](const std::string&, const Tensor& t, ParamRole) { write_tensor(body, t); });
  const std::string bytes = body.str();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  write_u32(os, crc_of(bytes));
  if (!os) throw IoError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (bytes.size() < 8 + 4 * 8 + 4 || bytes.compare(0, 4, "DFEN") != 0)
    throw CorruptCheckpoint(path.string() + " is not a DFENet checkpoint");

  const std::string body = bytes.substr(0, bytes.size() - 4);
  std::istringstream tail(bytes.substr(bytes.size() - 4), std::ios::binary);
  if (read_u32(tail) != crc_of(body)) throw CorruptCheckpoint(path.string() + ": CRC mismatch");

  std::istringstream in(body, std::ios::binary);
  in.ignore(4);
  Checkpoint ckpt;
  try {
    const auto version = read_u32(in);
    if (version != kCheckpointVersion) throw CorruptCheckpoint("unsupported checkpoint version " + std::to_string(version));
    auto& c = ckpt.config;
    for (std::size_t* v : {&c.channels, &c.groups, &c.n1, &c.n2, &c.selector_scale, &c.reduction, &c.train_height,
                           &c.train_width})
      *v = read_u32(in);
    c.validate();
    ckpt.params = init_params(c, 0);
    visit_params(ckpt.params, [&](const std::string& name, Tensor& t, ParamRole) {
      Tensor loaded = read_tensor(in);
      if (loaded.shape() != t.shape())
        throw CorruptCheckpoint("parameter " + name + " has shape " + shape_string(loaded.shape()) + ", expected " +
                                shape_string(t.shape()));
      t = std::move(loaded);
    });
  } catch (const IoError& e) {
    throw CorruptCheckpoint(path.string() + ": " + e.what());
  } catch (const ContractViolation& e) {
    throw CorruptCheckpoint(path.string() + ": " + e.what());
  }
  if (in.peek() != std::char_traits<char>::eof()) throw CorruptCheckpoint(path.string() + ": trailing data");
  return ckpt;
}

}  // namespace freqmosaic
