#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "freqmosaic/bayer.hpp"
#include "freqmosaic/image.hpp"
#include "freqmosaic/tape.hpp"

namespace freqmosaic {

struct ModelConfig {
  std::size_t channels = 16;
  std::size_t groups = 2;
  std::size_t n1 = 2;  // coarse RCABs per group
  std::size_t n2 = 2;  // refine RCABs per group
  std::size_t selector_scale = 8;
  std::size_t reduction = 4;
  // Crop size the selectors are defined against; selectors are
  // [1, train_height/s, train_width/s] and get resized to the actual input.
  std::size_t train_height = 128;
  std::size_t train_width = 128;

  std::size_t blocks() const { return n1 + n2; }
  std::size_t selector_height() const { return train_height / selector_scale; }
  std::size_t selector_width() const { return train_width / selector_scale; }
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct ConvParams {
  Tensor weight;  // [Cout, Cin, k, k]
  Tensor bias;    // [Cout]
  friend bool operator==(const ConvParams&, const ConvParams&) = default;
};

struct RcabParams {
  ConvParams conv1, conv2;
  ConvParams ca_down, ca_up;  // channel attention, C -> C/r -> C
  friend bool operator==(const RcabParams&, const RcabParams&) = default;
};

struct FfdParams {
  ConvParams reduce;  // (2C+2) -> C, 1x1
  ConvParams expand;  // C -> C, 1x1
  friend bool operator==(const FfdParams&, const FfdParams&) = default;
};

struct GroupParams {
  std::vector<RcabParams> blocks;  // n1 coarse followed by n2 refine
  Tensor selector_gn;
  Tensor selector_sp;
  FfdParams ffd;
  ConvParams fuse;      // 2C -> C, 3x3
  ConvParams restorer;  // C -> 3, 1x1
  friend bool operator==(const GroupParams&, const GroupParams&) = default;
};

enum class ParamRole { backbone, restorer };

struct ParamRef {
  std::string name;
  Tensor* tensor;
  ParamRole role;
};

struct ModelParams {
  ConvParams init;  // 4 -> C, 3x3
  std::vector<GroupParams> groups;
  ConvParams final;  // C -> 3, 3x3

  /// Every parameter tensor in canonical order (also the checkpoint order):
  /// init; then per group: blocks (conv1, conv2, ca_down, ca_up; weight
  /// before bias), selector_gn, selector_sp, ffd.reduce, ffd.expand, fuse,
  /// restorer; then final.
  std::vector<ParamRef> list();
  std::size_t parameter_count();
  void set_requires_grad(bool on);

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Fan-in scaled uniform weights U(-1/sqrt(fan_in), 1/sqrt(fan_in)), zero
/// biases, selectors at +0.1.
ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed);

// Graph pieces. Parameters are bound to the tape through Tape::leaf, so any
// tensor with requires_grad set receives its gradient after backward.

Var conv_layer(Tape& tape, const Var& x, ConvParams& p);
Var rcab_forward(Tape& tape, const Var& x, RcabParams& p);

struct Selection {
  Var mask;    // [1,H,W], entries in {0,1}
  CVar value;  // mask * fft2(features)
};

/// Resizes the low-resolution selector to the feature size, binarizes it and
/// applies it to the spectrum of every channel.
Selection select_frequencies(Tape& tape, const Var& features, Tensor& selector);

/// Per-channel suppressor in [0,1]. Spectra are scaled by 1/(HW) before
/// the first convolution, so a periodic input gives the same values at any size.
Var ffd_forward(Tape& tape, const CVar& feature_sel, const CVar& cfa_sel, FfdParams& p);

struct SfeOutput {
  Var generated;   // F_gn
  Var suppressed;  // F_sp
  Var mask_gn;
  Var mask_sp;
  Var suppressor;
};

SfeOutput sfe_forward(Tape& tape, const Var& coarse, const Var& cfa_plane, GroupParams& p, std::size_t n1);
Var rfeg_forward(Tape& tape, const Var& prev, const Var& cfa_plane, GroupParams& p, std::size_t n1);

struct ForwardResult {
  Var output;                      // [3,H,W], unclamped
  std::vector<Var> intermediates;  // restorer outputs, one per group
};

/// Input is the [3,H,W] rearranged CFA, the [1,H,W] noise map is appended
/// as a fourth channel.
ForwardResult dfenet_forward(Tape& tape, const CfaImage& cfa, double sigma, ModelParams& params,
                             const ModelConfig& cfg);

/// Inference wrapper: runs the graph without gradients and clamps to [0,1].
Image demosaic_dfenet(const CfaImage& cfa, double sigma, const ModelParams& params, const ModelConfig& cfg);

struct Checkpoint {
  ModelConfig config;
  ModelParams params;
};

// "DFEN" | version u32 | C M N1 N2 s r H_train W_train (u32) |
// parameters in FMT1 framing, canonical order | CRC32 of all preceding bytes.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace freqmosaic
