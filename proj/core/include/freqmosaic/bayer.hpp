#pragma once

#include <cstdint>

#include "freqmosaic/image.hpp"
#include "freqmosaic/tensor.hpp"

namespace freqmosaic {

/// Noise level on the 0-255 scale, applied as a standard deviation of
/// sigma/255 on [0,1] data.
struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Samples one color per pixel according to the 2x2 pattern. Even sizes only.
CfaImage mosaic(const Image& img, BayerPattern pattern = BayerPattern::rggb);

/// [3,H,W] tensor holding each CFA sample in the channel of its color and
/// zeros elsewhere.
Tensor rearrange_input(const CfaImage& cfa);

/// Adds i.i.d. N(0, (sigma/255)^2) noise, then clamps to [0,1].
CfaImage add_noise(const CfaImage& cfa, const NoiseSpec& spec);
Image add_noise(const Image& img, const NoiseSpec& spec);

/// Constant [1,H,W] map with value sigma/255.
Tensor make_noise_map(double sigma, std::size_t height, std::size_t width);

/// Classical bilinear demosaicking. A missing color is the mean of the
/// same-color samples among the 4 axial neighbours, or among the 4 diagonal
/// neighbours when no axial neighbour records it. Taps outside the image are
/// dropped from the mean.
Image bilinear_demosaic(const CfaImage& cfa);

/// Space-to-depth: [C,H,W] -> [C*r*r, H/r, W/r]; output channel c*r*r + dy*r + dx.
Tensor pixel_unshuffle(const Tensor& x, std::size_t r);
Tensor pixel_shuffle(const Tensor& x, std::size_t r);

/// Centered log-magnitude spectrum log(1+|FFT(x)|) of a [1,H,W] plane,
/// min-max normalized to [0,1] (all zeros for a flat spectrum).
Tensor spectrum(const Tensor& x);

/// Centered per-bin ratio |FFT(a)| / max(|FFT(b)|, 1e-8), clipped to [0,4].
Tensor spectrum_ratio_raw(const Tensor& a, const Tensor& b);
/// spectrum_ratio_raw scaled by 1/4 into [0,1] for display.
Tensor spectrum_ratio(const Tensor& a, const Tensor& b);

/// Single channel c of an image as a [1,H,W] tensor.
Tensor channel_plane(const Image& img, std::size_t c);

}  // namespace freqmosaic
