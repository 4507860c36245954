#pragma once

#include <cstddef>
#include <vector>

#include "freqmosaic/kernels.hpp"
#include "freqmosaic/tape.hpp"

namespace freqmosaic {

// Differentiable operations. Each op records onto the tape of its tracked
// inputs; if no input is tracked the result is a plain constant. All shapes
// are [C,H,W] unless stated otherwise.

/// Cross-correlation plus bias, zero padded unless `mode` says otherwise.
/// weight is [Cout,Cin,k,k] with k odd and padding == (k-1)/2, so the
/// spatial size is preserved.
Var conv2d(const Var& input, const Var& weight, const Var& bias, std::size_t padding,
           BorderMode mode = BorderMode::zeros);

CVar fft2(const Var& x);
CVar fft2(const CVar& x);
CVar ifft2(const CVar& x);
Var real(const CVar& x);
Var imag(const CVar& x);
/// Elementwise modulus sqrt(re^2 + im^2).
Var cabs(const CVar& x);

Var relu(const Var& x);
Var sigmoid(const Var& x);
Var abs(const Var& x);
Var scale(const Var& x, double s);

// add/sub/mul accept equal shapes, or a [1,H,W] operand against [C,H,W].
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);

/// Multiplies re and im by a real mask ([1,H,W] or [C,H,W]).
CVar complex_mul(const CVar& x, const Var& mask);

Var concat_channels(const Var& a, const Var& b);
Var concat_channels(const std::vector<Var>& parts);

/// [C,H,W] -> [C,1,1] per-channel mean.
Var global_avg_pool(const Var& x);
/// x[C,H,W] scaled per channel by s[C,1,1].
Var scale_channels(const Var& x, const Var& s);

/// Bilinear resize of a [C,h,w] map to [C,H,W], half-pixel centers
/// (align_corners = false), source coordinates clamped to the valid range.
Var bilinear_upsample(const Var& x, std::size_t height, std::size_t width);

/// Forward: 1 where x > 0, else 0. Backward: identity where |x| <= 1,
/// zero outside (clipped straight-through estimator).
Var binarize_ste(const Var& x);

Var sum(const Var& x);
Var mean(const Var& x);
/// mean(|a - b|) over all elements.
Var l1_mean(const Var& a, const Var& b);

}  // namespace freqmosaic
