#pragma once

#include "freqmosaic/tensor.hpp"

namespace freqmosaic {

// 2-D DFT over the last two axes of a [C,H,W] tensor, one transform per
// channel. Forward is unnormalized; the inverse divides by H*W.
ComplexTensor fft2(const Tensor& x);
ComplexTensor fft2(const ComplexTensor& x);
ComplexTensor ifft2(const ComplexTensor& x);

// Unnormalized inverse (conjugate-sign) transform; the adjoint of fft2.
ComplexTensor fft2_adjoint(const ComplexTensor& x);

// Moves the DC bin of every [H,W] plane to (H/2, W/2).
Tensor fftshift(const Tensor& x);

}  // namespace freqmosaic
