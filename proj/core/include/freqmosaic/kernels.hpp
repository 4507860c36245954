#pragma once

#include <cstddef>
#include <span>

#include "freqmosaic/tensor.hpp"

namespace freqmosaic {

/// How conv2d fills samples outside the image. reflect mirrors without
/// repeating the edge sample (-1 -> 1, n -> n-2).
enum class BorderMode { zeros, reflect };

}  // namespace freqmosaic

// Raw convolution kernels behind the conv2d op. Exposed for benchmarks.
namespace freqmosaic::kernels {

// out must be [Cout,H,W]; it is overwritten.
void conv2d_forward(const Tensor& input, const Tensor& weight, const Tensor& bias,
                    std::size_t padding, BorderMode mode, Tensor& out);

// Accumulates d(loss)/d(input) into grad_input (length Cin*H*W).
void conv2d_backward_input(std::span<const double> grad_out, const Tensor& weight,
                           const Shape& input_shape, std::size_t padding, BorderMode mode,
                           std::span<double> grad_input);

// Accumulates d(loss)/d(weight) and d(loss)/d(bias).
void conv2d_backward_params(std::span<const double> grad_out, const Tensor& input,
                            const Shape& weight_shape, std::size_t padding, BorderMode mode,
                            std::span<double> grad_weight, std::span<double> grad_bias);

}  // namespace freqmosaic::kernels
