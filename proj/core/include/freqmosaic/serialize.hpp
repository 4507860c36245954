#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "freqmosaic/tensor.hpp"

namespace freqmosaic {

// Little-endian framing:
//   "FMT1" | rank u32 | dims u32 x rank | f64 payload (row-major)
//   "FMC1" | rank u32 | dims u32 x rank | f64 re payload | f64 im payload
void write_tensor(std::ostream& os, const Tensor& t);
void write_tensor(std::ostream& os, const ComplexTensor& t);
Tensor read_tensor(std::istream& is);
ComplexTensor read_complex_tensor(std::istream& is);

void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);

// Primitive little-endian helpers shared with the checkpoint format.
void write_u32(std::ostream& os, std::uint32_t v);
void write_f64(std::ostream& os, double v);
std::uint32_t read_u32(std::istream& is);
double read_f64(std::istream& is);

}  // namespace freqmosaic
