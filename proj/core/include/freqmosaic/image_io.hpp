#pragma once

#include <filesystem>
#include <vector>

#include "freqmosaic/image.hpp"
#include "freqmosaic/tensor.hpp"

namespace freqmosaic {

// 8-bit PNG and binary PPM/PGM (P6/P5) I/O. Values quantize by round(v*255)
// after clamping to [0,1]. Readers detect the format from the file contents.

/// Reads an RGB image; grayscale files are replicated to three channels.
Image read_image(const std::filesystem::path& path);

/// Reads a single-plane image (a stored CFA). RGB files are accepted only
/// when all three channels agree.
Tensor read_plane(const std::filesystem::path& path);

CfaImage read_cfa(const std::filesystem::path& path, BayerPattern pattern);

// Files ending in .ppm/.pgm are written as binary PPM/PGM, everything else as PNG.
void write_image(const std::filesystem::path& path, const Image& img);
void write_plane(const std::filesystem::path& path, const Tensor& plane);
void write_cfa(const std::filesystem::path& path, const CfaImage& cfa);

std::uint8_t quantize(double v);

/// PNG/PPM/PGM files in a directory, sorted by name.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

}  // namespace freqmosaic
