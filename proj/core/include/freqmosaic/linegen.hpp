#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "freqmosaic/image.hpp"

namespace freqmosaic {

enum class PatternKind { contour, trig, nested_polygon };

std::string kind_name(PatternKind k);
PatternKind parse_kind(const std::string& name);

using Rgb = std::array<double, 3>;

/// Everything needed to redraw one line-art image.
///
/// contour: level sets of a smooth random height field z = f(u, v) on
///   [-1,1]^2, lifted to 3D as (u, v, z). `density` levels, equally spaced
///   strictly inside the range of f.
/// trig: `density` curves v = 0.35 sin(freq*u + phase_j) + offset_j with
///   z = 0.25 cos(freq*u/2 + phase_j); phases and offsets sweep linearly.
/// nested_polygon: `density` concentric regular `sides`-gons in the z = 0
///   plane, circumradius 0.95 (j+1)/density, ring j rotated by
///   pi/sides + j*twist.
///
/// Points are rotated by R = Rz(euler[0]) Ry(euler[1]) Rx(euler[2]), projected
/// orthographically onto (x, y), and mapped to pixels by
/// p = (size-1)/2 * (1 + coord). Curves are drawn as 1-pixel Bresenham
/// polylines in `line_color` over `background`, without anti-aliasing.
struct PatternSpec {
  PatternKind kind = PatternKind::nested_polygon;
  std::uint64_t seed = 0;
  std::size_t size = 128;
  Rgb line_color{1.0, 1.0, 1.0};
  Rgb background{0.0, 0.0, 0.0};
  std::size_t density = 10;
  Rgb euler{0.0, 0.0, 0.0};
  std::size_t sides = 4;   // nested_polygon
  double twist = 0.0;      // nested_polygon, radians per ring
  double frequency = 6.0;  // trig

  void validate() const;
  friend bool operator==(const PatternSpec&, const PatternSpec&) = default;
};

Image gen_pattern(const PatternSpec& spec);

/// Seeded variation of colors, density, view angles and family parameters
/// for the given kind.
PatternSpec random_spec(PatternKind kind, std::uint64_t seed, std::size_t size = 128);

struct ManifestEntry {
  std::string file;
  PatternSpec spec;
};

struct DatasetManifest {
  std::uint32_t version = 1;
  std::uint64_t global_seed = 0;
  std::vector<ManifestEntry> entries;
};

/// Image i uses kind i mod 3 (contour, trig, nested_polygon) and a seed drawn
/// from the global seed. Writes img_XX.png files and manifest.json.
DatasetManifest gen_dataset(std::size_t n, std::uint64_t seed, const std::filesystem::path& dir,
                            std::size_t size = 128, std::size_t threads = 1);

/// Specs only, without touching the filesystem.
DatasetManifest plan_dataset(std::size_t n, std::uint64_t seed, std::size_t size = 128);

/// Redraws every image listed in the manifest into `dir`.
void render_dataset(const DatasetManifest& manifest, const std::filesystem::path& dir, std::size_t threads = 1);

std::string manifest_to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const std::string& text);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& m);
DatasetManifest read_manifest(const std::filesystem::path& path);

/// Separable Gaussian blur with reflected borders; radius ceil(3 sigma).
Image gaussian_blur(const Image& img, double sigma);

/// False-frequency score of classical demosaicking on `img`: mosaic (RGGB),
/// bilinear demosaic, then compare green-channel spectra D (demosaicked) and
/// G (ground truth). See the implementation notes in the README.
double moire_stress(const Image& img);
double moire_stress(const Image& reference, const Image& demosaicked);

}  // namespace freqmosaic
