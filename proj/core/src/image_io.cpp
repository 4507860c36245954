#include "freqmosaic/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

#include "freqmosaic/error.hpp"

namespace freqmosaic {
namespace {

struct Raster {
  std::size_t height = 0, width = 0, channels = 0;
  std::vector<std::uint8_t> bytes;  // interleaved
};

bool has_extension(const std::filesystem::path& p, std::initializer_list<const char*> exts) {
  auto e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  for (const char* x : exts)
    if (e == x) return true;
  return false;
}

Raster read_pnm(std::ifstream& is, const std::filesystem::path& path) {
  std::string magic;
  is >> magic;
  const std::size_t channels = magic == "P6" ? 3 : magic == "P5" ? 1 : 0;
  if (!channels) throw IoError(path.string() + ": unsupported PNM variant " + magic);
  auto next_int = [&]() {
    is >> std::ws;
    while (is.peek() == '#') {
      std::string comment;
      std::getline(is, comment);
      is >> std::ws;
    }
    long v = -1;
    is >> v;
    if (!is || v < 0) throw IoError(path.string() + ": malformed PNM header");
    return static_cast<std::size_t>(v);
  };
  Raster r;
  r.width = next_int();
  r.height = next_int();
  const auto maxval = next_int();
  if (maxval != 255) throw IoError(path.string() + ": only 8-bit PNM is supported");
  is.get();
  r.channels = channels;
  r.bytes.resize(r.height * r.width * channels);
  if (!is.read(reinterpret_cast<char*>(r.bytes.data()), static_cast<std::streamsize>(r.bytes.size())))
    throw IoError(path.string() + ": truncated PNM payload");
  return r;
}

Raster read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw IoError(path.string() + ": " + image.message);
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  Raster r;
  r.height = image.height;
  r.width = image.width;
  r.channels = color ? 3 : 1;
  r.bytes.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, r.bytes.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IoError(path.string() + ": " + image.message);
  }
  return r;
}

Raster read_raster(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  char head[2] = {0, 0};
  is.read(head, 2);
  if (head[0] == 'P' && (head[1] == '5' || head[1] == '6')) {
    is.seekg(0);
    return read_pnm(is, path);
  }
  is.close();
  return read_png(path);
}

void write_raster(const std::filesystem::path& path, const Raster& r) {
  if (has_extension(path, {".ppm", ".pgm", ".pnm"})) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << (r.channels == 3 ? "P6" : "P5") << '\n' << r.width << ' ' << r.height << "\n255\n";
    os.write(reinterpret_cast<const char*>(r.bytes.data()), static_cast<std::streamsize>(r.bytes.size()));
    if (!os) throw IoError("failed writing " + path.string());
    return;
  }
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(r.width);
  image.height = static_cast<png_uint_32>(r.height);
  image.format = r.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, r.bytes.data(), 0, nullptr))
    throw IoError(path.string() + ": " + image.message);
}

}  // namespace

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

Image read_image(const std::filesystem::path& path) {
  const Raster r = read_raster(path);
  Image img(r.height, r.width);
  for (std::size_t y = 0; y < r.height; ++y)
    for (std::size_t x = 0; x < r.width; ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        const auto src = (y * r.width + x) * r.channels + (r.channels == 3 ? c : 0);
        img.at(y, x, c) = r.bytes[src] / 255.0;
      }
  return img;
}

Tensor read_plane(const std::filesystem::path& path) {
  const Raster r = read_raster(path);
  Tensor plane(Shape{1, r.height, r.width});
  for (std::size_t i = 0; i < r.height * r.width; ++i) {
    const auto* px = &r.bytes[i * r.channels];
    if (r.channels == 3 && (px[0] != px[1] || px[1] != px[2]))
      throw ContractViolation(path.string() + ": expected a single-plane (grayscale) image");
    plane[i] = px[0] / 255.0;
  }
  return plane;
}

CfaImage read_cfa(const std::filesystem::path& path, BayerPattern pattern) {
  const Tensor plane = read_plane(path);
  require(plane.dim(1) % 2 == 0 && plane.dim(2) % 2 == 0, "CFA image dimensions must be even");
  CfaImage cfa(plane.dim(1), plane.dim(2), pattern);
  cfa.plane = plane.storage();
  return cfa;
}

void write_image(const std::filesystem::path& path, const Image& img) {
  Raster r{img.height, img.width, 3, std::vector<std::uint8_t>(img.height * img.width * 3)};
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x)
      for (std::size_t c = 0; c < 3; ++c) r.bytes[(y * img.width + x) * 3 + c] = quantize(img.at(y, x, c));
  write_raster(path, r);
}

void write_plane(const std::filesystem::path& path, const Tensor& plane) {
  require(plane.rank() == 3 && plane.dim(0) == 1, "write_plane expects [1,H,W]");
  Raster r{plane.dim(1), plane.dim(2), 1, std::vector<std::uint8_t>(plane.numel())};
  for (std::size_t i = 0; i < plane.numel(); ++i) r.bytes[i] = quantize(plane[i]);
  write_raster(path, r);
}

void write_cfa(const std::filesystem::path& path, const CfaImage& cfa) {
  write_plane(path, cfa.to_tensor());
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".ppm" || ext == ".pgm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace freqmosaic
