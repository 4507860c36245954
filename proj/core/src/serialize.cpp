#include "freqmosaic/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "freqmosaic/error.hpp"

namespace freqmosaic {
namespace {

constexpr char kRealMagic[4] = {'F', 'M', 'T', '1'};
constexpr char kComplexMagic[4] = {'F', 'M', 'C', '1'};

void write_header(std::ostream& os, const char (&magic)[4], const Shape& shape) {
  os.write(magic, 4);
  write_u32(os, static_cast<std::uint32_t>(shape.size()));
  for (auto d : shape) write_u32(os, static_cast<std::uint32_t>(d));
}

Shape read_header(std::istream& is, const char (&magic)[4]) {
  char got[4];
  if (!is.read(got, 4)) throw IoError("truncated tensor header");
  if (std::memcmp(got, magic, 4) != 0)
    throw IoError(std::string("bad tensor magic, expected ") + std::string(magic, 4));
  const auto rank = read_u32(is);
  if (rank > 16) throw IoError("implausible tensor rank " + std::to_string(rank));
  Shape shape(rank);
  for (auto& d : shape) d = read_u32(is);
  return shape;
}

void write_payload(std::ostream& os, std::span<const double> values) {
  for (double v : values) write_f64(os, v);
}

std::vector<double> read_payload(std::istream& is, std::size_t n) {
  std::vector<double> values(n);
  for (auto& v : values) v = read_f64(is);
  return values;
}

}  // namespace

void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void write_f64(std::ostream& os, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw IoError("unexpected end of stream");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

double read_f64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw IoError("unexpected end of stream");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

void write_tensor(std::ostream& os, const Tensor& t) {
  write_header(os, kRealMagic, t.shape());
  write_payload(os, t.data());
}

void write_tensor(std::ostream& os, const ComplexTensor& t) {
  write_header(os, kComplexMagic, t.shape());
  write_payload(os, t.re());
  write_payload(os, t.im());
}

Tensor read_tensor(std::istream& is) {
  Shape shape = read_header(is, kRealMagic);
  const auto n = shape_numel(shape);
  return Tensor(std::move(shape), read_payload(is, n));
}

ComplexTensor read_complex_tensor(std::istream& is) {
  Shape shape = read_header(is, kComplexMagic);
  const auto n = shape_numel(shape);
  auto re = read_payload(is, n);
  auto im = read_payload(is, n);
  return ComplexTensor(std::move(shape), std::move(re), std::move(im));
}

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_tensor(os, t);
  if (!os) throw IoError("failed writing " + path.string());
}

Tensor load_tensor(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return read_tensor(is);
}

}  // namespace freqmosaic
