#include "freqmosaic/linegen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "freqmosaic/bayer.hpp"
#include "freqmosaic/error.hpp"
#include "freqmosaic/fft.hpp"
#include "freqmosaic/image_io.hpp"
#include "freqmosaic/parallel.hpp"

namespace freqmosaic {

using std::numbers::pi;

std::string kind_name(PatternKind k) {
  switch (k) {
    case PatternKind::contour: return "contour";
    case PatternKind::trig: return "trig";
    case PatternKind::nested_polygon: return "nested_polygon";
  }
  return "?";
}

PatternKind parse_kind(const std::string& name) {
  if (name == "contour") return PatternKind::contour;
  if (name == "trig") return PatternKind::trig;
  if (name == "nested_polygon") return PatternKind::nested_polygon;
  throw ContractViolation("unknown pattern kind '" + name + "'");
}

void PatternSpec::validate() const {
  require(size >= 32, "pattern size must be at least 32");
  for (const Rgb* c : {&line_color, &background})
    for (double v : *c) require(v >= 0.0 && v <= 1.0, "pattern colors must lie in [0,1]");
  require(kind != PatternKind::nested_polygon || sides >= 3, "polygons need at least 3 sides");
}

namespace {

struct Vec3 {
  double x, y, z;
};

class Canvas {
 public:
  Canvas(const PatternSpec& spec) : spec_(spec), img_(spec.size, spec.size) {
    for (std::size_t c = 0; c < 3; ++c)
      std::fill_n(img_.values.begin() + static_cast<std::ptrdiff_t>(c * spec.size * spec.size),
                  spec.size * spec.size, spec.background[c]);
    const double a = spec.euler[0], b = spec.euler[1], g = spec.euler[2];
    const double ca = std::cos(a), sa = std::sin(a), cb = std::cos(b), sb = std::sin(b), cg = std::cos(g),
                 sg = std::sin(g);
    // Rz(a) * Ry(b) * Rx(g); only the first two rows matter for the projection.
    r_[0] = {ca * cb, ca * sb * sg - sa * cg, ca * sb * cg + sa * sg};
    r_[1] = {sa * cb, sa * sb * sg + ca * cg, sa * sb * cg - ca * sg};
  }

  std::array<long, 2> project(const Vec3& p) const {
    const double x = r_[0][0] * p.x + r_[0][1] * p.y + r_[0][2] * p.z;
    const double y = r_[1][0] * p.x + r_[1][1] * p.y + r_[1][2] * p.z;
    const double half = (static_cast<double>(spec_.size) - 1.0) / 2.0;
    return {std::lround(half * (1.0 + x)), std::lround(half * (1.0 + y))};
  }

  void plot(long col, long row) {
    const auto n = static_cast<long>(spec_.size);
    if (col < 0 || row < 0 || col >= n || row >= n) return;
    for (std::size_t c = 0; c < 3; ++c) img_.at(static_cast<std::size_t>(row), static_cast<std::size_t>(col), c) = spec_.line_color[c];
  }

  void line(std::array<long, 2> a, std::array<long, 2> b) {
    long x0 = a[0], y0 = a[1];
    const long x1 = b[0], y1 = b[1];
    const long dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    const long sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    long err = dx + dy;
    while (true) {
      plot(x0, y0);
      if (x0 == x1 && y0 == y1) break;
      const long e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y0 += sy;
      }
    }
  }

  void polyline(const std::vector<Vec3>& pts, bool closed) {
    if (pts.empty()) return;
    auto prev = project(pts[0]);
    plot(prev[0], prev[1]);
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const auto cur = project(pts[i]);
      line(prev, cur);
      prev = cur;
    }
    if (closed) line(prev, project(pts[0]));
  }

  Image take() { return std::move(img_); }

 private:
  const PatternSpec& spec_;
  Image img_;
  std::array<std::array<double, 3>, 2> r_{};
};

struct HeightField {
  std::array<double, 4> amp, wu, wv, phase;

  explicit HeightField(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t k = 0; k < 4; ++k) {
      const double freq = 1.5 + 2.5 * unit(rng), dir = 2.0 * pi * unit(rng);
      amp[k] = 0.5 + 0.5 * unit(rng);
      wu[k] = freq * std::cos(dir);
      wv[k] = freq * std::sin(dir);
      phase[k] = 2.0 * pi * unit(rng);
    }
  }

  double operator()(double u, double v) const {
    double s = 0.0;
    for (std::size_t k = 0; k < 4; ++k) s += amp[k] * std::sin(wu[k] * u + wv[k] * v + phase[k]);
    return s;
  }
};

void draw_contours(const PatternSpec& spec, Canvas& canvas) {
  const HeightField f(spec.seed);
  const std::size_t g = 2 * spec.size;
  const double step = 2.0 / static_cast<double>(g);
  std::vector<double> grid((g + 1) * (g + 1));
  double lo = 1e300, hi = -1e300;
  for (std::size_t i = 0; i <= g; ++i)
    for (std::size_t j = 0; j <= g; ++j) {
      const double v = f(-1.0 + step * static_cast<double>(j), -1.0 + step * static_cast<double>(i));
      grid[i * (g + 1) + j] = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  constexpr double height = 0.3;
  auto point = [&](double u, double v, double level) { return Vec3{u, v, height * level}; };

  for (std::size_t l = 0; l < spec.density; ++l) {
    const double level = lo + (hi - lo) * (static_cast<double>(l) + 0.5) / static_cast<double>(spec.density);
    for (std::size_t i = 0; i < g; ++i)
      for (std::size_t j = 0; j < g; ++j) {
        const double u0 = -1.0 + step * static_cast<double>(j), v0 = -1.0 + step * static_cast<double>(i);
        // Corners: 0 (u0,v0), 1 (u0+h,v0), 2 (u0+h,v0+h), 3 (u0,v0+h).
        const double c[4] = {grid[i * (g + 1) + j], grid[i * (g + 1) + j + 1], grid[(i + 1) * (g + 1) + j + 1],
                             grid[(i + 1) * (g + 1) + j]};
        const double cu[4] = {u0, u0 + step, u0 + step, u0};
        const double cv[4] = {v0, v0, v0 + step, v0 + step};
        std::vector<Vec3> crossings;
        for (int e = 0; e < 4; ++e) {
          const int a = e, b = (e + 1) % 4;
          if ((c[a] > level) == (c[b] > level)) continue;
          const double t = (level - c[a]) / (c[b] - c[a]);
          crossings.push_back(point(cu[a] + t * (cu[b] - cu[a]), cv[a] + t * (cv[b] - cv[a]), level));
        }
        if (crossings.size() == 2) {
          canvas.polyline(crossings, false);
        } else if (crossings.size() == 4) {
          // Saddle: if the center sits on corner 0's side, corners 1 and 3
          // are cut off; otherwise corners 0 and 2 are.
          const double center = 0.25 * (c[0] + c[1] + c[2] + c[3]);
          if ((center > level) == (c[0] > level)) {
            canvas.polyline({crossings[0], crossings[1]}, false);
            canvas.polyline({crossings[2], crossings[3]}, false);
          } else {
            canvas.polyline({crossings[0], crossings[3]}, false);
            canvas.polyline({crossings[1], crossings[2]}, false);
          }
        }
      }
  }
}

void draw_trig(const PatternSpec& spec, Canvas& canvas) {
  const std::size_t samples = 4 * spec.size;
  const double base_phase = 2.0 * pi * static_cast<double>(spec.seed % 1000) / 1000.0;
  for (std::size_t j = 0; j < spec.density; ++j) {
    const double t = (static_cast<double>(j) + 0.5) / static_cast<double>(spec.density);
    const double phase = base_phase + pi * t;
    const double offset = -0.9 + 1.8 * t;
    std::vector<Vec3> pts;
    for (std::size_t k = 0; k <= samples; ++k) {
      const double u = -1.2 + 2.4 * static_cast<double>(k) / static_cast<double>(samples);
      pts.push_back({u, 0.35 * std::sin(spec.frequency * u + phase) + offset,
                     0.25 * std::cos(0.5 * spec.frequency * u + phase)});
    }
    canvas.polyline(pts, false);
  }
}

void draw_polygons(const PatternSpec& spec, Canvas& canvas) {
  for (std::size_t j = 0; j < spec.density; ++j) {
    const double radius = 0.95 * static_cast<double>(j + 1) / static_cast<double>(spec.density);
    const double start = pi / static_cast<double>(spec.sides) + static_cast<double>(j) * spec.twist;
    std::vector<Vec3> pts;
    for (std::size_t k = 0; k < spec.sides; ++k) {
      const double a = start + 2.0 * pi * static_cast<double>(k) / static_cast<double>(spec.sides);
      pts.push_back({radius * std::cos(a), radius * std::sin(a), 0.0});
    }
    canvas.polyline(pts, true);
  }
}

double luma(const Rgb& c) { return 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2]; }

}  // namespace

Image gen_pattern(const PatternSpec& spec) {
  spec.validate();
  Canvas canvas(spec);
  switch (spec.kind) {
    case PatternKind::contour: draw_contours(spec, canvas); break;
    case PatternKind::trig: draw_trig(spec, canvas); break;
    case PatternKind::nested_polygon: draw_polygons(spec, canvas); break;
  }
  return canvas.take();
}

PatternSpec random_spec(PatternKind kind, std::uint64_t seed, std::size_t size) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PatternSpec s;
  s.kind = kind;
  s.seed = seed;
  s.size = size;
  for (auto& v : s.background) v = unit(rng);
  for (int attempt = 0; attempt < 64; ++attempt) {
    for (auto& v : s.line_color) v = unit(rng);
    if (std::abs(luma(s.line_color) - luma(s.background)) >= 0.35) break;
  }
  if (std::abs(luma(s.line_color) - luma(s.background)) < 0.35)
    for (std::size_t c = 0; c < 3; ++c) s.line_color[c] = 1.0 - s.background[c] > 0.5 ? 1.0 : 0.0;

  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  std::size_t density = 0;
  switch (kind) {
    case PatternKind::contour: density = pick(8, 20); break;
    case PatternKind::trig: density = pick(12, 30); break;
    case PatternKind::nested_polygon: density = pick(10, 30); break;
  }
  s.density = std::max<std::size_t>(3, static_cast<std::size_t>(std::lround(double(density) * double(size) / 128.0)));
  s.euler = {2.0 * pi * unit(rng), -0.7 + 1.4 * unit(rng), -0.7 + 1.4 * unit(rng)};
  s.sides = pick(3, 8);
  s.twist = -0.06 + 0.12 * unit(rng);
  s.frequency = 4.0 + 8.0 * unit(rng);
  return s;
}

DatasetManifest plan_dataset(std::size_t n, std::uint64_t seed, std::size_t size) {
  require(n >= 1, "dataset needs at least one image");
  static constexpr PatternKind cycle[3] = {PatternKind::contour, PatternKind::trig, PatternKind::nested_polygon};
  DatasetManifest m;
  m.global_seed = seed;
  std::mt19937_64 rng(seed);
  const std::size_t width = std::max<std::size_t>(2, std::to_string(n - 1).size());
  for (std::size_t i = 0; i < n; ++i) {
    std::string index = std::to_string(i);
    index.insert(0, width - index.size(), '0');
    m.entries.push_back({"img_" + index + ".png", random_spec(cycle[i % 3], rng(), size)});
  }
  return m;
}

void render_dataset(const DatasetManifest& manifest, const std::filesystem::path& dir, std::size_t threads) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
  parallel_for(manifest.entries.size(), threads, [&](std::size_t i) {
    const auto& e = manifest.entries[i];
    write_image(dir / e.file, gen_pattern(e.spec));
  });
}

DatasetManifest gen_dataset(std::size_t n, std::uint64_t seed, const std::filesystem::path& dir, std::size_t size,
                            std::size_t threads) {
  auto m = plan_dataset(n, seed, size);
  render_dataset(m, dir, threads);
  write_manifest(dir / "manifest.json", m);
  return m;
}

std::string manifest_to_json(const DatasetManifest& m) {
  nlohmann::ordered_json j;
  j["version"] = m.version;
  j["global_seed"] = m.global_seed;
  j["images"] = nlohmann::ordered_json::array();
  for (const auto& e : m.entries) {
    const auto& s = e.spec;
    nlohmann::ordered_json item;
    item["file"] = e.file;
    item["kind"] = kind_name(s.kind);
    item["seed"] = s.seed;
    item["size"] = s.size;
    item["line_color"] = s.line_color;
    item["background"] = s.background;
    item["density"] = s.density;
    item["euler"] = s.euler;
    item["sides"] = s.sides;
    item["twist"] = s.twist;
    item["frequency"] = s.frequency;
    j["images"].push_back(std::move(item));
  }
  return j.dump(2) + "\n";
}

DatasetManifest manifest_from_json(const std::string& text) {
  DatasetManifest m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.version = j.at("version").get<std::uint32_t>();
    require(m.version == 1, "unsupported manifest version " + std::to_string(m.version));
    m.global_seed = j.at("global_seed").get<std::uint64_t>();
    for (const auto& item : j.at("images")) {
      ManifestEntry e;
      e.file = item.at("file").get<std::string>();
      require(std::filesystem::path(e.file).filename() == e.file, "manifest file names must not contain directories");
      auto& s = e.spec;
      s.kind = parse_kind(item.at("kind").get<std::string>());
      s.seed = item.at("seed").get<std::uint64_t>();
      s.size = item.at("size").get<std::size_t>();
      s.line_color = item.at("line_color").get<Rgb>();
      s.background = item.at("background").get<Rgb>();
      s.density = item.at("density").get<std::size_t>();
      s.euler = item.at("euler").get<Rgb>();
      s.sides = item.at("sides").get<std::size_t>();
      s.twist = item.at("twist").get<double>();
      s.frequency = item.at("frequency").get<double>();
      s.validate();
      m.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ContractViolation(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << manifest_to_json(m);
  if (!os) throw IoError("failed writing " + path.string());
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read manifest " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return manifest_from_json(ss.str());
}

Image gaussian_blur(const Image& img, double sigma) {
  require(sigma > 0.0, "blur sigma must be positive");
  const long radius = static_cast<long>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (long i = -radius; i <= radius; ++i) total += k[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * double(i * i) / (sigma * sigma));
  for (auto& v : k) v /= total;

  const long h = static_cast<long>(img.height), w = static_cast<long>(img.width);
  auto reflect = [](long i, long n) {
    while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
    return i;
  };
  Image tmp(img.height, img.width), out(img.height, img.width);
  for (std::size_t c = 0; c < 3; ++c) {
    for (long y = 0; y < h; ++y)
      for (long x = 0; x < w; ++x) {
        double s = 0.0;
        for (long d = -radius; d <= radius; ++d)
          s += k[static_cast<std::size_t>(d + radius)] * img.at(static_cast<std::size_t>(y), static_cast<std::size_t>(reflect(x + d, w)), c);
        tmp.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x), c) = s;
      }
    for (long y = 0; y < h; ++y)
      for (long x = 0; x < w; ++x) {
        double s = 0.0;
        for (long d = -radius; d <= radius; ++d)
          s += k[static_cast<std::size_t>(d + radius)] * tmp.at(static_cast<std::size_t>(reflect(y + d, h)), static_cast<std::size_t>(x), c);
        out.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x), c) = s;
      }
  }
  return out;
}

double moire_stress(const Image& reference, const Image& demosaicked) {
  require(reference.height == demosaicked.height && reference.width == demosaicked.width,
          "moire_stress: image sizes differ");
  const auto G = fft2(channel_plane(reference, 1));
  const auto D = fft2(channel_plane(demosaicked, 1));
  std::vector<double> g(G.numel()), d(G.numel());
  double peak = 0.0, total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = std::hypot(G.re()[i], G.im()[i]);
    d[i] = std::hypot(D.re()[i], D.im()[i]);
    peak = std::max(peak, g[i]);
    total += g[i] * g[i];
  }
  if (total == 0.0) return 0.0;
  // Spectral magnitude the reconstruction adds on top of the ground truth,
  // ignoring differences below 1e-6 of the ground-truth peak. In bins where
  // the ground truth is silent this is the full demosaicked energy.
  const double tol = 1e-6 * peak;
  double excess = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double e = d[i] - g[i] - tol;
    if (e > 0.0) excess += e * e;
  }
  return excess / total;
}

double moire_stress(const Image& img) { return moire_stress(img, bilinear_demosaic(mosaic(img))); }

}  // namespace freqmosaic
