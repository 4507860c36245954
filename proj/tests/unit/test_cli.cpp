#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "cli.hpp"
#include "freqmosaic/bayer.hpp"
#include "freqmosaic/image_io.hpp"
#include "freqmosaic/linegen.hpp"
#include "freqmosaic/model.hpp"

using namespace freqmosaic;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) : path(fs::temp_directory_path() / ("freqmosaic_cli_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

ModelConfig tiny_model() {
  ModelConfig cfg;
  cfg.channels = 4;
  cfg.groups = 1;
  cfg.n1 = 1;
  cfg.n2 = 1;
  cfg.selector_scale = 4;
  cfg.reduction = 2;
  cfg.train_height = cfg.train_width = 16;
  return cfg;
}

}  // namespace

TEST_CASE("mosaic") {
  TempDir dir("mosaic");
  const auto img = gen_pattern(random_spec(PatternKind::trig, 3, 64));
  write_image(dir / "in.png", img);

  SUBCASE("noise-free output equals the library call byte for byte") {
    REQUIRE(run({"mosaic", dir / "in.png", dir / "cli.png"}).code == cli::ok);
    write_cfa(dir / "lib.png", mosaic(read_image(dir / "in.png"), BayerPattern::rggb));
    CHECK(slurp(dir / "cli.png") == slurp(dir / "lib.png"));
  }

  SUBCASE("noisy output is reproducible for a fixed seed") {
    for (const char* name : {"a.png", "b.png"})
      REQUIRE(run({"mosaic", dir / "in.png", dir / name, "--sigma", "10", "--seed", "42"}).code == cli::ok);
    CHECK(slurp(dir / "a.png") == slurp(dir / "b.png"));
    REQUIRE(run({"mosaic", dir / "in.png", dir / "c.png", "--sigma", "10", "--seed", "43"}).code == cli::ok);
    CHECK(slurp(dir / "a.png") != slurp(dir / "c.png"));
  }

  SUBCASE("pattern flag") {
    REQUIRE(run({"mosaic", dir / "in.png", dir / "g.png", "--pattern", "gbrg"}).code == cli::ok);
    const auto cfa = read_cfa(dir / "g.png", BayerPattern::gbrg);
    CHECK(cfa.plane == mosaic(read_image(dir / "in.png"), BayerPattern::gbrg).plane);
    CHECK(run({"mosaic", dir / "in.png", dir / "x.png", "--pattern", "rgbw"}).code == cli::usage);
  }

  SUBCASE("missing input is an I/O error") {
    const auto r = run({"mosaic", dir / "missing.png", dir / "out.png"});
    CHECK(r.code == cli::io_error);
    CHECK_FALSE(r.err.empty());
  }

  SUBCASE("odd dimensions are a contract violation") {
    write_image(dir / "odd.png", Image(33, 32, 0.5));
    CHECK(run({"mosaic", dir / "odd.png", dir / "out.png"}).code == cli::contract_violation);
  }
}

TEST_CASE("demosaic") {
  TempDir dir("demosaic");

  SUBCASE("bilinear keeps a constant gray image constant") {
    write_cfa(dir / "gray.png", CfaImage(32, 32, BayerPattern::rggb, 128.0 / 255.0));
    REQUIRE(run({"demosaic", dir / "gray.png", dir / "out.png"}).code == cli::ok);
    const auto out = read_image(dir / "out.png");
    for (double v : out.values) REQUIRE(v == 128.0 / 255.0);
  }

  const auto cfg = tiny_model();
  save_checkpoint(dir / "model.ckpt", Checkpoint{cfg, init_params(cfg, 5)});
  const auto img = gen_pattern(random_spec(PatternKind::contour, 6, 128));
  write_cfa(dir / "scene.png", mosaic(img, BayerPattern::rggb));

  SUBCASE("tiled inference with one 128 tile equals whole-image inference") {
    REQUIRE(run({"demosaic", dir / "scene.png", dir / "whole.png", "--method", "dfenet", "--ckpt",
                 dir / "model.ckpt"})
                .code == cli::ok);
    REQUIRE(run({"demosaic", dir / "scene.png", dir / "tiled.png", "--method", "dfenet", "--ckpt",
                 dir / "model.ckpt", "--tlc", "--patch", "128"})
                .code == cli::ok);
    CHECK(slurp(dir / "whole.png") == slurp(dir / "tiled.png"));
    const auto direct = demosaic_dfenet(read_cfa(dir / "scene.png", BayerPattern::rggb), 0.0,
                                        init_params(cfg, 5), cfg);
    const auto stored = read_image(dir / "whole.png");
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < direct.values.size(); ++i)
      mismatches += stored.values[i] != quantize(direct.values[i]) / 255.0;
    CHECK(mismatches == 0);
  }

  SUBCASE("a flipped byte in the checkpoint is reported as corruption") {
    auto bytes = slurp(dir / "model.ckpt");
    bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x10);
    write_text(dir / "bad.ckpt", bytes);
    const auto r = run({"demosaic", dir / "scene.png", dir / "o.png", "--method", "dfenet", "--ckpt",
                        dir / "bad.ckpt"});
    CHECK(r.code == cli::corrupt_checkpoint);
    CHECK(r.err.find("CRC") != std::string::npos);
  }

  SUBCASE("usage errors") {
    CHECK(run({"demosaic", dir / "scene.png", dir / "o.png", "--method", "dfenet"}).code == cli::usage);
    CHECK(run({"demosaic", dir / "scene.png", dir / "o.png", "--method", "magic"}).code == cli::usage);
    CHECK(run({"demosaic", dir / "scene.png", dir / "o.png", "--tlc"}).code == cli::usage);
    CHECK(run({"demosaic", dir / "scene.png", dir / "o.png", "--method", "dfenet", "--ckpt",
               dir / "model.ckpt", "--tlc", "--patch", "64", "--stride", "31"})
              .code == cli::contract_violation);
  }
}

TEST_CASE("eval prints the metrics CSV") {
  TempDir pred("eval_pred"), ref("eval_ref");
  for (int i = 0; i < 3; ++i) {
    const auto img = gen_pattern(random_spec(PatternKind::trig, 20 + i, 32));
    write_image(pred / ("p" + std::to_string(i) + ".png"), img);
    write_image(ref / ("p" + std::to_string(i) + ".png"), img);
  }
  const auto r = run({"eval", pred.path.string(), ref.path.string(), "--out", pred / "report.csv"});
  REQUIRE(r.code == cli::ok);
  CHECK(r.out ==
        "name,psnr_db,ssim\n"
        "p0.png,99.000000,1.00000000\n"
        "p1.png,99.000000,1.00000000\n"
        "p2.png,99.000000,1.00000000\n"
        "MEAN,99.000000,1.00000000\n");
  CHECK(slurp(pred / "report.csv") == r.out);
  CHECK(run({"eval", pred.path.string(), (ref.path / "nothing").string()}).code == cli::io_error);
}

TEST_CASE("gen-dataset is reproducible") {
  TempDir a("gen_a"), b("gen_b");
  REQUIRE(run({"gen-dataset", "5", "77", a.path.string(), "--size", "64"}).code == cli::ok);
  REQUIRE(run({"gen-dataset", "5", "77", b.path.string(), "--size", "64"}).code == cli::ok);
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(a.path)) names.push_back(e.path().filename().string());
  CHECK(names.size() == 6);
  for (const auto& n : names) CHECK(slurp(a.path / n) == slurp(b.path / n));
}

TEST_CASE("spectrum heatmaps") {
  TempDir dir("spectrum");
  const auto img = gen_pattern(random_spec(PatternKind::nested_polygon, 2, 64));
  write_image(dir / "a.png", img);
  write_image(dir / "b.png", bilinear_demosaic(mosaic(img)));
  REQUIRE(run({"spectrum", dir / "a.png", dir / "s.png"}).code == cli::ok);
  const auto heat = read_plane(dir / "s.png");
  const auto expected = spectrum(channel_plane(read_image(dir / "a.png"), 1));
  REQUIRE(heat.numel() == expected.numel());
  double worst = 0.0;
  for (std::size_t i = 0; i < heat.numel(); ++i) worst = std::max(worst, std::abs(heat[i] - expected[i]));
  CHECK(worst <= 0.5 / 255.0 + 1e-12);

  CHECK(run({"analyze-spectrum", dir / "b.png", dir / "r.png", "--ratio", dir / "a.png"}).code == cli::ok);
  CHECK(fs::exists(dir / "r.png"));
  CHECK(run({"spectrum", dir / "a.png", dir / "r.png", "--channel", "3"}).code == cli::usage);
}

TEST_CASE("config files and flag precedence") {
  TempDir dir("config");
  write_image(dir / "in.png", gen_pattern(random_spec(PatternKind::trig, 9, 32)));
  write_text(dir / "noisy.json", R"({"sigma": 10, "seed": 5})");
  REQUIRE(run({"mosaic", dir / "in.png", dir / "cfg.png", "--config", dir / "noisy.json"}).code == cli::ok);
  REQUIRE(run({"mosaic", dir / "in.png", dir / "flags.png", "--sigma", "10", "--seed", "5"}).code == cli::ok);
  CHECK(slurp(dir / "cfg.png") == slurp(dir / "flags.png"));

  REQUIRE(run({"mosaic", dir / "in.png", dir / "mixed.png", "--config", dir / "noisy.json", "--seed", "6"}).code ==
          cli::ok);
  REQUIRE(run({"mosaic", dir / "in.png", dir / "seed6.png", "--sigma", "10", "--seed", "6"}).code == cli::ok);
  CHECK(slurp(dir / "mixed.png") == slurp(dir / "seed6.png"));

  write_text(dir / "typo.json", R"({"sigmaa": 10})");
  CHECK(run({"mosaic", dir / "in.png", dir / "x.png", "--config", dir / "typo.json"}).code == cli::usage);
  write_text(dir / "broken.json", "{sigma: ");
  CHECK(run({"mosaic", dir / "in.png", dir / "x.png", "--config", dir / "broken.json"}).code == cli::usage);
  write_text(dir / "array.json", R"({"sigma": [1, 2]})");
  CHECK(run({"mosaic", dir / "in.png", dir / "x.png", "--config", dir / "array.json"}).code == cli::usage);

  SUBCASE("train takes a positional config and flags override it") {
    const auto data = dir.path / "data";
    fs::create_directories(data);
    for (int i = 0; i < 2; ++i)
      write_image(data / ("t" + std::to_string(i) + ".png"), gen_pattern(random_spec(PatternKind::trig, i, 32)));
    write_text(dir / "train.json", R"({"data": ")" + data.string() + R"(", "iterations": 2, "crop": 16,
      "channels": 4, "groups": 1, "n1": 1, "n2": 1, "selector-scale": 4, "reduction": 2, "augment": false})");
    const auto r = run({"train", dir / "train.json", "--channels", "8", "--out", dir / "m.ckpt"});
    REQUIRE(r.code == cli::ok);
    const auto ckpt = load_checkpoint(dir / "m.ckpt");
    CHECK(ckpt.config.channels == 8);
    CHECK(ckpt.config.groups == 1);
    CHECK(ckpt.config.train_height == 16);
  }
}

TEST_CASE("usage errors exit with 1") {
  CHECK(run({}).code == cli::usage);
  CHECK(run({"frobnicate"}).code == cli::usage);
  CHECK(run({"mosaic", "a.png"}).code == cli::usage);
  CHECK(run({"mosaic", "a.png", "b.png", "--sigmaa", "3"}).code == cli::usage);
  CHECK(run({"mosaic", "a.png", "b.png", "--sigma", "lots"}).code == cli::usage);
  CHECK(run({"train"}).code == cli::usage);
  const auto help = run({"--help"});
  CHECK(help.code == cli::ok);
  CHECK(help.out.find("gen-dataset") != std::string::npos);
}

TEST_CASE("gradcheck on a small network") {
  const auto r = run({"grad-check", "--channels", "4", "--groups", "1", "--n1", "1", "--n2", "1",
                      "--selector-scale", "4", "--reduction", "2", "--size", "16", "--fraction", "0.05"});
  CHECK(r.code == cli::ok);
  CHECK(r.out.find("max rel err") != std::string::npos);
  CHECK(r.out.find("PASS") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(run({"gradcheck", "--size", "30"}).code == cli::contract_violation);
}
