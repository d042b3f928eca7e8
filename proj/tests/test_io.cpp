#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "banet/config.hpp"
#include "banet/error.hpp"
#include "banet/image.hpp"
#include "banet/morphology.hpp"
#include "banet/synth.hpp"

using namespace banet;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("banet_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Pnm, RoundTrip) {
  const fs::path dir = scratch("pnm");
  Plane p(3, 5);
  for (std::size_t i = 0; i < p.size(); ++i) p.values[i] = double(i * 17 % 256) / 255.0;
  write_pgm(dir / "a.pgm", p);
  EXPECT_EQ(read_pgm(dir / "a.pgm"), p);
  RgbImage img(4, 2);
  for (std::size_t i = 0; i < img.values.size(); ++i) img.values[i] = double(i * 29 % 256) / 255.0;
  write_ppm(dir / "a.ppm", img);
  EXPECT_EQ(read_ppm(dir / "a.ppm"), img);
  EXPECT_EQ(slurp(dir / "a.pgm").substr(0, 3), "P5\n");
}

TEST(Pnm, Quantisation) {
  EXPECT_EQ(quantize_byte(0.5), 128);
  EXPECT_EQ(quantize_byte(-1.0), 0);
  EXPECT_EQ(quantize_byte(2.0), 255);
  const fs::path dir = scratch("quant");
  write_pgm(dir / "h.pgm", Plane(1, 1, 0.5));
  EXPECT_NEAR(read_pgm(dir / "h.pgm").values[0], 0.50196, 1e-5);
}

TEST(Pnm, CommentsAndMalformed) {
  const fs::path dir = scratch("bad");
  std::ofstream(dir / "c.pgm", std::ios::binary) << "P5\n# note\n2 1\n255\n" << char(0) << char(255);
  const Plane c = read_pgm(dir / "c.pgm");
  EXPECT_EQ(c.values, (std::vector<double>{0.0, 1.0}));
  std::ofstream(dir / "m.pgm", std::ios::binary) << "P2\n2 1\n255\n0 1";
  EXPECT_THROW(read_pgm(dir / "m.pgm"), FormatError);
  std::ofstream(dir / "d.pgm", std::ios::binary) << "P5\n2 1\n65535\n";
  EXPECT_THROW(read_pgm(dir / "d.pgm"), FormatError);
  std::ofstream(dir / "t.ppm", std::ios::binary) << "P6\n2 2\n255\nabc";
  EXPECT_THROW(read_ppm(dir / "t.ppm"), FormatError);
  EXPECT_THROW(read_pgm(dir / "none.pgm"), IoError);
}

TEST(Config, RoundTripAndErrors) {
  RunConfig cfg;
  cfg.set("train.base_lr", "0.03");
  cfg.set("model.mode", "ips+bls");
  cfg.set("model.channels", "4,8,12,16,20");
  cfg.set("train.flip", "false");
  const RunConfig back = RunConfig::parse("# comment\n" + cfg.to_text());
  EXPECT_EQ(back.to_text(), cfg.to_text());
  EXPECT_EQ(back.train.base_lr, 0.03);
  EXPECT_EQ(back.model.mode, FusionMode::kIpsBls);
  EXPECT_EQ(back.model.backbone.channels[4], 20u);
  EXPECT_FALSE(back.train.flip);
  EXPECT_THROW(RunConfig::parse("train.learning_rate=0.1\n"), FormatError);
  EXPECT_THROW(RunConfig::parse("train.base_lr=fast\n"), FormatError);
  EXPECT_THROW(RunConfig::parse("no equals sign\n"), FormatError);
  EXPECT_THROW(cfg.set("model.channels", "1,2,3"), FormatError);
  EXPECT_EQ(RunConfig{}.train.head_lr_multiplier, 10.0);
}

TEST(Config, SeedOverride) {
  RunConfig cfg;
  cfg.seed = 3;
  ::setenv("BANET_SEED", "99", 1);
  apply_env_overrides(cfg);
  ::unsetenv("BANET_SEED");
  EXPECT_EQ(cfg.seed, 99u);
  EXPECT_EQ(cfg.train_config().seed, 99u);
  apply_env_overrides(cfg);
  EXPECT_EQ(cfg.seed, 99u);
}

TEST(Synth, DeterministicAndBounded) {
  SynthSpec spec;
  spec.count = 6;
  spec.size = 32;
  spec.seed = 12;
  const auto a = generate_synth(spec), b = generate_synth(spec);
  ASSERT_EQ(a.size(), 6u);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].image, b[k].image);
    EXPECT_EQ(a[k].mask, b[k].mask);
    EXPECT_GE(a[k].foreground_fraction, kMinForeground);
    EXPECT_LE(a[k].foreground_fraction, kMaxForeground);
    EXPECT_EQ(a[k].boundary, make_boundary_gt(a[k].mask, 1));
    for (double v : a[k].image.values) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  spec.seed = 13;
  EXPECT_NE(generate_synth(spec)[0].image, a[0].image);
}

TEST(Synth, FullContrastRimMatchesBackground) {
  SynthSpec spec;
  spec.count = 3;
  spec.size = 32;
  spec.boundary_contrast = 1.0;
  for (const auto& s : generate_synth(spec)) {
    const Plane inner = erode(s.mask, kRimWidth);
    for (std::size_t y = 0; y < 32; ++y)
      for (std::size_t x = 0; x < 32; ++x) {
        if (s.mask.at(y, x) < 0.5 || inner.at(y, x) >= 0.5) continue;
        for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(s.image.at(c, y, x), s.background.at(c, y, x), 1e-12);
      }
  }
}

TEST(Synth, DatasetFilesAreByteIdentical) {
  SynthSpec spec;
  spec.count = 2;
  spec.size = 16;
  const fs::path a = scratch("synth_a"), b = scratch("synth_b");
  synth_dataset(spec, a);
  synth_dataset(spec, b);
  for (const char* f : {"images/0000.ppm", "masks/0001.pgm", "boundaries/0000.pgm", "manifest.txt"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  spec.size = 12;
  EXPECT_THROW(generate_synth(spec), UsageError);
}
