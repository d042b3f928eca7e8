#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = banet::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("banet_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(call({}).code, 2);
  EXPECT_EQ(call({"frobnicate"}).code, 2);
  EXPECT_EQ(call({"synth"}).code, 2);
  EXPECT_EQ(call({"probe-isd", "--n", "zero"}).code, 2);
  EXPECT_EQ(call({"--help"}).code, 0);
}

TEST(Cli, RuntimeErrorsExitOne) {
  const fs::path dir = scratch("err");
  const Result r = call({"eval", "--pred", (dir / "nope").string(), "--gt", (dir / "nope").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
  EXPECT_EQ(call({"infer", "--checkpoint", (dir / "x.ckpt").string(), "--data", dir.string(), "--out",
                  (dir / "o").string()})
                .code,
            1);
  EXPECT_EQ(call({"synth", "--out", (dir / "s").string(), "--size", "12"}).code, 1);
}

TEST(Cli, ProbeIsd) {
  const Result r = call({"probe-isd", "--n", "5"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("rates 1,2,4,8,16\n"), std::string::npos);
  EXPECT_NE(r.out.find("deepest-path reach 31\n"), std::string::npos);
  const Result flat = call({"probe-isd", "--n", "3", "--no-inter"});
  EXPECT_NE(flat.out.find("branch reach 1,2,4\n"), std::string::npos);
}

TEST(Cli, SynthTrainInferEval) {
  const fs::path dir = scratch("pipeline");
  const std::string data = (dir / "data").string();
  ASSERT_EQ(call({"synth", "--out", data, "--count", "2", "--size", "16", "--seed", "4"}).code, 0);
  const std::string ckpt = (dir / "m.ckpt").string();
  const Result t = call({"train", "--data", data, "--out", ckpt, "--iters", "3", "--set", "model.width_scale=0.015625",
                         "--set", "model.channels=4,4,4,4,4", "--set", "model.isd_mid_channels=2", "--set",
                         "model.isd_out_channels=3"});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_TRUE(fs::exists(ckpt + ".log"));
  const Result i = call({"infer", "--checkpoint", ckpt, "--data", data, "--out", (dir / "pred").string(), "--diagnostics"});
  ASSERT_EQ(i.code, 0) << i.err;
  EXPECT_TRUE(fs::exists(dir / "pred" / "0000.pgm"));
  EXPECT_TRUE(fs::exists(dir / "pred" / "diagnostics" / "0001_mb.pgm"));
  const Result e = call({"eval", "--pred", (dir / "pred").string(), "--gt", data + "/masks", "--out", (dir / "rep").string()});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_NE(e.out.find("images 2"), std::string::npos);
  EXPECT_EQ(call({"train", "--data", data, "--out", ckpt, "--set", "train.bogus=1"}).code, 1);
}
