#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "uavnet/cli.hpp"
#include "uavnet/eval.hpp"
#include "uavnet/kernels.hpp"
#include "uavnet/trainer.hpp"

using namespace uavnet;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("uavnet_cli_" + std::to_string(::getpid()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

std::string small_config(const TempDir& dir) {
  const auto path = dir / "small.json";
  std::ofstream(path) << R"({"n_tiers": 1, "n_rb": 10, "pool": {"gues_min": 1, "gues_max": 1},
    "radio": {"antennas": 2, "varsigma": 20}, "episodes": 1, "epo_inner": 2,
    "d3qn_batch": 8, "ddpg_batch": 8, "d3qn": {"hidden": [8]},
    "ddpg": {"actor_hidden": [8], "critic_hidden": [8]}})";
  return path;
}

}  // namespace

TEST(Cli, GenWorldDefaults) {
  TempDir dir;
  const auto r = run({"gen-world", "--out", dir / "world.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(std::ifstream(dir / "world.json"));
  EXPECT_EQ(j.at("buildings").size(), 927u);
  EXPECT_EQ(j.at("bs").size(), 37u);
}

TEST(Cli, GenPoolUsesWorldFile) {
  TempDir dir;
  const auto cfg = small_config(dir);
  ASSERT_EQ(run({"gen-world", "--config", cfg, "--out", dir / "w.json"}).code, 0);
  const auto r = run({"gen-pool", "--config", cfg, "--world", dir / "w.json", "--out", dir / "p.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto pool = nlohmann::json::parse(std::ifstream(dir / "p.json")).get<RbpPool>();
  EXPECT_EQ(pool.maps.size(), 22u);
  EXPECT_EQ(pool.maps[0].n_bs(), 7u);
  EXPECT_EQ(pool.maps[0].n_rb(), 10u);
}

TEST(Cli, TrainZeroEpisodesWritesEmptyLog) {
  TempDir dir;
  const auto r = run({"train", "--config", small_config(dir), "--episodes", "0", "--out-dir", dir / "run"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream log(dir / "run/train_log.csv");
  EXPECT_TRUE(TrainLog::read_csv(log).rows.empty());
  EXPECT_TRUE(fs::exists(dir / "run/checkpoint.json"));
}

TEST(Cli, TrainThenEvalAndSweep) {
  TempDir dir;
  const auto cfg = small_config(dir);
  ASSERT_EQ(run({"train", "--config", cfg, "--out-dir", dir / "run", "--seed", "3"}).code, 0);
  std::ifstream log(dir / "run/train_log.csv");
  EXPECT_EQ(TrainLog::read_csv(log).rows.size(), 1u);

  auto r = run({"eval", "--checkpoint", dir / "run/checkpoint.json", "--seeds", "2", "--out", dir / "eval.csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream ev(dir / "eval.csv");
  EXPECT_EQ(read_sweep_csv(ev).size(), 12u);

  r = run({"sweep", "--axis", "p_dbm", "--values", "-20", "--values", "20", "--checkpoint",
           dir / "run/checkpoint.json", "--policy", "proposed", "--policy", "rr-wo-bd", "--out", dir / "sw.csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream sw(dir / "sw.csv");
  const auto rows = read_sweep_csv(sw);
  EXPECT_EQ(rows.size(), 2u * 2u);

  r = run({"inspect", "--csv", dir / "sw.csv"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("sweep: 4 rows"), std::string::npos);
}

TEST(Cli, EvalMissingCheckpointNamesFile) {
  TempDir dir;
  const auto missing = dir / "nope.json";
  const auto r = run({"eval", "--checkpoint", missing, "--policy", "proposed"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(missing), std::string::npos);
  EXPECT_EQ(run({"eval", "--policy", "proposed"}).code, 2);
}

TEST(Cli, ConfigErrorsExitTwo) {
  TempDir dir;
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"gen-world"}).code, 2);
  EXPECT_EQ(run({"inspect", "--config", dir / "absent.json"}).code, 2);
  std::ofstream(dir / "bad.json") << R"({"radio": {"antennaz": 4}})";
  const auto r = run({"inspect", "--config", dir / "bad.json"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("antennaz"), std::string::npos);
  EXPECT_EQ(run({"sweep", "--axis", "bandwidth", "--out", dir / "x.csv"}).code, 2);
}

TEST(Cli, RuntimeErrorsExitOne) {
  TempDir dir;
  std::ofstream(dir / "file") << "x";
  const auto r = run({"gen-world", "--out", dir / "file/w.json"});
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, InspectReportsDerivedQuantities) {
  const auto r = run({"inspect", "--antennas", "4"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("B (BSs): 37"), std::string::npos);
  EXPECT_NE(r.out.find("buildings: 927"), std::string::npos);
  EXPECT_NE(r.out.find("22 slots"), std::string::npos);
  EXPECT_NE(r.out.find("M (antennas): 4"), std::string::npos);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, IsaSelection) {
  const auto saved = kernels::active().isa;
  EXPECT_EQ(run({"--isa", "scalar", "inspect"}).code, 0);
  EXPECT_EQ(kernels::active().isa, kernels::Isa::Scalar);
  EXPECT_EQ(run({"--isa", "sse", "inspect"}).code, 2);
  kernels::set_isa(saved);
}
