#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "advht/cli.hpp"
#include "test_support.hpp"

using namespace advht;
using advht::testing::data_path;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "advht");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("advht_cli_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST(Cli, Sha256KnownAnswer) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Cli, ReportRoundTrip) {
  RunReport r;
  r.command = "gamma";
  r.parameters = {{"tol", 1e-6}};
  r.file_hashes["x.json"] = sha256_hex("x");
  r.outputs = {{"value", 4.0}};
  r.version = "1.0";
  r.seed = 12;
  r.wall_time_ms = 5;
  r.exit_code = 0;
  EXPECT_EQ(run_report_from_json(to_json(r)), r);
  EXPECT_THROW(run_report_from_json(nlohmann::json::object()), ParseError);
}

TEST(Cli, GammaReport) {
  const auto r = run({"gamma", data_path("indicator.json")});
  ASSERT_EQ(r.code, exit_code::kOk) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["command"], "gamma");
  EXPECT_NEAR(doc["outputs"]["value"].get<double>(), 4.0, 1e-5);
  EXPECT_EQ(doc["inputs"]["files"].size(), 1u);
  EXPECT_EQ(doc["exit_code"], 0);
}

TEST(Cli, InputErrors) {
  EXPECT_EQ(run({"gamma", "/nonexistent.json"}).code, exit_code::kInput);
  EXPECT_EQ(run({"reproduce", "--example", "nosuch"}).code, exit_code::kInput);
  EXPECT_NE(run({"fsm", data_path("indicator.json")}).code, exit_code::kOk);
  EXPECT_NE(run({"no-such-command"}).code, exit_code::kOk);
}

TEST(Cli, ReproduceExamples) {
  for (const std::string ex : {"indicator", "weaklfd"}) {
    const auto dir = scratch("repro_" + ex);
    const auto r = run({"reproduce", "--example", ex, "--out", dir.string()});
    EXPECT_EQ(r.code, exit_code::kOk) << ex << "\n" << r.err;
    EXPECT_TRUE(std::filesystem::exists(dir / "summary.csv"));
  }
}

TEST(Cli, FsmDriftAndSimulate) {
  const auto dir = scratch("fsm");
  const auto fsm_path = (dir / "fsm.json").string();
  const auto inst = data_path("indicator.json");
  ASSERT_EQ(run({"fsm", inst, "--S", "5", "--delta", "0.001", "--eta", "0.01", "--out", fsm_path}).code, 0);
  EXPECT_EQ(run({"verify-drift", inst, "--fsm", fsm_path, "--claim", "all"}).code, exit_code::kOk);

  const auto json_path = (dir / "report.json").string();
  const auto sim = run({"simulate", inst, "--fsm", fsm_path, "--n", "20000", "--seed", "4", "--json", json_path});
  ASSERT_EQ(sim.code, exit_code::kOk) << sim.err;
  std::ifstream in(json_path);
  const auto saved = nlohmann::json::parse(in);
  EXPECT_EQ(saved["seed"], 4);
  EXPECT_EQ(saved["outputs"], nlohmann::json::parse(sim.out)["outputs"]);

  const auto mdp = run({"mdp-worst", inst, "--fsm", fsm_path});
  EXPECT_EQ(mdp.code, exit_code::kOk) << mdp.err;
}

TEST(Cli, DriftFailureIsPropertyError) {
  const auto dir = scratch("drift_fail");
  const auto fsm_path = (dir / "fsm.json").string();
  const auto inst = data_path("indicator.json");
  ASSERT_EQ(run({"fsm", inst, "--S", "4", "--delta", "0.001", "--eta", "0.01", "--out", fsm_path}).code, 0);
  EXPECT_EQ(run({"verify-drift", inst, "--fsm", fsm_path, "--slack", "-1"}).code, exit_code::kProperty);
}

TEST(Cli, BoundsFromSolved) {
  const auto r = run({"bounds", "--S", "4", "--from-solved", data_path("indicator.json")});
  ASSERT_EQ(r.code, exit_code::kOk) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_NEAR(doc["outputs"]["lower"].get<double>(), 1.0 / 9.0, 1e-6);
  const auto direct = run({"bounds", "--S", "3", "--gamma", "9", "--C", "9"});
  ASSERT_EQ(direct.code, 0);
  EXPECT_DOUBLE_EQ(nlohmann::json::parse(direct.out)["outputs"]["upper"].get<double>(), 0.1);
}

TEST(Cli, LfdUsesBundledPair) {
  const auto r = run({"lfd", data_path("weaklfd.json")});
  ASSERT_EQ(r.code, exit_code::kOk) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_TRUE(doc["outputs"]["is_weak"].get<bool>());
  EXPECT_FALSE(doc["outputs"]["is_strong"].get<bool>());
}

TEST(Cli, MinimaxRandom) {
  const auto dir = scratch("archive");
  const auto r = run({"minimax-check", "--random", "5", "--letters", "3", "--seed", "8", "--archive", dir.string()});
  EXPECT_EQ(r.code, exit_code::kOk) << r.err;
  EXPECT_TRUE(std::filesystem::is_empty(dir));
}
