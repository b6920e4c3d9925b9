#include <gtest/gtest.h>

#include <cstdlib>
#include <nlohmann/json.hpp>
#include <sys/wait.h>

#include "test_util.hpp"

namespace rad {
namespace {

using nlohmann::json;
using test::read_file;
using test::TempDir;

const json kSmall = {
    {"synth",
     {{"n_users", 40}, {"n_items", 30}, {"n_categories", 5}, {"days", 10}, {"rows_per_day", 50}}},
    {"split", {{"train_days", 3}, {"test_days", 2}}},
    {"train",
     {{"pretrain_epochs", 1},
      {"finetune_epochs", 1},
      {"kd_epochs", 1},
      {"batch_size", 32},
      {"embed_dim", 4},
      {"hidden", 8},
      {"k", 4}}},
    {"experiments", {{"seeds", {1}}, {"timing_ks", {1, 4}}, {"timing_rows", 40}}}};

// Runs the rad binary in `dir` and returns its exit status.
int rad(const TempDir& dir, const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " RAD_CLI_PATH " --workdir " + dir.path().string() + " " +
                          args + " >" + (dir / "stdout.txt").string() + " 2>" +
                          (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_config(const TempDir& dir, const json& j = kSmall) {
  test::write_file(dir / "config.json", j.dump());
}

TEST(Cli, SynthWritesBothFilesDeterministically) {
  TempDir dir("rad-cli");
  write_config(dir);
  ASSERT_EQ(rad(dir, "--config config.json synth --out a"), 0);
  ASSERT_EQ(rad(dir, "--config config.json synth --out b"), 0);
  EXPECT_EQ(read_file(dir / "a/synthetic.radd"), read_file(dir / "b/synthetic.radd"));
  const auto csv = read_file(dir / "a/synthetic.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 10 * 50);
}

TEST(Cli, NegativeDaysExitsTwoNamingField) {
  TempDir dir("rad-cli");
  auto j = kSmall;
  j["synth"]["days"] = -1;
  write_config(dir, j);
  EXPECT_EQ(rad(dir, "--config config.json synth"), 2);
  EXPECT_NE(read_file(dir / "stderr.txt").find("days"), std::string::npos);
}

TEST(Cli, UnknownConfigKeyExitsTwo) {
  TempDir dir("rad-cli");
  auto j = kSmall;
  j["train"]["epochs"] = 3;
  write_config(dir, j);
  EXPECT_EQ(rad(dir, "--config config.json run"), 2);
}

TEST(Cli, PhaseWithoutPrerequisiteExitsThree) {
  TempDir dir("rad-cli");
  write_config(dir);
  EXPECT_EQ(rad(dir, "--config config.json run --phase distill"), 3);
  EXPECT_EQ(rad(dir, "--config config.json run --phase finetune"), 3);
}

TEST(Cli, UnknownExperimentExitsTwoListingNames) {
  TempDir dir("rad-cli");
  write_config(dir);
  EXPECT_EQ(rad(dir, "--config config.json experiment nope"), 2);
  EXPECT_NE(read_file(dir / "stderr.txt").find("shift-curve"), std::string::npos);
}

TEST(Cli, UnknownPhaseExitsTwo) {
  TempDir dir("rad-cli");
  write_config(dir);
  EXPECT_EQ(rad(dir, "--config config.json run --phase sideways"), 2);
}

TEST(Cli, RunThenPhaseByPhaseAndEval) {
  TempDir dir("rad-cli");
  write_config(dir);
  ASSERT_EQ(rad(dir, "--config config.json run --freeze-relevance", "RAD_SEED=11"), 0);
  const auto out = read_file(dir / "stdout.txt");
  for (const char* name : {"original", "retrieval_framework", "distill_framework"}) {
    EXPECT_NE(out.find(name), std::string::npos) << name;
  }
  const auto manifest = json::parse(read_file(dir / "manifest.json"));
  EXPECT_TRUE(manifest["config"]["train"]["freeze_relevance"].get<bool>());
  EXPECT_EQ(manifest["config"]["train"]["seed"].get<int>(), 11);
  for (const auto& f : manifest["checkpoints"]) {
    EXPECT_TRUE(std::filesystem::exists(dir / f.get<std::string>())) << f;
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "report.tsv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "report.json"));

  // Flags win over the environment.
  ASSERT_EQ(rad(dir, "--config config.json --seed 12 run --phase original", "RAD_SEED=11"), 0);
  EXPECT_EQ(json::parse(read_file(dir / "manifest.json"))["config"]["train"]["seed"].get<int>(),
            12);

  ASSERT_EQ(rad(dir, "--config config.json synth --out data"), 0);
  ASSERT_EQ(rad(dir, "eval --checkpoint checkpoints/distill_framework.radw --data data/synthetic.csv"),
            0);
  EXPECT_NE(read_file(dir / "stdout.txt").find("distill_framework"), std::string::npos);
  EXPECT_EQ(rad(dir, "eval --checkpoint checkpoints/missing.radw --data data/synthetic.csv"), 3);
}

TEST(Cli, RepeatedRunsGiveIdenticalReports) {
  TempDir a("rad-cli"), b("rad-cli");
  write_config(a);
  write_config(b);
  ASSERT_EQ(rad(a, "--config config.json run"), 0);
  ASSERT_EQ(rad(b, "--config config.json run"), 0);
  EXPECT_EQ(read_file(a / "report.tsv"), read_file(b / "report.tsv"));
  EXPECT_EQ(read_file(a / "report.json"), read_file(b / "report.json"));
}

TEST(Cli, ExperimentsWriteReportsAndCsv) {
  TempDir dir("rad-cli");
  write_config(dir);
  ASSERT_EQ(rad(dir, "--config config.json experiment shift-curve"), 0);
  const auto csv = read_file(dir / "experiments/shift-curve.csv");
  EXPECT_EQ(csv.rfind("start_day", 0), 0u) << csv;
  ASSERT_EQ(rad(dir, "--config config.json experiment invariance"), 0);
  EXPECT_NE(read_file(dir / "experiments/invariance.tsv").find("#winner"), std::string::npos);
  ASSERT_EQ(rad(dir, "--config config.json experiment timing"), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "experiments/timing.json"));
}

}  // namespace
}  // namespace rad
