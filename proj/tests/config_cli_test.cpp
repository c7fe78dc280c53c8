// Copyright 2026 The mraug Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "mraug/cli.hpp"
#include "test_util.hpp"

namespace mraug {
namespace {

TEST(Config, DefaultsAreValid) {
  const RunConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.epoch_first, 50u);
  EXPECT_EQ(c.epoch_last, 50u);
  EXPECT_EQ(c.mode, Mode::kMRAugment);
}

TEST(Config, JsonRoundTrip) {
  RunConfig c;
  apply_json(c, json{{"p_max", 0.25}, {"seed", 7}, {"mode", "naive"}, {"schedule", "constant"},
                     {"tv_lambda", 0.02}, {"mask_policy", "per_volume"}});
  EXPECT_EQ(c.augment.p_max, 0.25);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.mode, Mode::kNaive);
  EXPECT_EQ(c.tv.lambda, 0.02);
  RunConfig d;
  apply_json(d, to_json(c));
  EXPECT_EQ(to_json(d), to_json(c));
}

TEST(Config, RejectsUnknownKeysAndWrongTypes) {
  RunConfig c;
  try {
    apply_json(c, json{{"p_maxx", 1}});
    FAIL() << "unknown key accepted";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("p_maxx"), std::string::npos);
  }
  EXPECT_THROW(apply_json(c, json{{"seed", -1}}), ConfigError);
  EXPECT_THROW(apply_json(c, json{{"p_max", "high"}}), ConfigError);
  EXPECT_THROW(apply_json(c, json{{"mode", "fancy"}}), ConfigError);
  EXPECT_THROW(apply_json(c, json::array()), ConfigError);
}

TEST(Config, ValidationCatchesBadValues) {
  RunConfig c;
  c.epoch_first = 3;
  c.epoch_last = 2;
  EXPECT_THROW(c.validate(), ConfigError);
  c = RunConfig{};
  c.augment.p_max = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = RunConfig{};
  c.workers = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, EnvironmentOverrides) {
  const std::map<std::string, std::string> env = {{"MRAUG_P_MAX", "0.3"}, {"MRAUG_SEED", "11"},
                                                  {"MRAUG_MODE", "object-level"}};
  RunConfig c;
  apply_env(c, [&](const char* name) -> const char* {
    const auto it = env.find(name);
    return it == env.end() ? nullptr : it->second.c_str();
  });
  EXPECT_EQ(c.augment.p_max, 0.3);
  EXPECT_EQ(c.seed, 11u);
  EXPECT_EQ(c.mode, Mode::kObjectLevel);
  RunConfig bad;
  EXPECT_THROW(apply_env(bad, [](const char* name) -> const char* {
                 return std::strcmp(name, "MRAUG_SEED") == 0 ? "x" : nullptr;
               }),
               ConfigError);
}

TEST(Config, SchemaListsEveryKey) {
  const std::string schema = config_schema();
  for (const auto& f : config_fields()) EXPECT_NE(schema.find(f.key), std::string::npos) << f.key;
}

TEST(Cli, ParsesEpochRanges) {
  EXPECT_EQ(cli::parse_epochs("3..9"), (std::pair<std::uint64_t, std::uint64_t>{3, 9}));
  EXPECT_EQ(cli::parse_epochs("4"), (std::pair<std::uint64_t, std::uint64_t>{4, 4}));
  EXPECT_THROW(cli::parse_epochs("a..2"), ConfigError);
  EXPECT_THROW(cli::parse_epochs("-1..2"), ConfigError);
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  std::ostringstream out, err;
  const int code = cli::run(std::move(args), out, err);
  if (out_text != nullptr) *out_text = out.str() + err.str();
  return code;
}

TEST(Cli, ExitCodes) {
  std::string text;
  EXPECT_EQ(run_cli({"--help-config"}, &text), 0);
  EXPECT_NE(text.find("p_max"), std::string::npos);
  EXPECT_EQ(run_cli({}), cli::kExitUsage);
  EXPECT_EQ(run_cli({"frobnicate"}), cli::kExitUsage);
  EXPECT_EQ(run_cli({"augment", "--bogus"}), cli::kExitUsage);
  EXPECT_EQ(run_cli({"augment", "--mode", "fancy"}), cli::kExitUsage);
  EXPECT_EQ(run_cli({"augment", "--epochs", "5..2"}), cli::kExitUsage);

  const fs::path dir = testing::scratch_dir("cli_codes");
  std::ofstream(dir / "bad.json") << R"({"p_maxx": 1})";
  EXPECT_EQ(run_cli({"augment", "--config", (dir / "bad.json").string()}, &text), cli::kExitUsage);
  EXPECT_NE(text.find("p_maxx"), std::string::npos);
  EXPECT_EQ(run_cli({"augment", "--config", (dir / "missing.json").string()}), cli::kExitUsage);

  // A missing dataset is a runtime error, not a usage error.
  std::ofstream(dir / "nodata.json") << json{{"dataset_dir", (dir / "none").string()},
                                             {"output_dir", (dir / "aug").string()}};
  EXPECT_EQ(run_cli({"augment", "--config", (dir / "nodata.json").string()}), cli::kExitError);
  fs::remove_all(dir);
}

class CliWorkflow : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = testing::scratch_dir("cli_flow");
    config_ = dir_ / "cfg.json";
    std::ofstream(config_) << json{{"height", 96},
                                   {"width", 96},
                                   {"crop_height", 96},
                                   {"crop_width", 96},
                                   {"coils", 4},
                                   {"volumes", 2},
                                   {"slices_per_volume", 2},
                                   {"sigma", 0.01},
                                   {"noise_stride", 1},
                                   {"tv_iters", 10},
                                   {"dataset_dir", (dir_ / "data").string()},
                                   {"recon_dir", (dir_ / "recon").string()},
                                   {"results_file", (dir_ / "results.tsv").string()}};
    ASSERT_EQ(run_cli({"simulate", "--config", config_.string()}), 0);
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static int verb(const std::string& name, const std::string& mode, const std::string& out_dir,
                  std::string* text = nullptr) {
    setenv("MRAUG_OUTPUT_DIR", (dir_ / out_dir).string().c_str(), 1);
    const int code = run_cli({name, "--config", config_.string(), "--mode", mode, "--seed", "5",
                              "--epochs", "49..50"},
                             text);
    unsetenv("MRAUG_OUTPUT_DIR");
    return code;
  }

  static inline fs::path dir_;
  static inline fs::path config_;
};

TEST_F(CliWorkflow, NoiseVerdictSeparatesModes) {
  std::string log;
  ASSERT_EQ(verb("augment", "mraugment", "aug_m", &log), 0) << log;
  ASSERT_EQ(verb("augment", "naive", "aug_n"), 0);
  std::string text;
  EXPECT_EQ(verb("validate-noise", "mraugment", "aug_m", &text), 0) << text;
  EXPECT_EQ(verb("validate-noise", "naive", "aug_n", &text), 3) << text;
  EXPECT_TRUE(fs::exists(dir_ / "aug_m" / kNoiseReportFile));
  const json report = json::parse(std::ifstream(dir_ / "aug_m" / kNoiseReportFile));
  EXPECT_TRUE(report.at("pass").get<bool>());
  EXPECT_EQ(report.at("replay_mismatches").get<int>(), 0);
}

TEST_F(CliWorkflow, ReconAndMetricsTable) {
  ASSERT_EQ(verb("recon", "mraugment", "aug_unused"), 0);
  std::string text;
  ASSERT_EQ(verb("metrics", "mraugment", "aug_unused", &text), 0);
  std::ifstream in(dir_ / "results.tsv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "volume\tslice\tepoch\tmethod\tssim\tpsnr\tnmse");
  std::size_t rows = 0, summary = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::vector<std::string> cols;
    for (std::string c; std::getline(ss, c, '\t');) cols.push_back(c);
    ASSERT_EQ(cols.size(), 7u) << line;
    if (cols[0] == "all") ++summary;
    else ++rows;
  }
  EXPECT_EQ(rows, 2u * 2u * 2u);  // slices x methods
  EXPECT_EQ(summary, 2u);
}

}  // namespace
}  // namespace mraug
