/*
 * Copyright 2026 The shuffle-audit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "shuffle_audit/cli.h"

#include <filesystem>
#include <sstream>

#include "gtest/gtest.h"
#include "json.hpp"
#include "shuffle_audit/text_format.h"

namespace shuffle_audit {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sa_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    WriteTextFile(dir_ / "d.csv",
                  "GRE,TOEFL,Research\n320,110,0\n300,100,1\n310,105,1\n305,99,0\n");
    WriteTextFile(dir_ / "s.json", R"({"features":[
        {"name":"GRE","role":"scoring"},{"name":"TOEFL","role":"scoring"},
        {"name":"Research","role":"protected"}],"direction":"higher_is_superior"})");
  }
  void TearDown() override { fs::remove_all(dir_); }

  int Run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return RunCli(args, out_, err_);
  }
  std::string P(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, AttackHappyPath) {
  const std::string before = ReadTextFile(P("d.csv"));
  ASSERT_EQ(Run({"attack", "--input", P("d.csv"), "--schema", P("s.json"), "--attack",
                 "dominance", "--out", P("y.csv")}),
            kExitOk)
      << err_.str();
  EXPECT_EQ(ReadTextFile(P("y.csv")),
            "id,f,f_adv\n0,215,202\n1,200,207.5\n2,207.5,215\n3,202,200\n");
  EXPECT_TRUE(fs::exists(dir_ / "manifest.json"));
  EXPECT_EQ(ReadTextFile(P("d.csv")), before);
  const auto manifest = nlohmann::json::parse(ReadTextFile(P("manifest.json")));
  EXPECT_EQ(manifest["command"], "attack");
  EXPECT_EQ(manifest["seed"], 0);
}

TEST_F(CliTest, AttackScoresAreAPermutation) {
  ASSERT_EQ(Run({"attack", "--input", P("d.csv"), "--schema", P("s.json"), "--normalize",
                 "--attack", "mixing", "--param", "0.7", "--seed", "5", "--out", P("y.csv")}),
            kExitOk)
      << err_.str();
  const std::string csv = ReadTextFile(P("y.csv"));
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "id,f,f_adv");
  std::vector<double> f, g;
  while (std::getline(in, line)) {
    const auto a = line.find(','), b = line.rfind(',');
    f.push_back(std::stod(line.substr(a + 1, b - a - 1)));
    g.push_back(std::stod(line.substr(b + 1)));
  }
  std::sort(f.begin(), f.end());
  std::sort(g.begin(), g.end());
  EXPECT_EQ(f, g);
}

TEST_F(CliTest, UnknownFlagIsUsageError) {
  EXPECT_EQ(Run({"attack", "--bogus"}), kExitUsage);
  EXPECT_NE(err_.str().find("Usage"), std::string::npos) << err_.str();
  EXPECT_EQ(Run({}), kExitUsage);
  EXPECT_EQ(Run({"--help"}), kExitOk);
}

TEST_F(CliTest, MissingColumnIsDataError) {
  WriteTextFile(dir_ / "bad.csv", "GRE,Research\n1,1\n");
  EXPECT_EQ(Run({"attack", "--input", P("bad.csv"), "--schema", P("s.json"), "--out",
                 P("y.csv")}),
            kExitData);
  EXPECT_NE(err_.str().find("TOEFL"), std::string::npos);
}

TEST_F(CliTest, ExactOnTwentyFeaturesIsCapabilityFailure) {
  std::string header, row, features;
  for (int j = 0; j < 19; ++j) {
    header += "x" + std::to_string(j) + ",";
    row += std::to_string(j % 3) + ",";
    features += R"({"name":"x)" + std::to_string(j) + R"(","role":"scoring"},)";
  }
  WriteTextFile(dir_ / "wide.csv", header + "g\n" + row + "1\n" + row + "0\n");
  WriteTextFile(dir_ / "wide.json", R"({"features":[)" + features +
                                        R"({"name":"g","role":"protected"}]})");
  EXPECT_EQ(Run({"explain", "--input", P("wide.csv"), "--schema", P("wide.json"), "--method",
                 "exact", "--out", P("phi.csv")}),
            kExitNumeric);
  EXPECT_NE(err_.str().find("16"), std::string::npos) << err_.str();
}

TEST_F(CliTest, ExplainAndFairnessWriteOutputs) {
  ASSERT_EQ(Run({"explain", "--input", P("d.csv"), "--schema", P("s.json"), "--normalize",
                 "--method", "kernel", "--attack", "dominance", "--out", P("phi.csv")}),
            kExitOk)
      << err_.str();
  EXPECT_EQ(ReadTextFile(P("phi.csv")).substr(0, 30), "id,base,GRE,TOEFL,Research\n0,0");
  ASSERT_EQ(Run({"fairness", "--input", P("d.csv"), "--schema", P("s.json"), "--normalize",
                 "--threshold", "0.5", "--attack", "dominance", "--out", P("fair.json")}),
            kExitOk)
      << err_.str();
  const auto report = nlohmann::json::parse(ReadTextFile(P("fair.json")));
  EXPECT_EQ(report["group_feature"], "Research");
  EXPECT_TRUE(report["drops"]["spd"].is_number());
}

TEST_F(CliTest, AuditRerunIsByteIdentical) {
  const std::vector<std::string> base = {"audit", "--experiment", "credit-region", "--seed", "42",
                                         "--n", "200", "--sample-size", "20"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out-dir", P("run1")});
  b.insert(b.end(), {"--out-dir", P("run2")});
  ASSERT_EQ(Run(a), kExitOk) << err_.str();
  ASSERT_EQ(Run(b), kExitOk) << err_.str();
  size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dir_ / "run1")) {
    ++files;
    const auto other = dir_ / "run2" / entry.path().filename();
    ASSERT_TRUE(fs::exists(other));
    EXPECT_EQ(ReadTextFile(entry.path()), ReadTextFile(other)) << entry.path();
  }
  EXPECT_EQ(files, 3u);
}

TEST_F(CliTest, SweepFromSpecFile) {
  WriteTextFile(dir_ / "spec.json", R"({
    "data": {"synthetic": "admission", "n": 120},
    "grid": [{"kind": "none"}, {"kind": "dominance"}, {"kind": "mixing", "head_prob": 0.9}],
    "explainers": [{"method": "kernel"}],
    "sample_size": 10, "background_size": 10})");
  ASSERT_EQ(Run({"sweep", "--spec", P("spec.json"), "--out-dir", P("sw"), "--seed", "2"}),
            kExitOk)
      << err_.str();
  for (const char* f : {"sweep.csv", "sweep.json", "sweep.svg", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "sw" / f)) << f;
  }
  const auto manifest = nlohmann::json::parse(ReadTextFile(P("sw/manifest.json")));
  EXPECT_EQ(manifest["seed"], 2);
}

TEST_F(CliTest, ConfigFileSetsDefaultsAndFlagsOverride) {
  WriteTextFile(dir_ / "cfg.ini", "[attack]\nattack=dominance\nseed=9\n");
  ASSERT_EQ(Run({"--config", P("cfg.ini"), "attack", "--input", P("d.csv"), "--schema",
                 P("s.json"), "--out", P("y.csv"), "--seed", "3"}),
            kExitOk)
      << err_.str();
  const auto manifest = nlohmann::json::parse(ReadTextFile(P("manifest.json")));
  EXPECT_EQ(manifest["seed"], 3);
  EXPECT_NE(ReadTextFile(P("y.csv")), "");
}

}  // namespace
}  // namespace shuffle_audit
