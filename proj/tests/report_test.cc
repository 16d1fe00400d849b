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

#include "shuffle_audit/report.h"

#include <filesystem>

#include "gtest/gtest.h"
#include "shuffle_audit/error.h"
#include "shuffle_audit/text_format.h"

namespace shuffle_audit {
namespace {

SweepResult TinySweep() {
  SweepResult r;
  r.rows = {{"swapping", 0.0, "kernel-mega_batch", "GRE", 0.25},
            {"swapping", 0.2, "kernel-mega_batch", "GRE", 0.1},
            {"mixing", 0.5, "kernel-mega_batch", "Research, \"x\"", 1.0 / 3.0}};
  return r;
}

TEST(SweepCsvTest, HeaderAndEscaping) {
  const std::string csv = SweepCsv(TinySweep());
  EXPECT_EQ(csv,
            "attack,param,explainer,feature,mean_abs_phi\n"
            "swapping,0,kernel-mega_batch,GRE,0.25\n"
            "swapping,0.2,kernel-mega_batch,GRE,0.1\n"
            "mixing,0.5,kernel-mega_batch,\"Research, \"\"x\"\"\",0.3333333333333333\n");
}

TEST(SweepJsonTest, StableDump) {
  EXPECT_EQ(DumpJson(SweepJson(TinySweep())), DumpJson(SweepJson(TinySweep())));
  EXPECT_EQ(SweepJson(TinySweep())["rows"].size(), 3u);
}

TEST(SweepSvgTest, OnePolylinePerFeaturePerPanel) {
  const std::string svg = SweepSvg(TinySweep());
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  size_t lines = 0;
  for (size_t p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++lines;
  EXPECT_EQ(lines, 2u);
}

TEST(SlopeSvgTest, OneLinePerInstanceColouredByGroup) {
  const std::vector<double> before = {0.9, 0.7, 0.5};
  const std::vector<double> after = {0.5, 0.9, 0.7};
  const std::vector<uint8_t> groups = {0, 1, 1};
  const std::string svg = SlopeSvg(before, after, groups, "dominance");
  size_t lines = 0;
  for (size_t p = svg.find("<line"); p != std::string::npos; p = svg.find("<line", p + 1)) ++lines;
  EXPECT_EQ(lines, 3u);
  EXPECT_NE(svg.find("#1f77b4"), std::string::npos);
  EXPECT_NE(svg.find("#d62728"), std::string::npos);
  EXPECT_THROW(SlopeSvg(before, after, std::vector<uint8_t>{1}, "x"), InvalidArgument);
}

TEST(RankCsvTest, Rows) {
  RankHistogram h;
  h.features = {"LoanRate", "Gender"};
  h.shares = {{1, 0, 0, 0}, {0, 1, 0, 0}};
  EXPECT_EQ(RankCsv({"none"}, {h}),
            "cell,feature,top1,top2,top3,top4_plus\n"
            "none,LoanRate,1,0,0,0\n"
            "none,Gender,0,1,0,0\n");
  EXPECT_THROW(RankCsv({"a", "b"}, {h}), InvalidArgument);
}

TEST(EmitSweepTest, WritesFilesAndRejectsEmptyOrUnwritable) {
  const auto dir = std::filesystem::temp_directory_path() / "sa_report_test";
  std::filesystem::remove_all(dir);
  EmitSweep(TinySweep(), ReportFormat::kCsv, dir / "sweep.csv");
  EXPECT_EQ(ReadTextFile(dir / "sweep.csv"), SweepCsv(TinySweep()));
  EXPECT_THROW(EmitSweep(SweepResult{}, ReportFormat::kCsv, dir / "x.csv"), InvalidArgument);
  EXPECT_THROW(EmitSweep(TinySweep(), ReportFormat::kCsv, "/proc/no/such/dir/sweep.csv"), IoError);
  EXPECT_EQ(ParseReportFormat("svg"), ReportFormat::kSvg);
  EXPECT_THROW(ParseReportFormat("png"), InvalidArgument);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace shuffle_audit
