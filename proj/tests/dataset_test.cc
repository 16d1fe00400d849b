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

#include "shuffle_audit/dataset.h"

#include <filesystem>

#include "gtest/gtest.h"
#include "shuffle_audit/error.h"
#include "shuffle_audit/text_format.h"

namespace shuffle_audit {
namespace {

FeatureSchema AdmissionSchema() {
  return FeatureSchema({{"GRE", FeatureRole::kScoring, {}},
                        {"TOEFL", FeatureRole::kScoring, {}},
                        {"Research", FeatureRole::kProtected, {}},
                        {"Admit", FeatureRole::kLabel, {}}},
                       Direction::kHigherIsSuperior, "yes");
}

TEST(FeatureSchemaTest, RejectsInvalidSchemas) {
  EXPECT_THROW(FeatureSchema({{"R", FeatureRole::kProtected, {}}},
                             Direction::kHigherIsSuperior),
               SchemaError);
  EXPECT_THROW(FeatureSchema({{"A", FeatureRole::kScoring, {}},
                              {"A", FeatureRole::kProtected, {}}},
                             Direction::kHigherIsSuperior),
               SchemaError);
  EXPECT_THROW(FeatureSchema({{"A", FeatureRole::kScoring, {}},
                              {"y1", FeatureRole::kLabel, {}},
                              {"y2", FeatureRole::kLabel, {}}},
                             Direction::kHigherIsSuperior),
               SchemaError);
}

TEST(FeatureSchemaTest, JsonRoundTrip) {
  const FeatureSchema s = AdmissionSchema();
  const FeatureSchema t = FeatureSchema::FromJson(s.ToJson());
  EXPECT_EQ(t.ToJson(), s.ToJson());
  EXPECT_EQ(t.ColumnNames(), (std::vector<std::string>{"GRE", "TOEFL", "Research"}));
  EXPECT_EQ(t.LabelName(), "Admit");
  EXPECT_EQ(t.privileged_value(), "yes");
}

TEST(ParseCsvTest, CodesProtectedColumnAndParsesLabels) {
  const Dataset d = ParseCsv(
      "GRE,TOEFL,Research,Admit\n"
      "320,110,yes,1\n"
      "300,100,no,0\n"
      "310,105,unknown,yes\n"
      "315,107,no,no\n",
      AdmissionSchema());
  ASSERT_EQ(d.num_rows(), 4u);
  EXPECT_EQ(d.column_names(), (std::vector<std::string>{"GRE", "TOEFL", "Research"}));
  EXPECT_EQ(d.Column(2), (std::vector<double>{1, 0, 2, 0}));
  EXPECT_EQ(d.labels(), (std::vector<int>{1, 0, 1, 0}));
  EXPECT_DOUBLE_EQ(d.rows()(1, 0), 300.0);
}

TEST(ParseCsvTest, QuotedFieldsAndExtraColumns) {
  const auto records = ParseCsvRecords("a,\"b,c\",\"d\"\"e\"\r\n1,2,3\n");
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0], (std::vector<std::string>{"a", "b,c", "d\"e"}));
  const Dataset d = ParseCsv("Note,GRE,TOEFL,Research,Admit\n\"x, y\",1,2,yes,1\n",
                             AdmissionSchema());
  EXPECT_DOUBLE_EQ(d.rows()(0, 1), 2.0);
}

TEST(ParseCsvTest, MissingColumnNamesIt) {
  try {
    ParseCsv("GRE,Research,Admit\n1,yes,1\n", AdmissionSchema());
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("TOEFL"), std::string::npos);
  }
}

TEST(ParseCsvTest, NonNumericScoringCellReportsRow) {
  try {
    ParseCsv("GRE,TOEFL,Research,Admit\n1,2,yes,1\n3,abc,no,0\n", AdmissionSchema());
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 1);
  }
}

TEST(PrivilegedMaskTest, IntersectionOfColumns) {
  Matrix rows(4, 2);
  rows << 1, 1,
          1, 0,
          0, 1,
          2, 1;
  const std::vector<size_t> both = {0, 1};
  EXPECT_EQ(PrivilegedMask(rows, both), (std::vector<uint8_t>{1, 0, 0, 0}));
  const std::vector<size_t> first = {0};
  EXPECT_EQ(PrivilegedMask(rows, first), (std::vector<uint8_t>{1, 1, 0, 0}));
}

TEST(MinMaxNormalizeTest, ScalesScoringColumnsOnly) {
  Matrix rows(3, 3);
  rows << 300, 5, 1,
          320, 5, 0,
          310, 5, 1;
  const Dataset d(AdmissionSchema(), rows, std::vector<int>{1, 0, 1});
  const Dataset n = MinMaxNormalize(d);
  EXPECT_EQ(n.Column(0), (std::vector<double>{0.0, 1.0, 0.5}));
  EXPECT_EQ(n.Column(1), (std::vector<double>{0.0, 0.0, 0.0}));
  EXPECT_EQ(n.Column(2), d.Column(2));
}

TEST(DatasetTest, SubsetAndWriteRoundTrip) {
  Matrix rows(3, 3);
  rows << 300, 100, 1,
          320, 110, 0,
          310, 105, 1;
  const Dataset d(AdmissionSchema(), rows, std::vector<int>{1, 0, 1});
  const std::vector<size_t> pick = {2, 0};
  const Dataset s = d.Subset(pick);
  EXPECT_EQ(s.Column(0), (std::vector<double>{310, 300}));
  EXPECT_EQ(s.labels(), (std::vector<int>{1, 1}));

  const auto path = std::filesystem::temp_directory_path() / "sa_dataset_test.csv";
  WriteCsv(d, path);
  // Codes are written numerically, so read back with the numeric code.
  const FeatureSchema numeric({{"GRE", FeatureRole::kScoring, {}},
                               {"TOEFL", FeatureRole::kScoring, {}},
                               {"Research", FeatureRole::kProtected, {}},
                               {"Admit", FeatureRole::kLabel, {}}},
                              Direction::kHigherIsSuperior, "1");
  const Dataset back = LoadCsv(path, numeric);
  EXPECT_EQ(back.rows(), d.rows());
  EXPECT_EQ(back.labels(), d.labels());
  std::filesystem::remove(path);
}

TEST(DatasetTest, RejectsNonFiniteValues) {
  Matrix rows(1, 3);
  rows << 1, std::nan(""), 1;
  EXPECT_THROW(Dataset(AdmissionSchema(), rows), NumericError);
}

TEST(DatasetTest, UnknownColumnThrowsSchemaError) {
  Matrix rows = Matrix::Zero(1, 3);
  const Dataset d(AdmissionSchema(), rows);
  EXPECT_THROW(d.ColumnIndex("Nope"), SchemaError);
}

}  // namespace
}  // namespace shuffle_audit
