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

#include "shuffle_audit/model.h"

#include <algorithm>
#include <cmath>

#include "gtest/gtest.h"
#include "shuffle_audit/error.h"
#include "shuffle_audit/random.h"

namespace shuffle_audit {
namespace {

FeatureSchema TwoFeatureSchema() {
  return FeatureSchema({{"a", FeatureRole::kScoring, {}},
                        {"b", FeatureRole::kScoring, {}},
                        {"g", FeatureRole::kProtected, {}},
                        {"y", FeatureRole::kLabel, {}}},
                       Direction::kHigherIsSuperior);
}

TEST(ScoringModelTest, EqualWeightsScoreIsMean) {
  Matrix rows(2, 3);
  rows << 0.2, 0.4, 1,
          1.0, 0.0, 0;
  const Dataset d(TwoFeatureSchema(), rows);
  const auto y = ScoreBatch(ScoringModel::EqualWeights({"a", "b"}), d);
  EXPECT_DOUBLE_EQ(y[0], 0.3);
  EXPECT_DOUBLE_EQ(y[1], 0.5);
}

TEST(ScoringModelTest, JsonFormsAgree) {
  const auto by_object = ScoringModel::FromJson(
      nlohmann::json::parse(R"({"kind":"linear","weights":{"a":2,"b":-1},"intercept":0.5})"));
  const auto by_array = ScoringModel::FromJson(nlohmann::json::parse(
      R"({"kind":"linear","features":["a","b"],"weights":[2,-1],"intercept":0.5})"));
  EXPECT_EQ(by_object.features, by_array.features);
  EXPECT_EQ(by_object.weights, by_array.weights);
  EXPECT_EQ(ScoringModel::FromJson(by_object.ToJson()).ToJson(), by_object.ToJson());
}

TEST(ScoringModelTest, RejectsProtectedFeature) {
  Matrix rows = Matrix::Zero(1, 3);
  const Dataset d(TwoFeatureSchema(), rows);
  EXPECT_THROW(ScoreBatch(ScoringModel::EqualWeights({"a", "g"}), d), SchemaError);
}

TEST(ScoringModelTest, MissingFeatureIsSchemaError) {
  const std::vector<std::string> cols = {"a", "b"};
  EXPECT_THROW(ResolveColumns(ScoringModel::EqualWeights({"zz"}), cols), SchemaError);
}

TEST(SplitRowsTest, PartitionIsDeterministic) {
  const auto s = SplitRows(101, 0.8, 9);
  EXPECT_EQ(s.train.size(), 81u);
  EXPECT_EQ(s.test.size(), 20u);
  std::vector<size_t> all = s.train;
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  for (size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
  EXPECT_EQ(SplitRows(101, 0.8, 9).test, s.test);
  EXPECT_NE(SplitRows(101, 0.8, 10).test, s.test);
}

TEST(FitLogisticTest, RecoversSeparatingDirection) {
  CounterStream rng(1);
  constexpr int kN = 400;
  Matrix rows(kN, 3);
  std::vector<int> labels(kN);
  for (int i = 0; i < kN; ++i) {
    const double a = rng.NextNormal(), b = rng.NextNormal();
    rows(i, 0) = a;
    rows(i, 1) = b;
    rows(i, 2) = rng.NextBernoulli(0.5);
    labels[i] = rng.NextBernoulli(Sigmoid(2.0 * a - 1.0 * b)) ? 1 : 0;
  }
  const Dataset d(TwoFeatureSchema(), rows, labels);
  const LogisticFit fit = FitLogistic(d, 0.8, {0.5, 2000, 3});
  ASSERT_EQ(fit.model.kind, ModelKind::kLogistic);
  EXPECT_EQ(fit.model.features, (std::vector<std::string>{"a", "b"}));
  EXPECT_GT(fit.model.weights[0], 1.2);
  EXPECT_LT(fit.model.weights[1], -0.5);
  EXPECT_EQ(fit.split.test, SplitRows(kN, 0.8, 3).test);

  // Gradient of the mean log-loss vanishes at the optimum.
  double g0 = 0, g1 = 0;
  for (size_t i : fit.split.train) {
    const double p = Sigmoid(fit.model.intercept + fit.model.weights[0] * rows(i, 0) +
                             fit.model.weights[1] * rows(i, 1));
    g0 += (p - labels[i]) * rows(i, 0);
    g1 += (p - labels[i]) * rows(i, 1);
  }
  EXPECT_NEAR(g0 / fit.split.train.size(), 0.0, 1e-3);
  EXPECT_NEAR(g1 / fit.split.train.size(), 0.0, 1e-3);
}

TEST(FitLogisticTest, SingleClassIsNumericError) {
  Matrix rows = Matrix::Zero(20, 3);
  const Dataset d(TwoFeatureSchema(), rows, std::vector<int>(20, 1));
  EXPECT_THROW(FitLogistic(d, 0.8), NumericError);
}

TEST(FitLogisticTest, MissingLabelsIsSchemaError) {
  Matrix rows = Matrix::Zero(20, 3);
  const Dataset d(TwoFeatureSchema(), rows);
  EXPECT_THROW(FitLogistic(d, 0.8), SchemaError);
}

TEST(ThresholdClassifyTest, TiesArePositive) {
  const std::vector<double> y = {0.9, 0.89, 0.95};
  EXPECT_EQ(ThresholdClassify(y, 0.9, Direction::kHigherIsSuperior),
            (std::vector<int>{1, 0, 1}));
  EXPECT_EQ(ThresholdClassify(y, 0.9, Direction::kLowerIsSuperior),
            (std::vector<int>{1, 1, 0}));
}

}  // namespace
}  // namespace shuffle_audit
