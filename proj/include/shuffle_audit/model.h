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

// Batch scoring functions. A ScoringModel is indexed by scoring-feature name
// only, so protected columns have no weight slot and cannot influence its
// output.

#ifndef SHUFFLE_AUDIT_MODEL_H_
#define SHUFFLE_AUDIT_MODEL_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "shuffle_audit/dataset.h"

namespace shuffle_audit {

// Black-box batch scorer: one output per input row. Column layout is fixed
// when the scorer is bound. Must be safe to call concurrently.
using BatchScorer = std::function<std::vector<double>(const Matrix& rows)>;

enum class ModelKind { kLinear, kLogistic };

std::string_view ToString(ModelKind kind);
ModelKind ParseModelKind(std::string_view text);

struct ScoringModel {
  ModelKind kind = ModelKind::kLinear;
  std::vector<std::string> features;  // scoring features, one per weight
  std::vector<double> weights;
  double intercept = 0.0;

  // Equal weights 1/k over k features (keeps normalized scores in [0, 1]).
  static ScoringModel EqualWeights(std::vector<std::string> features);

  // {"kind": "linear", "weights": {"GRE": 0.33, ...}, "intercept": 0}
  // Weight order follows "features" when given, else the key order.
  static ScoringModel FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;

  // Score for a row already projected onto `features`.
  double ScoreProjected(std::span<const double> values) const;
};

// Resolves the model's features against a column layout; throws SchemaError
// when a feature is missing and InvalidArgument when weight and feature
// counts disagree.
std::vector<size_t> ResolveColumns(const ScoringModel& model,
                                   std::span<const std::string> column_names);

std::vector<double> ScoreRows(const ScoringModel& model,
                              std::span<const size_t> columns,
                              const Matrix& rows);

// y_i = intercept + sum_j w_j x_ij (linear) or its logistic sigmoid.
std::vector<double> ScoreBatch(const ScoringModel& model,
                               const Dataset& dataset);

BatchScorer MakeBatchScorer(const ScoringModel& model,
                            std::span<const std::string> column_names);

// Deterministic train/held-out split: a seeded permutation, the first
// round(fraction * n) indices train. Both parts keep permutation order.
struct TrainTestSplit {
  std::vector<size_t> train;
  std::vector<size_t> test;
};
TrainTestSplit SplitRows(size_t n, double train_fraction, uint64_t seed);

struct LogisticHyper {
  double learning_rate = 0.1;
  int epochs = 2000;
  uint64_t seed = 0;
};

struct LogisticFit {
  ScoringModel model;
  TrainTestSplit split;
};

// Full-batch gradient descent on mean log-loss over the scoring features of
// the train split. Throws NumericError on single-class training labels.
LogisticFit FitLogistic(const Dataset& dataset, double train_fraction,
                        const LogisticHyper& hyper = {});

// higher_is_superior: 1 iff y >= threshold; lower_is_superior: 1 iff y <=
// threshold. Ties classify positive.
std::vector<int> ThresholdClassify(std::span<const double> scores,
                                   double threshold, Direction direction);

double Sigmoid(double z);

}  // namespace shuffle_audit

#endif  // SHUFFLE_AUDIT_MODEL_H_
