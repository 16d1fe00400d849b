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

#include <cmath>
#include <utility>

#include "shuffle_audit/error.h"
#include "shuffle_audit/random.h"

namespace shuffle_audit {

std::string_view ToString(ModelKind kind) {
  return kind == ModelKind::kLinear ? "linear" : "logistic";
}

ModelKind ParseModelKind(std::string_view text) {
  if (text == "linear") return ModelKind::kLinear;
  if (text == "logistic") return ModelKind::kLogistic;
  throw InvalidArgument("unknown model kind '" + std::string(text) + "'");
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

ScoringModel ScoringModel::EqualWeights(std::vector<std::string> features) {
  if (features.empty()) throw InvalidArgument("model needs at least 1 feature");
  ScoringModel m;
  m.kind = ModelKind::kLinear;
  m.weights.assign(features.size(), 1.0 / static_cast<double>(features.size()));
  m.features = std::move(features);
  return m;
}

ScoringModel ScoringModel::FromJson(const nlohmann::json& j) {
  ScoringModel m;
  m.kind = ParseModelKind(j.value("kind", std::string("linear")));
  m.intercept = j.value("intercept", 0.0);
  const auto& w = j.at("weights");
  if (w.is_object()) {
    if (j.contains("features")) {
      for (const auto& name : j.at("features")) {
        m.features.push_back(name.get<std::string>());
        m.weights.push_back(w.at(m.features.back()).get<double>());
      }
    } else {
      for (const auto& [name, value] : w.items()) {
        m.features.push_back(name);
        m.weights.push_back(value.get<double>());
      }
    }
  } else {
    m.features = j.at("features").get<std::vector<std::string>>();
    m.weights = w.get<std::vector<double>>();
  }
  if (m.features.size() != m.weights.size() || m.features.empty()) {
    throw InvalidArgument("model needs one weight per feature");
  }
  return m;
}

nlohmann::json ScoringModel::ToJson() const {
  return {{"kind", ToString(kind)},
          {"features", features},
          {"weights", weights},
          {"intercept", intercept}};
}

double ScoringModel::ScoreProjected(std::span<const double> values) const {
  double z = intercept;
  for (size_t j = 0; j < weights.size(); ++j) z += weights[j] * values[j];
  return kind == ModelKind::kLinear ? z : Sigmoid(z);
}

std::vector<size_t> ResolveColumns(const ScoringModel& model,
                                   std::span<const std::string> column_names) {
  if (model.features.size() != model.weights.size()) {
    throw InvalidArgument("model has " + std::to_string(model.weights.size()) +
                          " weights for " +
                          std::to_string(model.features.size()) + " features");
  }
  std::vector<size_t> columns;
  for (const auto& name : model.features) {
    size_t found = column_names.size();
    for (size_t c = 0; c < column_names.size(); ++c) {
      if (column_names[c] == name) found = c;
    }
    if (found == column_names.size()) {
      throw SchemaError("model feature '" + name + "' is not a dataset column");
    }
    columns.push_back(found);
  }
  return columns;
}

std::vector<double> ScoreRows(const ScoringModel& model,
                              std::span<const size_t> columns,
                              const Matrix& rows) {
  for (size_t c : columns) {
    if (c >= static_cast<size_t>(rows.cols())) {
      throw InvalidArgument("dimension mismatch: column " + std::to_string(c) +
                            " outside batch of width " +
                            std::to_string(rows.cols()));
    }
  }
  std::vector<double> out(static_cast<size_t>(rows.rows()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    double z = model.intercept;
    for (size_t j = 0; j < columns.size(); ++j) {
      z += model.weights[j] * rows(i, static_cast<Eigen::Index>(columns[j]));
    }
    out[static_cast<size_t>(i)] =
        model.kind == ModelKind::kLinear ? z : Sigmoid(z);
  }
  return out;
}

std::vector<double> ScoreBatch(const ScoringModel& model,
                               const Dataset& dataset) {
  const auto columns = ResolveColumns(model, dataset.column_names());
  for (size_t c : columns) {
    const auto* spec = dataset.schema().Find(dataset.column_names()[c]);
    if (spec->role != FeatureRole::kScoring) {
      throw SchemaError("model uses non-scoring column '" + spec->name + "'");
    }
  }
  return ScoreRows(model, columns, dataset.rows());
}

BatchScorer MakeBatchScorer(const ScoringModel& model,
                            std::span<const std::string> column_names) {
  auto columns = ResolveColumns(model, column_names);
  return [model, columns = std::move(columns)](const Matrix& rows) {
    return ScoreRows(model, columns, rows);
  };
}

TrainTestSplit SplitRows(size_t n, double train_fraction, uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgument("train_fraction must lie in (0, 1)");
  }
  CounterStream stream(DeriveSeed(seed, "train-test-split"));
  const auto perm = RandomPermutation(n, stream);
  const auto n_train = static_cast<size_t>(
      std::llround(train_fraction * static_cast<double>(n)));
  TrainTestSplit split;
  split.train.assign(perm.begin(), perm.begin() + static_cast<long>(n_train));
  split.test.assign(perm.begin() + static_cast<long>(n_train), perm.end());
  return split;
}

LogisticFit FitLogistic(const Dataset& dataset, double train_fraction,
                        const LogisticHyper& hyper) {
  if (!dataset.has_labels()) {
    throw SchemaError("logistic fit needs a label column");
  }
  LogisticFit fit;
  fit.split = SplitRows(dataset.num_rows(), train_fraction, hyper.seed);
  const auto& train = fit.split.train;
  if (train.empty()) throw InvalidArgument("empty training split");

  const auto& labels = dataset.labels();
  int positives = 0;
  for (size_t r : train) positives += labels[r];
  if (positives == 0 || positives == static_cast<int>(train.size())) {
    throw NumericError("training labels contain a single class");
  }

  const auto columns = dataset.ScoringColumns();
  const size_t k = columns.size();
  Eigen::MatrixXd x(train.size(), k);
  Eigen::VectorXd y(train.size());
  for (size_t i = 0; i < train.size(); ++i) {
    for (size_t j = 0; j < k; ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          dataset.rows()(static_cast<Eigen::Index>(train[i]),
                         static_cast<Eigen::Index>(columns[j]));
    }
    y(static_cast<Eigen::Index>(i)) = labels[train[i]];
  }

  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
  double b = 0.0;
  const double inv_n = 1.0 / static_cast<double>(train.size());
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    Eigen::VectorXd residual = ((x * w).array() + b)
                                   .unaryExpr([](double z) { return Sigmoid(z); })
                                   .matrix() -
                               y;
    w -= hyper.learning_rate * inv_n * (x.transpose() * residual);
    b -= hyper.learning_rate * inv_n * residual.sum();
  }
  if (!w.allFinite() || !std::isfinite(b)) {
    throw NumericError("logistic fit diverged");
  }

  fit.model.kind = ModelKind::kLogistic;
  fit.model.intercept = b;
  for (size_t j = 0; j < k; ++j) {
    fit.model.features.push_back(dataset.column_names()[columns[j]]);
    fit.model.weights.push_back(w(static_cast<Eigen::Index>(j)));
  }
  return fit;
}

std::vector<int> ThresholdClassify(std::span<const double> scores,
                                   double threshold, Direction direction) {
  std::vector<int> labels(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) {
    labels[i] = direction == Direction::kHigherIsSuperior
                    ? scores[i] >= threshold
                    : scores[i] <= threshold;
  }
  return labels;
}

}  // namespace shuffle_audit
