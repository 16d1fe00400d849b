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

#include "shuffle_audit/shapley.h"

#include <bit>
#include <cmath>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "shuffle_audit/error.h"
#include "shuffle_audit/parallel.h"
#include "shuffle_audit/random.h"
#include "shuffle_audit/text_format.h"

namespace shuffle_audit {
namespace {

// Upper bound on rows sent to the scorer in one mega-batch call.
constexpr size_t kMaxMegaBatchRows = size_t{1} << 24;
constexpr double kRidge = 1e-9;

double Mean(const std::vector<double>& v) {
  if (v.empty()) throw NumericError("scorer returned an empty batch");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<double> CallScorer(const BatchScorer& scorer, const Matrix& rows) {
  std::vector<double> out = scorer(rows);
  if (out.size() != static_cast<size_t>(rows.rows())) {
    throw NumericError("scorer returned " + std::to_string(out.size()) +
                       " outputs for " + std::to_string(rows.rows()) + " rows");
  }
  return out;
}

Matrix ImputeMask(std::span<const double> x, uint64_t mask,
                  const Matrix& background) {
  Matrix rows = background;
  for (size_t j = 0; j < x.size(); ++j) {
    if ((mask >> j) & 1u) rows.col(static_cast<Eigen::Index>(j)).setConstant(x[j]);
  }
  return rows;
}

// Means of consecutive blocks of `block` outputs.
std::vector<double> BlockMeans(const std::vector<double>& out, size_t block) {
  std::vector<double> means(out.size() / block);
  for (size_t m = 0; m < means.size(); ++m) {
    double s = 0.0;
    for (size_t k = 0; k < block; ++k) s += out[m * block + k];
    means[m] = s / static_cast<double>(block);
  }
  return means;
}

// v(mask) for every mask, batched per the config.
std::vector<double> CoalitionValues(const BatchScorer& scorer,
                                    std::span<const double> x,
                                    std::span<const uint64_t> masks,
                                    const Matrix& background,
                                    Batching batching) {
  const size_t b = static_cast<size_t>(background.rows());
  std::vector<double> values(masks.size());
  if (batching == Batching::kPerCoalition) {
    for (size_t m = 0; m < masks.size(); ++m) {
      values[m] = Mean(CallScorer(scorer, ImputeMask(x, masks[m], background)));
    }
    return values;
  }
  if (masks.size() * b > kMaxMegaBatchRows) {
    throw CapabilityError("mega batch of " + std::to_string(masks.size() * b) +
                          " rows exceeds the limit of " +
                          std::to_string(kMaxMegaBatchRows));
  }
  Matrix rows(static_cast<Eigen::Index>(masks.size() * b), background.cols());
  for (size_t m = 0; m < masks.size(); ++m) {
    rows.middleRows(static_cast<Eigen::Index>(m * b),
                    static_cast<Eigen::Index>(b)) =
        ImputeMask(x, masks[m], background);
  }
  return BlockMeans(CallScorer(scorer, rows), b);
}

double Factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

double Binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

}  // namespace

std::string_view ToString(Batching batching) {
  return batching == Batching::kPerCoalition ? "per_coalition" : "mega_batch";
}

Batching ParseBatching(std::string_view text) {
  if (text == "per_coalition" || text == "per-coalition") {
    return Batching::kPerCoalition;
  }
  if (text == "mega_batch" || text == "mega-batch") return Batching::kMegaBatch;
  throw InvalidArgument("unknown batching '" + std::string(text) + "'");
}

std::string_view ToString(ExplainerMethod method) {
  switch (method) {
    case ExplainerMethod::kExact:
      return "exact";
    case ExplainerMethod::kLinear:
      return "linear";
    case ExplainerMethod::kKernel:
      return "kernel";
  }
  return "kernel";
}

ExplainerMethod ParseExplainerMethod(std::string_view text) {
  if (text == "exact") return ExplainerMethod::kExact;
  if (text == "linear") return ExplainerMethod::kLinear;
  if (text == "kernel") return ExplainerMethod::kKernel;
  throw InvalidArgument("unknown explainer '" + std::string(text) + "'");
}

void ValueFunctionConfig::Validate() const {
  if (background.rows() < 1) throw InvalidArgument("background is empty");
  if (max_exact_features > kMaxExactFeatures) {
    throw InvalidArgument("max_exact_features cannot exceed " +
                          std::to_string(kMaxExactFeatures));
  }
}

int Coalition::size() const { return std::popcount(members_); }

Matrix ImputeRows(std::span<const double> x, Coalition coalition,
                  const Matrix& background) {
  if (static_cast<Eigen::Index>(x.size()) != background.cols()) {
    throw InvalidArgument("instance and background widths differ");
  }
  return ImputeMask(x, coalition.members(), background);
}

double CoalitionValue(const BatchScorer& scorer, std::span<const double> x,
                      Coalition coalition, const ValueFunctionConfig& cfg) {
  cfg.Validate();
  return Mean(CallScorer(scorer, ImputeRows(x, coalition, cfg.background)));
}

AttributionRow ExactShapley(const BatchScorer& scorer,
                            std::span<const double> x,
                            const ValueFunctionConfig& cfg) {
  cfg.Validate();
  const int d = static_cast<int>(x.size());
  if (d > cfg.max_exact_features) {
    throw CapabilityError("exact Shapley supports at most " +
                          std::to_string(cfg.max_exact_features) +
                          " features, got " + std::to_string(d));
  }
  if (static_cast<Eigen::Index>(d) != cfg.background.cols()) {
    throw InvalidArgument("instance and background widths differ");
  }
  const uint64_t count = uint64_t{1} << d;
  std::vector<uint64_t> masks(count);
  std::iota(masks.begin(), masks.end(), uint64_t{0});
  const std::vector<double> v =
      CoalitionValues(scorer, x, masks, cfg.background, cfg.batching);

  // weight[s] = s! (d - s - 1)! / d!
  std::vector<double> weight(static_cast<size_t>(d));
  for (int s = 0; s < d; ++s) {
    weight[static_cast<size_t>(s)] =
        Factorial(s) * Factorial(d - s - 1) / Factorial(d);
  }
  AttributionRow row;
  row.phi.assign(static_cast<size_t>(d), 0.0);
  row.base = v[0];
  for (int j = 0; j < d; ++j) {
    const uint64_t bit = uint64_t{1} << j;
    double phi = 0.0;
    for (uint64_t s = 0; s < count; ++s) {
      if (s & bit) continue;
      phi += weight[static_cast<size_t>(std::popcount(s))] * (v[s | bit] - v[s]);
    }
    row.phi[static_cast<size_t>(j)] = phi;
  }
  return row;
}

BackgroundStats BackgroundStats::Compute(
    const ScoringModel& model, std::span<const std::string> column_names,
    const Matrix& background) {
  if (background.rows() < 1) throw InvalidArgument("background is empty");
  BackgroundStats stats;
  stats.feature_means.resize(static_cast<size_t>(background.cols()));
  for (Eigen::Index c = 0; c < background.cols(); ++c) {
    stats.feature_means[static_cast<size_t>(c)] = background.col(c).mean();
  }
  const auto columns = ResolveColumns(model, column_names);
  stats.mean_output = Mean(ScoreRows(model, columns, background));
  return stats;
}

AttributionMatrix LinearShap(const ScoringModel& model,
                             std::span<const std::string> column_names,
                             const Matrix& rows, const BackgroundStats& stats) {
  if (model.kind != ModelKind::kLinear) {
    throw InvalidArgument("linear SHAP needs a linear model");
  }
  if (stats.feature_means.size() != static_cast<size_t>(rows.cols())) {
    throw InvalidArgument("background means do not match the batch width");
  }
  const auto columns = ResolveColumns(model, column_names);
  AttributionMatrix phi;
  phi.values = Matrix::Zero(rows.rows(), rows.cols());
  phi.base_values.assign(static_cast<size_t>(rows.rows()), stats.mean_output);
  phi.feature_names.assign(column_names.begin(), column_names.end());
  phi.instances.resize(static_cast<size_t>(rows.rows()));
  std::iota(phi.instances.begin(), phi.instances.end(), size_t{0});
  for (size_t j = 0; j < columns.size(); ++j) {
    const auto c = static_cast<Eigen::Index>(columns[j]);
    phi.values.col(c) = model.weights[j] *
                        (rows.col(c).array() - stats.feature_means[columns[j]]);
  }
  return phi;
}

ResidualReport ResidualProtectedAttribution(const BatchScorer& base,
                                            const BatchScorer& adversarial,
                                            const Matrix& rows) {
  const auto y = CallScorer(base, rows);
  const auto y_adv = CallScorer(adversarial, rows);
  ResidualReport report;
  report.phi_protected.resize(y.size());
  double sum_abs = 0.0;
  for (size_t i = 0; i < y.size(); ++i) {
    report.phi_protected[i] = y_adv[i] - y[i];
    const double a = std::abs(report.phi_protected[i]);
    sum_abs += a;
    report.max_abs = std::max(report.max_abs, a);
  }
  report.mean_abs = y.empty() ? 0.0 : sum_abs / static_cast<double>(y.size());
  report.bound_holds = report.mean_abs <= report.max_abs;
  return report;
}

double ShapleyKernelWeight(int d, int s) {
  if (s <= 0 || s >= d) return 0.0;
  return (d - 1) / (Binomial(d, s) * s * (d - s));
}

AttributionRow KernelShap(const BatchScorer& scorer, std::span<const double> x,
                          const ValueFunctionConfig& cfg,
                          const KernelSampling& sampling) {
  cfg.Validate();
  const int d = static_cast<int>(x.size());
  if (d < 2) throw InvalidArgument("kernel SHAP needs at least 2 features");
  if (d > 62) throw CapabilityError("kernel SHAP supports at most 62 features");
  if (static_cast<Eigen::Index>(d) != cfg.background.cols()) {
    throw InvalidArgument("instance and background widths differ");
  }

  // Coalition masks and their regression weights.
  std::map<uint64_t, double> weighted;
  const uint64_t full = (uint64_t{1} << d) - 1;
  if (d < 63 && (uint64_t{1} << d) <= sampling.max_coalitions) {
    for (uint64_t m = 1; m < full; ++m) {
      weighted[m] = ShapleyKernelWeight(d, std::popcount(m));
    }
  } else {
    // Size distribution proportional to the total kernel mass of each size.
    std::vector<double> cdf(static_cast<size_t>(d - 1));
    double total = 0.0;
    for (int s = 1; s < d; ++s) {
      total += 1.0 / (s * (d - s));
      cdf[static_cast<size_t>(s - 1)] = total;
    }
    CounterStream stream(DeriveSeed(sampling.seed, "kernel-coalitions"));
    const size_t pairs = std::max<size_t>(1, sampling.max_coalitions / 2);
    std::vector<size_t> features(static_cast<size_t>(d));
    for (size_t p = 0; p < pairs; ++p) {
      const double u = stream.NextUniform() * total;
      int s = 1;
      while (s < d - 1 && cdf[static_cast<size_t>(s - 1)] <= u) ++s;
      std::iota(features.begin(), features.end(), size_t{0});
      uint64_t mask = 0;
      for (int k = 0; k < s; ++k) {
        const size_t pick =
            static_cast<size_t>(k) +
            stream.NextBelow(static_cast<uint64_t>(d - k));
        std::swap(features[static_cast<size_t>(k)], features[pick]);
        mask |= uint64_t{1} << features[static_cast<size_t>(k)];
      }
      weighted[mask] += 1.0;
      weighted[full & ~mask] += 1.0;
    }
  }

  std::vector<uint64_t> masks;
  std::vector<double> weights;
  masks.reserve(weighted.size());
  for (const auto& [m, w] : weighted) {
    masks.push_back(m);
    weights.push_back(w);
  }

  const double v_empty = Mean(CallScorer(scorer, cfg.background));
  Matrix instance(1, d);
  for (int j = 0; j < d; ++j) instance(0, j) = x[static_cast<size_t>(j)];
  const double v_full = CallScorer(scorer, instance)[0];
  const std::vector<double> v =
      CoalitionValues(scorer, x, masks, cfg.background, cfg.batching);

  // Eliminate phi_{d-1} = delta - sum_{j<d-1} phi_j.
  const double delta = v_full - v_empty;
  const int k = d - 1;
  Eigen::MatrixXd ata = Eigen::MatrixXd::Zero(k, k);
  Eigen::VectorXd atb = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd a(k);
  for (size_t m = 0; m < masks.size(); ++m) {
    const double z_last = (masks[m] >> k) & 1u;
    for (int j = 0; j < k; ++j) a(j) = static_cast<double>((masks[m] >> j) & 1u) - z_last;
    const double target = v[m] - v_empty - z_last * delta;
    ata.noalias() += weights[m] * a * a.transpose();
    atb.noalias() += weights[m] * target * a;
  }

  AttributionRow row;
  row.base = v_empty;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(ata);
  const auto diag = ldlt.vectorD().cwiseAbs();
  const bool singular = ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
                        diag.minCoeff() <= 1e-12 * std::max(1.0, diag.maxCoeff());
  Eigen::VectorXd solution;
  if (singular) {
    row.regularized = true;
    std::cerr << "warning: kernel SHAP system is singular; using ridge "
              << kRidge << "\n";
    Eigen::MatrixXd ridged = ata + kRidge * Eigen::MatrixXd::Identity(k, k);
    solution = ridged.ldlt().solve(atb);
  } else {
    solution = ldlt.solve(atb);
  }
  row.phi.resize(static_cast<size_t>(d));
  double partial = 0.0;
  for (int j = 0; j < k; ++j) {
    row.phi[static_cast<size_t>(j)] = solution(j);
    partial += solution(j);
  }
  row.phi[static_cast<size_t>(k)] = delta - partial;
  for (double p : row.phi) {
    if (!std::isfinite(p)) throw NumericError("kernel SHAP produced non-finite values");
  }
  return row;
}

ConsistencyResult ConsistencyCheck(const AttributionRow& row,
                                   std::span<const double> deployed_scores,
                                   size_t instance, double tol) {
  if (instance >= deployed_scores.size()) {
    throw InvalidArgument("instance is not part of the deployed batch");
  }
  const double reconstructed =
      row.base + std::accumulate(row.phi.begin(), row.phi.end(), 0.0);
  ConsistencyResult result;
  result.gap = std::abs(reconstructed - deployed_scores[instance]);
  result.flagged = result.gap > tol;
  return result;
}

AttributionMatrix ExplainInstances(const BatchScorer& scorer,
                                   std::span<const std::string> column_names,
                                   const Matrix& rows,
                                   std::span<const size_t> instances,
                                   const Matrix& background,
                                   const ExplainOptions& options) {
  if (options.method == ExplainerMethod::kLinear) {
    throw InvalidArgument("linear attributions come from LinearShap");
  }
  ValueFunctionConfig cfg{background, options.batching, kMaxExactFeatures};
  cfg.Validate();
  const auto d = static_cast<size_t>(rows.cols());
  if (options.method == ExplainerMethod::kExact &&
      d > static_cast<size_t>(cfg.max_exact_features)) {
    throw CapabilityError("exact Shapley supports at most " +
                          std::to_string(cfg.max_exact_features) +
                          " features, got " + std::to_string(d));
  }
  AttributionMatrix phi;
  phi.values = Matrix::Zero(static_cast<Eigen::Index>(instances.size()),
                            static_cast<Eigen::Index>(d));
  phi.base_values.assign(instances.size(), 0.0);
  phi.feature_names.assign(column_names.begin(), column_names.end());
  phi.instances.assign(instances.begin(), instances.end());
  ParallelFor(instances.size(), options.threads, [&](size_t k) {
    const auto r = static_cast<Eigen::Index>(instances[k]);
    if (r >= rows.rows()) throw InvalidArgument("instance index out of range");
    std::vector<double> x(d);
    for (size_t j = 0; j < d; ++j) x[j] = rows(r, static_cast<Eigen::Index>(j));
    const AttributionRow row =
        options.method == ExplainerMethod::kExact
            ? ExactShapley(scorer, x, cfg)
            : KernelShap(scorer, x, cfg,
                         {options.max_coalitions, DeriveSeed(options.seed, k)});
    for (size_t j = 0; j < d; ++j) {
      phi.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) =
          row.phi[j];
    }
    phi.base_values[k] = row.base;
  });
  return phi;
}

std::string AttributionCsv(const AttributionMatrix& phi,
                           std::span<const std::string> ids) {
  std::ostringstream out;
  std::vector<std::string> header = {"id", "base"};
  header.insert(header.end(), phi.feature_names.begin(), phi.feature_names.end());
  out << JoinCsv(header) << '\n';
  for (size_t i = 0; i < phi.rows(); ++i) {
    std::vector<std::string> fields;
    if (!ids.empty()) {
      fields.push_back(ids[i]);
    } else {
      fields.push_back(std::to_string(phi.instances.empty() ? i : phi.instances[i]));
    }
    fields.push_back(FormatDouble(phi.base_values[i]));
    for (Eigen::Index j = 0; j < phi.values.cols(); ++j) {
      fields.push_back(FormatDouble(phi.values(static_cast<Eigen::Index>(i), j)));
    }
    out << JoinCsv(fields) << '\n';
  }
  return out.str();
}

nlohmann::json AttributionJson(const AttributionMatrix& phi,
                               const nlohmann::json& metadata) {
  nlohmann::json rows = nlohmann::json::array();
  for (size_t i = 0; i < phi.rows(); ++i) {
    std::vector<double> values(static_cast<size_t>(phi.values.cols()));
    for (size_t j = 0; j < values.size(); ++j) {
      values[j] = phi.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    rows.push_back({{"instance", phi.instances.empty() ? i : phi.instances[i]},
                    {"base", phi.base_values[i]},
                    {"phi", values}});
  }
  return {{"metadata", metadata},
          {"features", phi.feature_names},
          {"attributions", std::move(rows)}};
}

}  // namespace shuffle_audit
