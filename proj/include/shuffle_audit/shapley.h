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

// Shapley attribution engines over black-box batch scorers.
//
// The value of a coalition S for an instance x is the mean scorer output
// over imputed rows: one row per background row, with features in S taken
// from x and the rest from the background row. How these rows reach the
// scorer matters for shuffled scorers:
//
//   kPerCoalition  one scorer call per coalition. A shuffling attack only
//                  permutes outputs within a call, so every coalition value
//                  (a mean) is unchanged and the attack is invisible.
//   kMegaBatch     all coalitions' rows in one call. The shuffle then moves
//                  scores across coalitions and the protected feature picks
//                  up attribution.

#ifndef SHUFFLE_AUDIT_SHAPLEY_H_
#define SHUFFLE_AUDIT_SHAPLEY_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "shuffle_audit/dataset.h"
#include "shuffle_audit/model.h"

namespace shuffle_audit {

inline constexpr int kMaxExactFeatures = 16;

enum class Batching { kPerCoalition, kMegaBatch };

std::string_view ToString(Batching batching);
Batching ParseBatching(std::string_view text);

struct ValueFunctionConfig {
  Matrix background;
  Batching batching = Batching::kPerCoalition;
  int max_exact_features = kMaxExactFeatures;

  void Validate() const;
};

// Subset of feature indices as a bitmask.
class Coalition {
 public:
  constexpr Coalition() = default;
  constexpr explicit Coalition(uint32_t members) : members_(members) {}
  static Coalition Full(int num_features) {
    return Coalition(num_features >= 32 ? ~0u : (1u << num_features) - 1u);
  }

  constexpr uint32_t members() const { return members_; }
  constexpr bool Contains(int feature) const {
    return (members_ >> feature) & 1u;
  }
  int size() const;
  Coalition With(int feature) const {
    return Coalition(members_ | (1u << feature));
  }

  friend constexpr bool operator==(Coalition, Coalition) = default;

 private:
  uint32_t members_ = 0;
};

struct AttributionRow {
  std::vector<double> phi;
  double base = 0.0;
  // Set when the weighted least squares system needed the ridge fallback.
  bool regularized = false;
};

struct AttributionMatrix {
  Matrix values;                   // N x d, column order = feature_names
  std::vector<double> base_values;  // one per instance
  std::vector<std::string> feature_names;
  std::vector<size_t> instances;   // row index of each explained instance

  size_t rows() const { return static_cast<size_t>(values.rows()); }
};

// Imputed rows for one coalition: background rows with the coalition's
// features overwritten by x.
Matrix ImputeRows(std::span<const double> x, Coalition coalition,
                  const Matrix& background);

// v(S): mean of one scorer call over the imputed rows.
double CoalitionValue(const BatchScorer& scorer, std::span<const double> x,
                      Coalition coalition, const ValueFunctionConfig& cfg);

// Exact Shapley values by enumerating all 2^d coalitions. base = v(empty).
// Throws CapabilityError when d exceeds cfg.max_exact_features.
AttributionRow ExactShapley(const BatchScorer& scorer,
                            std::span<const double> x,
                            const ValueFunctionConfig& cfg);

struct BackgroundStats {
  std::vector<double> feature_means;  // per dataset column
  double mean_output = 0.0;           // E[f(X)] over the background

  static BackgroundStats Compute(const ScoringModel& model,
                                 std::span<const std::string> column_names,
                                 const Matrix& background);
};

// phi_ij = w_j (x_ij - E[X_j]) for model features, 0 elsewhere;
// base = E[f(X)]. Requires a linear model.
AttributionMatrix LinearShap(const ScoringModel& model,
                             std::span<const std::string> column_names,
                             const Matrix& rows, const BackgroundStats& stats);

struct ResidualReport {
  std::vector<double> phi_protected;  // f'(X) - f(X)
  double mean_abs = 0.0;
  double max_abs = 0.0;
  bool bound_holds = true;  // mean_abs <= max_abs
};

// Protected-feature attribution implied by additivity when scoring-feature
// attributions are unchanged by the shuffle: phi_p = f'(X) - f(X), each
// scorer called once on the whole batch.
ResidualReport ResidualProtectedAttribution(const BatchScorer& base,
                                            const BatchScorer& adversarial,
                                            const Matrix& rows);

struct KernelSampling {
  size_t max_coalitions = 4096;
  uint64_t seed = 0;
};

// Kernel-weighted least squares estimate of Shapley values. Uses every
// proper coalition when 2^d <= max_coalitions, else samples coalition
// sizes by Shapley-kernel mass with paired complements. Solves with
// phi_0 = v(empty) and sum(phi) = v(full) - v(empty) eliminated by
// substitution. v(empty) is one call over the background, v(full) one call
// on x alone; the coalition rows follow cfg.batching.
AttributionRow KernelShap(const BatchScorer& scorer, std::span<const double> x,
                          const ValueFunctionConfig& cfg,
                          const KernelSampling& sampling = {});

// Shapley kernel weight for a coalition of size s out of d features.
double ShapleyKernelWeight(int d, int s);

struct ConsistencyResult {
  double gap = 0.0;
  bool flagged = false;
};

// gap = |base + sum(phi) - deployed_scores[i]|, flagged when gap > tol.
ConsistencyResult ConsistencyCheck(const AttributionRow& row,
                                   std::span<const double> deployed_scores,
                                   size_t instance, double tol);

enum class ExplainerMethod { kExact, kLinear, kKernel };
std::string_view ToString(ExplainerMethod method);
ExplainerMethod ParseExplainerMethod(std::string_view text);

struct ExplainOptions {
  ExplainerMethod method = ExplainerMethod::kKernel;
  Batching batching = Batching::kMegaBatch;
  size_t max_coalitions = 4096;
  uint64_t seed = 0;
  int threads = 1;
};

// Explains the listed instances of `rows` with the exact or kernel engine.
// Instance k uses kernel seed DeriveSeed(seed, k), so results do not depend
// on the thread count.
AttributionMatrix ExplainInstances(const BatchScorer& scorer,
                                   std::span<const std::string> column_names,
                                   const Matrix& rows,
                                   std::span<const size_t> instances,
                                   const Matrix& background,
                                   const ExplainOptions& options);

// Attribution CSV: id,base,<feature>... one row per instance.
std::string AttributionCsv(const AttributionMatrix& phi,
                           std::span<const std::string> ids = {});
nlohmann::json AttributionJson(const AttributionMatrix& phi,
                               const nlohmann::json& metadata);

}  // namespace shuffle_audit

#endif  // SHUFFLE_AUDIT_SHAPLEY_H_
