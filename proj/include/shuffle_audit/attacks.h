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

// Shuffling attacks on batch scorers.
//
// An attack never changes the multiset of scores a batch receives. It sorts
// the batch so the superior score is on top, decides a new arrangement of
// the rows over those sorted positions using only the protected column, and
// hands the k-th best score to the k-th row of the arrangement. Any
// estimator that averages scores over a batch therefore sees the same mean.
//
// Kernels:
//   Dominance  every privileged row outranks every unprivileged row.
//   Mixing     biased-coin merge of the two group queues.
//   Swapping   adjacent bubble passes demoting unprivileged rows past
//              privileged neighbours; the quantile sets how many passes.
//
// Modifiers restrict the region (top slice of the sorted batch), the
// frequency (each elementary action succeeds with probability r) and the
// count (at most max_count elementary actions) of an attack. A hybrid splits
// the sorted batch into a top and bottom half and attacks each separately.

#ifndef SHUFFLE_AUDIT_ATTACKS_H_
#define SHUFFLE_AUDIT_ATTACKS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "shuffle_audit/dataset.h"
#include "shuffle_audit/model.h"
#include "shuffle_audit/random.h"

namespace shuffle_audit {

// Batch sorted superior-first. Ties keep ascending original index.
struct SortedView {
  std::vector<size_t> ids;          // original row index at each position
  std::vector<uint8_t> privileged;  // 1 = privileged group
  std::vector<double> scores;       // sorted scores
  Direction direction = Direction::kHigherIsSuperior;

  size_t size() const { return ids.size(); }
};

// groups holds one privileged flag per score (nonzero = privileged).
SortedView PrepareSortedView(std::span<const double> scores,
                             std::span<const uint8_t> groups,
                             Direction direction);

enum class AttackKind { kNone, kDominance, kMixing, kSwapping };
enum class CoinVariant { kLiteral, kBernoulli };

std::string_view ToString(AttackKind kind);
std::string_view ToString(CoinVariant variant);
AttackKind ParseAttackKind(std::string_view text);
CoinVariant ParseCoinVariant(std::string_view text);

struct Modifiers {
  double region = 1.0;     // fraction of the sorted batch from the top
  double frequency = 1.0;  // success probability of each elementary action
  std::optional<size_t> max_count;

  bool IsIdentity() const {
    return region >= 1.0 && frequency >= 1.0 && !max_count;
  }
};

struct AttackStep {
  AttackKind kind = AttackKind::kNone;
  double head_prob = 0.8;
  CoinVariant coin_variant = CoinVariant::kLiteral;
  double quantile = 0.0;
  bool single_step = false;
  Modifiers modifiers;

  // Throws InvalidArgument when a parameter leaves its range.
  void Validate() const;
};

struct HybridSplit {
  AttackStep top;
  AttackStep bottom;
};

// Either a single step applied to the whole batch or a hybrid of two steps.
struct AttackSpec {
  AttackStep step;
  std::optional<HybridSplit> hybrid;

  static AttackSpec None() { return {}; }
  static AttackSpec Dominance();
  static AttackSpec Mixing(double head_prob,
                           CoinVariant variant = CoinVariant::kLiteral);
  static AttackSpec Swapping(double quantile, bool single_step = false);
  static AttackSpec Hybrid(AttackStep top, AttackStep bottom);

  AttackSpec WithModifiers(const Modifiers& modifiers) const;

  void Validate() const;
  bool IsNone() const;
  // Short label such as "dominance", "mixing(0.8)", "dom+mix".
  std::string Label() const;

  // Mirrors the struct fields. A hybrid uses {"hybrid": {"top": ...,
  // "bottom": ...}} where each half is a step object or null.
  static AttackSpec FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;
};

AttackStep AttackStepFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const AttackStep& step);

// Gate for elementary attack actions: frequency draws come from its own
// stream, the count cap is checked first.
class ActionGate {
 public:
  ActionGate(const Modifiers& modifiers, uint64_t seed);

  // True when the next elementary action may execute; consumes one unit of
  // the count budget when it does.
  bool Permit();
  size_t used() const { return used_; }

 private:
  double frequency_;
  std::optional<size_t> max_count_;
  CounterStream stream_;
  size_t used_ = 0;
};

// An arrangement lists, for k = 0..n-1, the sorted position of the row that
// receives the k-th best score. The identity arrangement leaves scores as
// they are.
using Arrangement = std::vector<size_t>;

Arrangement DominanceArrangement(std::span<const uint8_t> privileged,
                                 ActionGate& gate);
Arrangement MixingArrangement(std::span<const uint8_t> privileged,
                              std::span<const double> sorted_scores,
                              Direction direction, double head_prob,
                              CoinVariant variant, CounterStream& coin,
                              ActionGate& gate);
Arrangement SwappingArrangement(std::span<const uint8_t> privileged,
                                double quantile, bool single_step,
                                ActionGate& gate);

// Scores per original index after giving the k-th best score to the row at
// sorted position arrangement[k].
std::vector<double> ApplyArrangement(const SortedView& view,
                                     std::span<const size_t> arrangement);

// Unmodified kernels on a full view; outputs are per original index.
std::vector<double> AttackDominance(const SortedView& view);
std::vector<double> AttackMixing(const SortedView& view, double head_prob,
                                 CoinVariant variant, uint64_t seed);
std::vector<double> AttackSwapping(const SortedView& view, double quantile,
                                   bool single_step);

// Runs one step with its modifiers on the whole view.
std::vector<double> ApplyStep(const SortedView& view, const AttackStep& step,
                              uint64_t seed);

// Splits the view at ceil(n/2) (extra row in the top half) and attacks each
// half within its own scores.
std::vector<double> ComposeHybrid(const SortedView& view,
                                  const AttackStep& top,
                                  const AttackStep& bottom, uint64_t seed);

std::vector<double> ApplyAttack(const SortedView& view, const AttackSpec& spec,
                                uint64_t seed);

// Arrangement for a step restricted to positions [begin, end) of the view;
// positions outside are fixed. Exposed for tests.
Arrangement StepArrangement(const SortedView& view, const AttackStep& step,
                            size_t begin, size_t end, uint64_t seed);

// The adversarial scorer f' = h(f(X)): scores a batch with the base model,
// then shuffles the outputs using only the batch's protected columns.
class AdversarialScorer {
 public:
  // Throws SchemaError when a protected feature is also a model feature.
  AdversarialScorer(ScoringModel base, std::vector<std::string> protected_features,
                    AttackSpec spec, uint64_t global_seed, Direction direction);

  const ScoringModel& base() const { return base_; }
  const std::vector<std::string>& protected_features() const {
    return protected_features_;
  }
  const AttackSpec& spec() const { return spec_; }
  uint64_t global_seed() const { return global_seed_; }
  Direction direction() const { return direction_; }

  // Seed for a batch: FNV-1a over the protected columns' bytes, XOR the
  // global seed.
  uint64_t BatchSeed(const Matrix& rows,
                     std::span<const size_t> protected_columns) const;

  std::vector<double> ScoreRows(const Matrix& rows,
                                std::span<const size_t> model_columns,
                                std::span<const size_t> protected_columns) const;

  // Binds the scorer to a column layout for black-box use by explainers.
  BatchScorer Bind(std::span<const std::string> column_names) const;

 private:
  ScoringModel base_;
  std::vector<std::string> protected_features_;
  AttackSpec spec_;
  uint64_t global_seed_;
  Direction direction_;
};

// f'(X) over a dataset. Unchanged scores when the batch has one row or a
// constant privileged view.
std::vector<double> AdversarialScore(const AdversarialScorer& scorer,
                                     const Dataset& dataset);

}  // namespace shuffle_audit

#endif  // SHUFFLE_AUDIT_ATTACKS_H_
