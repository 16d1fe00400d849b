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

#include "shuffle_audit/attacks.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>
#include <utility>

#include "shuffle_audit/error.h"
#include "shuffle_audit/text_format.h"

namespace shuffle_audit {
namespace {

bool StrictlySuperior(double a, double b, Direction direction) {
  return direction == Direction::kHigherIsSuperior ? a > b : a < b;
}

Arrangement Identity(size_t n) {
  Arrangement a(n);
  std::iota(a.begin(), a.end(), size_t{0});
  return a;
}

// ceil(fraction * n) with a small guard so that 0.15 * 1000 stays 150.
size_t CeilFraction(double fraction, size_t n) {
  const double raw = fraction * static_cast<double>(n);
  const auto k = static_cast<size_t>(std::ceil(raw - 1e-9));
  return std::min(k, n);
}

std::string_view ShortName(AttackKind kind) {
  switch (kind) {
    case AttackKind::kNone:
      return "none";
    case AttackKind::kDominance:
      return "dom";
    case AttackKind::kMixing:
      return "mix";
    case AttackKind::kSwapping:
      return "swap";
  }
  return "none";
}

}  // namespace

// ---------------------------------------------------------------------------
// Names and specs

std::string_view ToString(AttackKind kind) {
  switch (kind) {
    case AttackKind::kNone:
      return "none";
    case AttackKind::kDominance:
      return "dominance";
    case AttackKind::kMixing:
      return "mixing";
    case AttackKind::kSwapping:
      return "swapping";
  }
  return "none";
}

std::string_view ToString(CoinVariant variant) {
  return variant == CoinVariant::kLiteral ? "literal" : "bernoulli";
}

AttackKind ParseAttackKind(std::string_view text) {
  if (text == "none") return AttackKind::kNone;
  if (text == "dominance" || text == "dom") return AttackKind::kDominance;
  if (text == "mixing" || text == "mix") return AttackKind::kMixing;
  if (text == "swapping" || text == "swap") return AttackKind::kSwapping;
  throw InvalidArgument("unknown attack kind '" + std::string(text) + "'");
}

CoinVariant ParseCoinVariant(std::string_view text) {
  if (text == "literal") return CoinVariant::kLiteral;
  if (text == "bernoulli") return CoinVariant::kBernoulli;
  throw InvalidArgument("unknown coin variant '" + std::string(text) + "'");
}

void AttackStep::Validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(head_prob)) throw InvalidArgument("head_prob must lie in [0, 1]");
  if (!in_unit(quantile)) throw InvalidArgument("quantile must lie in [0, 1]");
  if (!(modifiers.region > 0.0 && modifiers.region <= 1.0)) {
    throw InvalidArgument("region must lie in (0, 1]");
  }
  if (!(modifiers.frequency > 0.0 && modifiers.frequency <= 1.0)) {
    throw InvalidArgument("frequency must lie in (0, 1]");
  }
}

AttackSpec AttackSpec::Dominance() {
  AttackSpec s;
  s.step.kind = AttackKind::kDominance;
  return s;
}

AttackSpec AttackSpec::Mixing(double head_prob, CoinVariant variant) {
  AttackSpec s;
  s.step.kind = AttackKind::kMixing;
  s.step.head_prob = head_prob;
  s.step.coin_variant = variant;
  return s;
}

AttackSpec AttackSpec::Swapping(double quantile, bool single_step) {
  AttackSpec s;
  s.step.kind = AttackKind::kSwapping;
  s.step.quantile = quantile;
  s.step.single_step = single_step;
  return s;
}

AttackSpec AttackSpec::Hybrid(AttackStep top, AttackStep bottom) {
  AttackSpec s;
  s.hybrid = HybridSplit{std::move(top), std::move(bottom)};
  return s;
}

AttackSpec AttackSpec::WithModifiers(const Modifiers& modifiers) const {
  AttackSpec s = *this;
  s.step.modifiers = modifiers;
  return s;
}

void AttackSpec::Validate() const {
  step.Validate();
  if (hybrid) {
    if (step.kind != AttackKind::kNone) {
      throw InvalidArgument("a hybrid attack cannot also set a whole-batch kind");
    }
    hybrid->top.Validate();
    hybrid->bottom.Validate();
  }
}

bool AttackSpec::IsNone() const {
  if (hybrid) {
    return hybrid->top.kind == AttackKind::kNone &&
           hybrid->bottom.kind == AttackKind::kNone;
  }
  return step.kind == AttackKind::kNone;
}

std::string AttackSpec::Label() const {
  if (hybrid) {
    return std::string(ShortName(hybrid->top.kind)) + "+" +
           std::string(ShortName(hybrid->bottom.kind));
  }
  switch (step.kind) {
    case AttackKind::kMixing:
      return "mixing(" + FormatDouble(step.head_prob) + ")";
    case AttackKind::kSwapping:
      return "swapping(" + FormatDouble(step.quantile) + ")";
    default:
      return std::string(ToString(step.kind));
  }
}

AttackStep AttackStepFromJson(const nlohmann::json& j) {
  AttackStep s;
  s.kind = ParseAttackKind(j.value("kind", std::string("none")));
  s.head_prob = j.value("head_prob", s.head_prob);
  s.coin_variant = ParseCoinVariant(j.value("coin_variant", std::string("literal")));
  s.quantile = j.value("quantile", s.quantile);
  s.single_step = j.value("single_step", false);
  s.modifiers.region = j.value("region", 1.0);
  s.modifiers.frequency = j.value("frequency", 1.0);
  if (j.contains("max_count") && !j.at("max_count").is_null()) {
    s.modifiers.max_count = j.at("max_count").get<size_t>();
  }
  s.Validate();
  return s;
}

nlohmann::json ToJson(const AttackStep& step) {
  nlohmann::json j = {{"kind", ToString(step.kind)},
                      {"head_prob", step.head_prob},
                      {"coin_variant", ToString(step.coin_variant)},
                      {"quantile", step.quantile},
                      {"single_step", step.single_step},
                      {"region", step.modifiers.region},
                      {"frequency", step.modifiers.frequency},
                      {"max_count", nullptr}};
  if (step.modifiers.max_count) j["max_count"] = *step.modifiers.max_count;
  return j;
}

AttackSpec AttackSpec::FromJson(const nlohmann::json& j) {
  AttackSpec s;
  if (j.contains("hybrid") && !j.at("hybrid").is_null()) {
    const auto& h = j.at("hybrid");
    auto half = [&](const char* key) {
      return h.contains(key) && !h.at(key).is_null()
                 ? AttackStepFromJson(h.at(key))
                 : AttackStep{};
    };
    s.hybrid = HybridSplit{half("top"), half("bottom")};
  } else {
    s.step = AttackStepFromJson(j);
  }
  s.Validate();
  return s;
}

nlohmann::json AttackSpec::ToJson() const {
  if (hybrid) {
    auto half = [](const AttackStep& st) -> nlohmann::json {
      if (st.kind == AttackKind::kNone) return nullptr;
      return shuffle_audit::ToJson(st);
    };
    return {{"kind", "none"},
            {"hybrid", {{"top", half(hybrid->top)},
                        {"bottom", half(hybrid->bottom)}}}};
  }
  return shuffle_audit::ToJson(step);
}

// ---------------------------------------------------------------------------
// Sorting and gating

SortedView PrepareSortedView(std::span<const double> scores,
                             std::span<const uint8_t> groups,
                             Direction direction) {
  if (scores.size() != groups.size()) {
    throw InvalidArgument("scores and groups differ in length");
  }
  SortedView view;
  view.direction = direction;
  view.ids.resize(scores.size());
  std::iota(view.ids.begin(), view.ids.end(), size_t{0});
  std::stable_sort(view.ids.begin(), view.ids.end(), [&](size_t a, size_t b) {
    return StrictlySuperior(scores[a], scores[b], direction);
  });
  view.privileged.reserve(scores.size());
  view.scores.reserve(scores.size());
  for (size_t id : view.ids) {
    view.privileged.push_back(groups[id] ? 1 : 0);
    view.scores.push_back(scores[id]);
  }
  return view;
}

ActionGate::ActionGate(const Modifiers& modifiers, uint64_t seed)
    : frequency_(modifiers.frequency),
      max_count_(modifiers.max_count),
      stream_(seed) {}

bool ActionGate::Permit() {
  if (max_count_ && used_ >= *max_count_) return false;
  if (frequency_ < 1.0 && !(stream_.NextUniform() < frequency_)) return false;
  ++used_;
  return true;
}

// ---------------------------------------------------------------------------
// Kernels

Arrangement DominanceArrangement(std::span<const uint8_t> privileged,
                                 ActionGate& gate) {
  Arrangement a = Identity(privileged.size());
  if (!gate.Permit()) return a;
  std::stable_partition(a.begin(), a.end(),
                        [&](size_t pos) { return privileged[pos] != 0; });
  return a;
}

Arrangement MixingArrangement(std::span<const uint8_t> privileged,
                              std::span<const double> sorted_scores,
                              Direction direction, double head_prob,
                              CoinVariant variant, CounterStream& coin,
                              ActionGate& gate) {
  std::deque<size_t> priv;
  std::deque<size_t> unpriv;
  for (size_t pos = 0; pos < privileged.size(); ++pos) {
    (privileged[pos] ? priv : unpriv).push_back(pos);
  }
  Arrangement a;
  a.reserve(privileged.size());
  auto take = [&a](std::deque<size_t>& q) {
    a.push_back(q.front());
    q.pop_front();
  };
  while (!priv.empty() && !unpriv.empty()) {
    // The unprivileged front wins a fair comparison only when its original
    // score is strictly superior; ties go to the privileged front.
    const bool unpriv_wins_fair = StrictlySuperior(
        sorted_scores[unpriv.front()], sorted_scores[priv.front()], direction);
    if (!gate.Permit()) {
      take(unpriv_wins_fair ? unpriv : priv);
      continue;
    }
    if (coin.NextUniform() < head_prob) {
      take(priv);
    } else if (variant == CoinVariant::kBernoulli) {
      take(unpriv);
    } else {
      take(unpriv_wins_fair ? unpriv : priv);
    }
  }
  while (!priv.empty()) take(priv);
  while (!unpriv.empty()) take(unpriv);
  return a;
}

Arrangement SwappingArrangement(std::span<const uint8_t> privileged,
                                double quantile, bool single_step,
                                ActionGate& gate) {
  const size_t n = privileged.size();
  Arrangement ids = Identity(n);
  if (n < 2) return ids;
  std::vector<uint8_t> p(privileged.begin(), privileged.end());
  const auto j_start = static_cast<size_t>(
      std::llround(quantile * static_cast<double>(n - 2)));
  std::vector<uint8_t> snapshot;
  for (size_t j = j_start + 1; j-- > 0;) {
    // In single-step mode decisions use the groups as they stood when the
    // pass began, so an unprivileged row moves at most one position.
    if (single_step) snapshot = p;
    const std::vector<uint8_t>& test = single_step ? snapshot : p;
    for (size_t i = j; i + 1 < n; ++i) {
      if (test[i] == 0 && test[i + 1] != 0 && gate.Permit()) {
        std::swap(ids[i], ids[i + 1]);
        if (!single_step) std::swap(p[i], p[i + 1]);
      }
    }
    if (single_step) {
      for (size_t i = 0; i < n; ++i) p[i] = privileged[ids[i]];
    }
  }
  return ids;
}

std::vector<double> ApplyArrangement(const SortedView& view,
                                     std::span<const size_t> arrangement) {
  std::vector<double> out(view.size());
  for (size_t k = 0; k < arrangement.size(); ++k) {
    out[view.ids[arrangement[k]]] = view.scores[k];
  }
  return out;
}

std::vector<double> AttackDominance(const SortedView& view) {
  ActionGate gate(Modifiers{}, 0);
  return ApplyArrangement(view, DominanceArrangement(view.privileged, gate));
}

std::vector<double> AttackMixing(const SortedView& view, double head_prob,
                                 CoinVariant variant, uint64_t seed) {
  if (!(head_prob >= 0.0 && head_prob <= 1.0)) {
    throw InvalidArgument("head_prob must lie in [0, 1]");
  }
  ActionGate gate(Modifiers{}, 0);
  CounterStream coin(DeriveSeed(seed, "coin"));
  return ApplyArrangement(
      view, MixingArrangement(view.privileged, view.scores, view.direction,
                              head_prob, variant, coin, gate));
}

std::vector<double> AttackSwapping(const SortedView& view, double quantile,
                                   bool single_step) {
  if (!(quantile >= 0.0 && quantile <= 1.0)) {
    throw InvalidArgument("quantile must lie in [0, 1]");
  }
  ActionGate gate(Modifiers{}, 0);
  return ApplyArrangement(
      view, SwappingArrangement(view.privileged, quantile, single_step, gate));
}

Arrangement StepArrangement(const SortedView& view, const AttackStep& step,
                            size_t begin, size_t end, uint64_t seed) {
  Arrangement a = Identity(view.size());
  if (step.kind == AttackKind::kNone || end <= begin) return a;
  const size_t len = CeilFraction(step.modifiers.region, end - begin);
  const std::span<const uint8_t> priv(view.privileged.data() + begin, len);
  const std::span<const double> scores(view.scores.data() + begin, len);
  ActionGate gate(step.modifiers, DeriveSeed(seed, "gate"));
  Arrangement local;
  switch (step.kind) {
    case AttackKind::kDominance:
      local = DominanceArrangement(priv, gate);
      break;
    case AttackKind::kMixing: {
      CounterStream coin(DeriveSeed(seed, "coin"));
      local = MixingArrangement(priv, scores, view.direction, step.head_prob,
                                step.coin_variant, coin, gate);
      break;
    }
    case AttackKind::kSwapping:
      local = SwappingArrangement(priv, step.quantile, step.single_step, gate);
      break;
    case AttackKind::kNone:
      break;
  }
  for (size_t k = 0; k < local.size(); ++k) a[begin + k] = begin + local[k];
  return a;
}

std::vector<double> ApplyStep(const SortedView& view, const AttackStep& step,
                              uint64_t seed) {
  step.Validate();
  return ApplyArrangement(view,
                          StepArrangement(view, step, 0, view.size(), seed));
}

std::vector<double> ComposeHybrid(const SortedView& view,
                                  const AttackStep& top,
                                  const AttackStep& bottom, uint64_t seed) {
  top.Validate();
  bottom.Validate();
  const size_t n = view.size();
  const size_t split = (n + 1) / 2;
  const Arrangement upper =
      StepArrangement(view, top, 0, split, DeriveSeed(seed, "hybrid-top"));
  const Arrangement lower =
      StepArrangement(view, bottom, split, n, DeriveSeed(seed, "hybrid-bottom"));
  Arrangement a(n);
  for (size_t k = 0; k < n; ++k) a[k] = k < split ? upper[k] : lower[k];
  return ApplyArrangement(view, a);
}

std::vector<double> ApplyAttack(const SortedView& view, const AttackSpec& spec,
                                uint64_t seed) {
  if (spec.hybrid) {
    return ComposeHybrid(view, spec.hybrid->top, spec.hybrid->bottom, seed);
  }
  return ApplyStep(view, spec.step, seed);
}

// ---------------------------------------------------------------------------
// Adversarial scorer

AdversarialScorer::AdversarialScorer(ScoringModel base,
                                     std::vector<std::string> protected_features,
                                     AttackSpec spec, uint64_t global_seed,
                                     Direction direction)
    : base_(std::move(base)),
      protected_features_(std::move(protected_features)),
      spec_(std::move(spec)),
      global_seed_(global_seed),
      direction_(direction) {
  if (protected_features_.empty()) {
    throw InvalidArgument("adversarial scorer needs a protected feature");
  }
  for (const auto& p : protected_features_) {
    if (std::find(base_.features.begin(), base_.features.end(), p) !=
        base_.features.end()) {
      throw SchemaError("protected feature '" + p +
                        "' is a scoring feature of the base model");
    }
  }
  spec_.Validate();
}

uint64_t AdversarialScorer::BatchSeed(
    const Matrix& rows, std::span<const size_t> protected_columns) const {
  uint64_t h = kFnvOffset;
  std::vector<double> column(static_cast<size_t>(rows.rows()));
  for (size_t c : protected_columns) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      column[static_cast<size_t>(i)] = rows(i, static_cast<Eigen::Index>(c));
    }
    h = Fnv1a64Doubles(column, h);
  }
  return h ^ global_seed_;
}

std::vector<double> AdversarialScorer::ScoreRows(
    const Matrix& rows, std::span<const size_t> model_columns,
    std::span<const size_t> protected_columns) const {
  std::vector<double> y = shuffle_audit::ScoreRows(base_, model_columns, rows);
  if (y.size() <= 1 || spec_.IsNone()) return y;
  const auto mask = PrivilegedMask(rows, protected_columns);
  if (std::all_of(mask.begin(), mask.end(),
                  [&](uint8_t m) { return m == mask.front(); })) {
    return y;
  }
  const SortedView view = PrepareSortedView(y, mask, direction_);
  return ApplyAttack(view, spec_, BatchSeed(rows, protected_columns));
}

BatchScorer AdversarialScorer::Bind(
    std::span<const std::string> column_names) const {
  auto model_columns = ResolveColumns(base_, column_names);
  std::vector<size_t> protected_columns;
  for (const auto& p : protected_features_) {
    const auto it = std::find(column_names.begin(), column_names.end(), p);
    if (it == column_names.end()) {
      throw SchemaError("protected feature '" + p + "' is not a column");
    }
    protected_columns.push_back(static_cast<size_t>(it - column_names.begin()));
  }
  return [self = *this, model_columns = std::move(model_columns),
          protected_columns = std::move(protected_columns)](const Matrix& rows) {
    return self.ScoreRows(rows, model_columns, protected_columns);
  };
}

std::vector<double> AdversarialScore(const AdversarialScorer& scorer,
                                     const Dataset& dataset) {
  return scorer.Bind(dataset.column_names())(dataset.rows());
}

}  // namespace shuffle_audit
