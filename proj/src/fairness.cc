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

#include "shuffle_audit/fairness.h"

#include <algorithm>
#include <cmath>

#include "shuffle_audit/error.h"

namespace shuffle_audit {
namespace {

std::optional<double> Ratio(size_t num, size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::optional<double> Diff(std::optional<double> a, std::optional<double> b) {
  if (!a || !b) return std::nullopt;
  return *a - *b;
}

nlohmann::json OptionalJson(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

double EntropyTerm(double share, double ratio) {
  return ratio > 0.0 ? share * ratio * std::log(ratio) : 0.0;
}

}  // namespace

std::optional<double> GroupCounts::PositiveRate() const {
  return Ratio(predicted_positive, n);
}

std::optional<double> GroupCounts::TruePositiveRate() const {
  return Ratio(tp, tp + fn);
}

std::optional<double> GroupCounts::FalsePositiveRate() const {
  return Ratio(fp, fp + tn);
}

std::optional<double> GroupCounts::MeanBenefit() const {
  if (n == 0) return std::nullopt;
  // sum(y_pred - y_true + 1) = predicted_positive - actual_positive + n
  const double actual_positive = static_cast<double>(tp + fn);
  return (static_cast<double>(predicted_positive) - actual_positive +
          static_cast<double>(n)) /
         static_cast<double>(n);
}

GroupStats GroupConfusion(std::span<const int> y_true,
                          std::span<const int> y_pred,
                          std::span<const uint8_t> groups) {
  if (y_pred.size() != groups.size()) {
    throw InvalidArgument("predictions and groups differ in length");
  }
  if (!y_true.empty() && y_true.size() != y_pred.size()) {
    throw InvalidArgument("labels and predictions differ in length");
  }
  GroupStats stats;
  stats.has_labels = !y_true.empty();
  for (size_t i = 0; i < y_pred.size(); ++i) {
    GroupCounts& g = groups[i] ? stats.privileged : stats.unprivileged;
    const bool pred = y_pred[i] != 0;
    ++g.n;
    g.predicted_positive += pred;
    if (stats.has_labels) {
      const bool truth = y_true[i] != 0;
      g.tp += pred && truth;
      g.fp += pred && !truth;
      g.tn += !pred && !truth;
      g.fn += !pred && truth;
    }
  }
  return stats;
}

FairnessReport ComputeFairnessMetrics(const GroupStats& stats) {
  const GroupCounts& p = stats.privileged;
  const GroupCounts& u = stats.unprivileged;
  FairnessReport r;
  const auto pr_p = p.PositiveRate();
  const auto pr_u = u.PositiveRate();
  r.spd = Diff(pr_u, pr_p);
  if (pr_u && pr_p && *pr_p > 0.0) r.di = *pr_u / *pr_p;
  if (!stats.has_labels) return r;

  const auto tpr_diff = Diff(u.TruePositiveRate(), p.TruePositiveRate());
  const auto fpr_diff = Diff(u.FalsePositiveRate(), p.FalsePositiveRate());
  r.eod = tpr_diff;
  if (tpr_diff && fpr_diff) r.aod = 0.5 * (*fpr_diff + *tpr_diff);

  const size_t n = p.n + u.n;
  if (n == 0) return r;
  const double total_benefit =
      (p.MeanBenefit().value_or(0.0) * static_cast<double>(p.n) +
       u.MeanBenefit().value_or(0.0) * static_cast<double>(u.n));
  const double mu = total_benefit / static_cast<double>(n);
  if (mu <= 0.0) return r;
  double theil = 0.0;
  for (const GroupCounts* g : {&p, &u}) {
    if (g->n == 0) continue;
    theil += EntropyTerm(static_cast<double>(g->n) / static_cast<double>(n),
                         *g->MeanBenefit() / mu);
  }
  // Clamp rounding noise below zero; the index is non-negative.
  r.theil = std::max(0.0, theil);
  return r;
}

FairnessDrops FairnessDrop(const FairnessReport& base,
                           const FairnessReport& adversarial) {
  auto drop = [](std::optional<double> a, std::optional<double> b,
                 auto distance) -> std::optional<double> {
    if (!a || !b) return std::nullopt;
    return distance(*b) - distance(*a);
  };
  const auto abs_dist = [](double v) { return std::abs(v); };
  FairnessDrops d;
  d.spd = drop(base.spd, adversarial.spd, abs_dist);
  d.eod = drop(base.eod, adversarial.eod, abs_dist);
  d.aod = drop(base.aod, adversarial.aod, abs_dist);
  d.di = drop(base.di, adversarial.di, [](double v) { return std::abs(1.0 - v); });
  d.theil = drop(base.theil, adversarial.theil, [](double v) { return v; });
  return d;
}

bool FairnessDrops::AnyExceeds(double tolerance) const {
  for (const auto& v : {spd, eod, aod, di, theil}) {
    if (v && *v > tolerance) return true;
  }
  return false;
}

nlohmann::json ToJson(const GroupCounts& c) {
  return {{"n", c.n}, {"predicted_positive", c.predicted_positive},
          {"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

nlohmann::json ToJson(const FairnessReport& r) {
  return {{"spd", OptionalJson(r.spd)}, {"eod", OptionalJson(r.eod)},
          {"aod", OptionalJson(r.aod)}, {"di", OptionalJson(r.di)},
          {"theil", OptionalJson(r.theil)}};
}

nlohmann::json ToJson(const FairnessDrops& d) {
  return {{"spd", OptionalJson(d.spd)}, {"eod", OptionalJson(d.eod)},
          {"aod", OptionalJson(d.aod)}, {"di", OptionalJson(d.di)},
          {"theil", OptionalJson(d.theil)}};
}

}  // namespace shuffle_audit
