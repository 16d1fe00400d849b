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

// Group fairness between a privileged and an unprivileged group.
//
// Differences are unprivileged minus privileged, so 0 is parity and
// negative values disadvantage the unprivileged group. An undefined metric
// (empty group, zero denominator, missing labels) is an empty optional.

#ifndef SHUFFLE_AUDIT_FAIRNESS_H_
#define SHUFFLE_AUDIT_FAIRNESS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "json.hpp"

namespace shuffle_audit {

struct GroupCounts {
  size_t n = 0;
  size_t predicted_positive = 0;
  size_t tp = 0;
  size_t fp = 0;
  size_t tn = 0;
  size_t fn = 0;

  std::optional<double> PositiveRate() const;
  std::optional<double> TruePositiveRate() const;
  std::optional<double> FalsePositiveRate() const;
  // Mean benefit b = y_pred - y_true + 1 over the group.
  std::optional<double> MeanBenefit() const;
};

struct GroupStats {
  GroupCounts privileged;
  GroupCounts unprivileged;
  bool has_labels = false;

  // Both groups nonempty, so positive rates exist.
  bool RatesDefined() const { return privileged.n > 0 && unprivileged.n > 0; }
};

// groups: nonzero = privileged. y_true may be empty (no labels).
GroupStats GroupConfusion(std::span<const int> y_true,
                          std::span<const int> y_pred,
                          std::span<const uint8_t> groups);

struct FairnessReport {
  std::optional<double> spd;    // statistical parity difference
  std::optional<double> eod;    // equal opportunity difference
  std::optional<double> aod;    // average odds difference
  std::optional<double> di;     // disparate impact
  std::optional<double> theil;  // between-group Theil index
};

FairnessReport ComputeFairnessMetrics(const GroupStats& stats);

// Increase of each metric's distance from its ideal value from f to f':
// |spd|, |eod|, |aod|, |1 - di|, theil. Positive = fairness worsened.
struct FairnessDrops {
  std::optional<double> spd;
  std::optional<double> eod;
  std::optional<double> aod;
  std::optional<double> di;
  std::optional<double> theil;

  // True when a defined drop exceeds the tolerance.
  bool AnyExceeds(double tolerance) const;
};

FairnessDrops FairnessDrop(const FairnessReport& base,
                           const FairnessReport& adversarial);

// Default auditor tolerance on a fairness drop.
inline constexpr double kDefaultDropTolerance = 0.5;

nlohmann::json ToJson(const GroupCounts& counts);
nlohmann::json ToJson(const FairnessReport& report);
nlohmann::json ToJson(const FairnessDrops& drops);

}  // namespace shuffle_audit

#endif  // SHUFFLE_AUDIT_FAIRNESS_H_
