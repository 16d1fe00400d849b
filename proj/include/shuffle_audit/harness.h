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

// Experiment pipelines: synthetic stand-in datasets, attack sweeps with
// several explainers, the half/half hybrid grid with fairness drops, and the
// top-k region study with importance-rank histograms.
//
// Every pipeline is a pure function of its spec. Grid cell k draws its
// attack and explainer seeds from DeriveSeed(spec.seed, k), so output does
// not depend on the thread count.

#ifndef SHUFFLE_AUDIT_HARNESS_H_
#define SHUFFLE_AUDIT_HARNESS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "shuffle_audit/attacks.h"
#include "shuffle_audit/dataset.h"
#include "shuffle_audit/fairness.h"
#include "shuffle_audit/model.h"
#include "shuffle_audit/shapley.h"

namespace shuffle_audit {

// ---------------------------------------------------------------------------
// Synthetic data. These generators are plausible stand-ins for the public
// admission, diabetes and credit datasets; they are not those datasets.
//
//   admission  GRE, TOEFL, Rating (scoring) driven by one latent ability;
//              Research (protected, 1 = has research) more likely for high
//              ability.
//   diabetes   six binary symptoms (scoring) conditioned on the label;
//              Sex (1 = male) and AgeGroup (1 = under 50) protected and
//              independent of the label; Class label.
//   credit     LoanRate (installment rate 1..4, scoring); Gender (1 = male).

enum class SynthTemplate { kAdmission, kDiabetes, kCredit };

std::string_view ToString(SynthTemplate t);
SynthTemplate ParseSynthTemplate(std::string_view text);

// Throws InvalidArgument when n < 10.
Dataset SynthDataset(SynthTemplate t, size_t n, uint64_t seed);
FeatureSchema SynthSchema(SynthTemplate t);

// ---------------------------------------------------------------------------
// Experiment specification

struct ExplainerSpec {
  ExplainerMethod method = ExplainerMethod::kKernel;
  Batching batching = Batching::kMegaBatch;
  size_t max_coalitions = 4096;

  // "kernel-mega_batch", "exact-per_coalition", "linear".
  std::string Label() const;
  static ExplainerSpec FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;
};

struct GridPoint {
  std::string attack;  // family label for tables, e.g. "swapping"
  double param = 0.0;
  AttackSpec spec;
};

enum class ModelChoice { kEqualWeights, kLogistic, kExplicit };

struct ExperimentSpec {
  std::string name = "custom";
  // Data: a CSV + schema, or a synthetic template.
  std::optional<std::string> csv_path;
  std::optional<std::string> schema_path;
  SynthTemplate synth = SynthTemplate::kAdmission;
  size_t n = 500;
  bool normalize = true;

  ModelChoice model_choice = ModelChoice::kEqualWeights;
  ScoringModel explicit_model;
  LogisticHyper logistic;

  // Protected features the attack reads; empty = all protected columns.
  std::vector<std::string> protected_features;

  std::vector<GridPoint> grid;
  std::vector<ExplainerSpec> explainers;
  size_t sample_size = 100;
  size_t background_size = 100;
  double train_fraction = 0.8;
  double threshold = 0.9;
  uint64_t seed = 0;
  int threads = 1;

  // Throws InvalidArgument on an empty grid or explainer list.
  void Validate() const;
  static ExperimentSpec FromJson(const nlohmann::json& j);
  nlohmann::json ToJson() const;
};

// Data, model and row selections shared by every cell of an experiment.
struct PreparedExperiment {
  Dataset data;
  ScoringModel model;
  TrainTestSplit split;
  Matrix background;           // drawn from the train split
  std::vector<size_t> sample;  // first sample_size rows of the test split
  std::vector<std::string> protected_features;
};

PreparedExperiment PrepareExperiment(const ExperimentSpec& spec);

AdversarialScorer MakeAdversarial(const PreparedExperiment& prepared,
                                  const AttackSpec& attack, uint64_t seed);

// Attributions for the sample rows under one attack and explainer. The
// linear explainer combines linear SHAP on the scoring features with the
// residual f'(X) - f(X) over the sample batch, split evenly across the
// attacked protected features.
AttributionMatrix ExplainCell(const PreparedExperiment& prepared,
                              const AttackSpec& attack,
                              const ExplainerSpec& explainer, uint64_t seed,
                              int threads);

std::vector<double> MeanAbsAttribution(const AttributionMatrix& phi);

// ---------------------------------------------------------------------------
// Sweep

struct SweepRow {
  std::string attack;
  double param = 0.0;
  std::string explainer;
  std::string feature;
  double mean_abs_phi = 0.0;
};

struct CellError {
  std::string cell;
  std::string explainer;
  std::string message;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<CellError> errors;
};

SweepResult RunSweep(const ExperimentSpec& spec);

// Swapping over quantiles, Mixing over head probabilities, plus Dominance
// and the no-attack cell.
std::vector<GridPoint> AdmissionSweepGrid(
    const std::vector<double>& quantiles = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0},
    const std::vector<double>& head_probs = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0});

// ---------------------------------------------------------------------------
// Rank histograms

struct RankHistogram {
  std::vector<std::string> features;
  // shares[f] = fraction of instances where feature f ranks 1st, 2nd, 3rd,
  // or 4th and below by |phi|.
  std::vector<std::array<double, 4>> shares;
};

// Ranks features by |phi| descending per instance; ties keep column order.
RankHistogram ComputeRankHistogram(const AttributionMatrix& phi);

// ---------------------------------------------------------------------------
// Hybrid grid

struct HybridCell {
  std::string protected_set;  // e.g. "Sex" or "Sex+AgeGroup"
  AttackKind top = AttackKind::kNone;
  AttackKind bottom = AttackKind::kNone;
  std::string label;          // "dom+mix"
  std::vector<double> mean_abs_phi;
  RankHistogram ranks;
  FairnessReport base_report;
  FairnessReport adversarial_report;
  FairnessDrops drops;
  std::optional<std::string> error;
};

struct HybridGridResult {
  std::vector<std::string> features;
  std::string fairness_feature;
  std::vector<HybridCell> cells;
};

struct HybridGridOptions {
  std::vector<std::vector<std::string>> protected_sets;
  // The first protected feature of the first set defines fairness groups.
  std::string fairness_feature;
  double head_prob = 0.8;
  double quantile = 0.0;
  ExplainerSpec explainer;
};

HybridGridResult RunHybridGrid(const ExperimentSpec& spec,
                               const HybridGridOptions& options);

// Fairness of f vs f' over the test split deployed as one batch.
struct FairnessComparison {
  FairnessReport base;
  FairnessReport adversarial;
  FairnessDrops drops;
  GroupStats base_stats;
  GroupStats adversarial_stats;
};
FairnessComparison CompareFairness(const PreparedExperiment& prepared,
                                   const AttackSpec& attack, uint64_t seed,
                                   const std::string& group_feature,
                                   double threshold);

// ---------------------------------------------------------------------------
// Region study

struct RegionCell {
  std::string label;  // "none", "dominance", "dominance-top15"
  double region = 1.0;
  RankHistogram ranks;
  std::vector<double> mean_abs_phi;
};

struct RegionStudyResult {
  std::vector<std::string> features;
  std::vector<RegionCell> cells;
};

RegionStudyResult RunRegionStudy(const ExperimentSpec& spec,
                                 const std::vector<double>& regions = {0.15});

// ---------------------------------------------------------------------------
// Named audits: "admission-sweep", "diabetes-grid", "credit-region".

struct AuditOptions {
  std::string experiment;
  uint64_t seed = 0;
  std::optional<std::string> csv_path;
  std::optional<std::string> schema_path;
  std::optional<size_t> n;
  size_t sample_size = 100;
  size_t background_size = 100;
  int threads = 1;
};

std::vector<std::string> AuditNames();
ExperimentSpec AuditSpec(const AuditOptions& options);

// Runs the audit and writes its reports under out_dir. Returns the list of
// files written (relative names).
std::vector<std::string> RunAudit(const AuditOptions& options,
                                  const std::string& out_dir);

}  // namespace shuffle_audit

#endif  // SHUFFLE_AUDIT_HARNESS_H_
