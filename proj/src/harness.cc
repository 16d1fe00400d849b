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

#include "shuffle_audit/harness.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "shuffle_audit/error.h"
#include "shuffle_audit/random.h"
#include "shuffle_audit/report.h"
#include "shuffle_audit/text_format.h"

namespace shuffle_audit {
namespace {

double Clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

// Correlated standard normal: rho * latent + sqrt(1 - rho^2) * noise.
double Correlated(double latent, double rho, CounterStream& rng) {
  return rho * latent + std::sqrt(1.0 - rho * rho) * rng.NextNormal();
}

Dataset SynthAdmission(size_t n, CounterStream& rng) {
  Matrix rows(static_cast<Eigen::Index>(n), 4);
  for (size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double ability = rng.NextNormal();
    rows(r, 0) = Clamp(std::round(316.5 + 11.3 * Correlated(ability, 0.9, rng)), 290, 340);
    rows(r, 1) = Clamp(std::round(107.2 + 6.1 * Correlated(ability, 0.85, rng)), 92, 120);
    rows(r, 2) = Clamp(std::round(3.1 + 1.14 * Correlated(ability, 0.7, rng)), 1, 5);
    rows(r, 3) = rng.NextBernoulli(Sigmoid(0.3 + 1.2 * ability)) ? 1.0 : 0.0;
  }
  return Dataset(SynthSchema(SynthTemplate::kAdmission), std::move(rows));
}

Dataset SynthDiabetes(size_t n, CounterStream& rng) {
  // P(symptom | diabetic), P(symptom | not diabetic).
  constexpr std::array<std::pair<double, double>, 6> kSymptoms = {{
      {0.76, 0.08}, {0.70, 0.10}, {0.58, 0.14},
      {0.68, 0.43}, {0.48, 0.50}, {0.34, 0.08},
  }};
  Matrix rows(static_cast<Eigen::Index>(n), 8);
  std::vector<int> labels(n);
  for (size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const bool diabetic = rng.NextBernoulli(0.6);
    labels[i] = diabetic ? 1 : 0;
    for (size_t s = 0; s < kSymptoms.size(); ++s) {
      const double p = diabetic ? kSymptoms[s].first : kSymptoms[s].second;
      rows(r, static_cast<Eigen::Index>(s)) = rng.NextBernoulli(p) ? 1.0 : 0.0;
    }
    rows(r, 6) = rng.NextBernoulli(0.63) ? 1.0 : 0.0;  // Sex: 1 = male
    rows(r, 7) = rng.NextBernoulli(0.55) ? 1.0 : 0.0;  // AgeGroup: 1 = under 50
  }
  return Dataset(SynthSchema(SynthTemplate::kDiabetes), std::move(rows),
                 std::move(labels));
}

Dataset SynthCredit(size_t n, CounterStream& rng) {
  // Installment rate as % of disposable income, categories 1..4.
  constexpr std::array<double, 4> kRateCdf = {0.136, 0.367, 0.524, 1.0};
  Matrix rows(static_cast<Eigen::Index>(n), 2);
  for (size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double u = rng.NextUniform();
    int rate = 1;
    while (rate < 4 && u >= kRateCdf[static_cast<size_t>(rate - 1)]) ++rate;
    rows(r, 0) = rate;
    rows(r, 1) = rng.NextBernoulli(0.69) ? 1.0 : 0.0;  // Gender: 1 = male
  }
  return Dataset(SynthSchema(SynthTemplate::kCredit), std::move(rows));
}

std::vector<size_t> Head(const std::vector<size_t>& v, size_t k) {
  return {v.begin(), v.begin() + static_cast<long>(std::min(k, v.size()))};
}

Matrix SelectRows(const Matrix& rows, std::span<const size_t> indices) {
  Matrix out(static_cast<Eigen::Index>(indices.size()), rows.cols());
  for (size_t k = 0; k < indices.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = rows.row(static_cast<Eigen::Index>(indices[k]));
  }
  return out;
}

AttackStep StepOf(AttackKind kind, double head_prob, double quantile) {
  AttackStep s;
  s.kind = kind;
  s.head_prob = head_prob;
  s.quantile = quantile;
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Synthetic data

std::string_view ToString(SynthTemplate t) {
  switch (t) {
    case SynthTemplate::kAdmission:
      return "admission";
    case SynthTemplate::kDiabetes:
      return "diabetes";
    case SynthTemplate::kCredit:
      return "credit";
  }
  return "admission";
}

SynthTemplate ParseSynthTemplate(std::string_view text) {
  if (text == "admission") return SynthTemplate::kAdmission;
  if (text == "diabetes") return SynthTemplate::kDiabetes;
  if (text == "credit") return SynthTemplate::kCredit;
  throw InvalidArgument("unknown synthetic template '" + std::string(text) + "'");
}

FeatureSchema SynthSchema(SynthTemplate t) {
  using R = FeatureRole;
  switch (t) {
    case SynthTemplate::kAdmission:
      return FeatureSchema({{"GRE", R::kScoring, {}},
                            {"TOEFL", R::kScoring, {}},
                            {"Rating", R::kScoring, {}},
                            {"Research", R::kProtected, {}}},
                           Direction::kHigherIsSuperior, "1");
    case SynthTemplate::kDiabetes:
      return FeatureSchema({{"Polyuria", R::kScoring, {}},
                            {"Polydipsia", R::kScoring, {}},
                            {"SuddenWeightLoss", R::kScoring, {}},
                            {"Weakness", R::kScoring, {}},
                            {"Itching", R::kScoring, {}},
                            {"Irritability", R::kScoring, {}},
                            {"Sex", R::kProtected, {}},
                            {"AgeGroup", R::kProtected, {}},
                            {"Class", R::kLabel, {}}},
                           Direction::kHigherIsSuperior, "1");
    case SynthTemplate::kCredit:
      return FeatureSchema({{"LoanRate", R::kScoring, {}},
                            {"Gender", R::kProtected, {}}},
                           Direction::kHigherIsSuperior, "1");
  }
  throw InvalidArgument("unknown synthetic template");
}

Dataset SynthDataset(SynthTemplate t, size_t n, uint64_t seed) {
  if (n < 10) throw InvalidArgument("synthetic datasets need n >= 10");
  CounterStream rng(DeriveSeed(seed, ToString(t)));
  switch (t) {
    case SynthTemplate::kAdmission:
      return SynthAdmission(n, rng);
    case SynthTemplate::kDiabetes:
      return SynthDiabetes(n, rng);
    case SynthTemplate::kCredit:
      return SynthCredit(n, rng);
  }
  throw InvalidArgument("unknown synthetic template");
}

// ---------------------------------------------------------------------------
// Specs

std::string ExplainerSpec::Label() const {
  if (method == ExplainerMethod::kLinear) return "linear";
  return std::string(ToString(method)) + "-" + std::string(ToString(batching));
}

ExplainerSpec ExplainerSpec::FromJson(const nlohmann::json& j) {
  ExplainerSpec e;
  e.method = ParseExplainerMethod(j.value("method", std::string("kernel")));
  e.batching = ParseBatching(j.value(
      "batching", std::string(e.method == ExplainerMethod::kExact ? "per_coalition"
                                                                  : "mega_batch")));
  e.max_coalitions = j.value("max_coalitions", e.max_coalitions);
  return e;
}

nlohmann::json ExplainerSpec::ToJson() const {
  return {{"method", ToString(method)},
          {"batching", ToString(batching)},
          {"max_coalitions", max_coalitions}};
}

void ExperimentSpec::Validate() const {
  if (grid.empty()) throw InvalidArgument("experiment grid is empty");
  if (explainers.empty()) throw InvalidArgument("experiment has no explainer");
  if (sample_size == 0) throw InvalidArgument("sample_size must be positive");
  if (background_size == 0) throw InvalidArgument("background_size must be positive");
  for (const auto& g : grid) g.spec.Validate();
}

ExperimentSpec ExperimentSpec::FromJson(const nlohmann::json& j) {
  ExperimentSpec s;
  s.name = j.value("name", s.name);
  if (j.contains("data")) {
    const auto& d = j.at("data");
    if (d.contains("csv")) {
      s.csv_path = d.at("csv").get<std::string>();
      if (!d.contains("schema")) throw SchemaError("data.csv needs data.schema");
      s.schema_path = d.at("schema").get<std::string>();
    } else {
      s.synth = ParseSynthTemplate(d.value("synthetic", std::string("admission")));
      s.n = d.value("n", s.n);
    }
  }
  s.normalize = j.value("normalize", s.normalize);
  if (j.contains("model")) {
    const auto& m = j.at("model");
    const std::string type = m.value("type", std::string("equal_weights"));
    if (type == "equal_weights") {
      s.model_choice = ModelChoice::kEqualWeights;
    } else if (type == "logistic") {
      s.model_choice = ModelChoice::kLogistic;
      s.logistic.learning_rate = m.value("learning_rate", s.logistic.learning_rate);
      s.logistic.epochs = m.value("epochs", s.logistic.epochs);
    } else if (type == "explicit") {
      s.model_choice = ModelChoice::kExplicit;
      s.explicit_model = ScoringModel::FromJson(m);
    } else {
      throw InvalidArgument("unknown model type '" + type + "'");
    }
  }
  s.protected_features =
      j.value("protected", std::vector<std::string>{});
  for (const auto& g : j.value("grid", nlohmann::json::array())) {
    GridPoint p;
    p.spec = AttackSpec::FromJson(g.contains("spec") ? g.at("spec") : g);
    p.attack = g.value("attack", p.spec.hybrid ? p.spec.Label()
                                               : std::string(ToString(p.spec.step.kind)));
    double default_param = 0.0;
    if (p.spec.step.kind == AttackKind::kMixing) default_param = p.spec.step.head_prob;
    if (p.spec.step.kind == AttackKind::kSwapping) default_param = p.spec.step.quantile;
    if (p.spec.step.kind == AttackKind::kDominance) default_param = p.spec.step.modifiers.region;
    p.param = g.value("param", default_param);
    s.grid.push_back(std::move(p));
  }
  for (const auto& e : j.value("explainers", nlohmann::json::array())) {
    s.explainers.push_back(ExplainerSpec::FromJson(e));
  }
  s.sample_size = j.value("sample_size", s.sample_size);
  s.background_size = j.value("background_size", s.background_size);
  s.train_fraction = j.value("train_fraction", s.train_fraction);
  s.threshold = j.value("threshold", s.threshold);
  s.seed = j.value("seed", s.seed);
  s.threads = j.value("threads", s.threads);
  s.Validate();
  return s;
}

nlohmann::json ExperimentSpec::ToJson() const {
  nlohmann::json data;
  if (csv_path) {
    data = {{"csv", *csv_path}, {"schema", schema_path.value_or("")}};
  } else {
    data = {{"synthetic", ToString(synth)}, {"n", n}};
  }
  nlohmann::json model;
  switch (model_choice) {
    case ModelChoice::kEqualWeights:
      model = {{"type", "equal_weights"}};
      break;
    case ModelChoice::kLogistic:
      model = {{"type", "logistic"},
               {"learning_rate", logistic.learning_rate},
               {"epochs", logistic.epochs}};
      break;
    case ModelChoice::kExplicit:
      model = explicit_model.ToJson();
      model["type"] = "explicit";
      break;
  }
  nlohmann::json grid_json = nlohmann::json::array();
  for (const auto& g : grid) {
    grid_json.push_back({{"attack", g.attack}, {"param", g.param}, {"spec", g.spec.ToJson()}});
  }
  nlohmann::json explainer_json = nlohmann::json::array();
  for (const auto& e : explainers) explainer_json.push_back(e.ToJson());
  return {{"name", name},
          {"data", data},
          {"normalize", normalize},
          {"model", model},
          {"protected", protected_features},
          {"grid", grid_json},
          {"explainers", explainer_json},
          {"sample_size", sample_size},
          {"background_size", background_size},
          {"train_fraction", train_fraction},
          {"threshold", threshold},
          {"seed", seed}};
}

// ---------------------------------------------------------------------------
// Preparation and cells

PreparedExperiment PrepareExperiment(const ExperimentSpec& spec) {
  Dataset data = spec.csv_path
                     ? LoadCsv(*spec.csv_path, FeatureSchema::FromFile(
                                                   spec.schema_path.value_or("")))
                     : SynthDataset(spec.synth, spec.n, spec.seed);
  if (spec.normalize) data = MinMaxNormalize(data);

  ScoringModel model;
  TrainTestSplit split;
  switch (spec.model_choice) {
    case ModelChoice::kEqualWeights:
      model = ScoringModel::EqualWeights(
          data.schema().NamesWithRole(FeatureRole::kScoring));
      split = SplitRows(data.num_rows(), spec.train_fraction, spec.seed);
      break;
    case ModelChoice::kLogistic: {
      LogisticHyper hyper = spec.logistic;
      hyper.seed = spec.seed;
      LogisticFit fit = FitLogistic(data, spec.train_fraction, hyper);
      model = std::move(fit.model);
      split = std::move(fit.split);
      break;
    }
    case ModelChoice::kExplicit:
      model = spec.explicit_model;
      split = SplitRows(data.num_rows(), spec.train_fraction, spec.seed);
      break;
  }
  if (split.test.empty()) throw InvalidArgument("held-out split is empty");

  CounterStream stream(DeriveSeed(spec.seed, "background"));
  const auto perm = RandomPermutation(split.train.size(), stream);
  std::vector<size_t> background_rows;
  for (size_t k = 0; k < std::min(spec.background_size, perm.size()); ++k) {
    background_rows.push_back(split.train[perm[k]]);
  }

  std::vector<std::string> protected_features = spec.protected_features;
  if (protected_features.empty()) {
    protected_features = data.schema().NamesWithRole(FeatureRole::kProtected);
  }
  if (protected_features.empty()) {
    throw SchemaError("experiment needs at least one protected feature");
  }
  for (const auto& p : protected_features) {
    const FeatureSpec* f = data.schema().Find(p);
    if (f == nullptr || f->role != FeatureRole::kProtected) {
      throw SchemaError("'" + p + "' is not a protected feature");
    }
  }

  Matrix background = SelectRows(data.rows(), background_rows);
  std::vector<size_t> sample = Head(split.test, spec.sample_size);
  return PreparedExperiment{std::move(data),       std::move(model),
                            std::move(split),      std::move(background),
                            std::move(sample),     std::move(protected_features)};
}

AdversarialScorer MakeAdversarial(const PreparedExperiment& prepared,
                                  const AttackSpec& attack, uint64_t seed) {
  return AdversarialScorer(prepared.model, prepared.protected_features, attack,
                           seed, prepared.data.schema().direction());
}

AttributionMatrix ExplainCell(const PreparedExperiment& prepared,
                              const AttackSpec& attack,
                              const ExplainerSpec& explainer, uint64_t seed,
                              int threads) {
  const auto& names = prepared.data.column_names();
  const AdversarialScorer adversarial = MakeAdversarial(prepared, attack, seed);
  const BatchScorer f_adv = adversarial.Bind(names);

  if (explainer.method == ExplainerMethod::kLinear) {
    if (prepared.model.kind != ModelKind::kLinear) {
      throw CapabilityError("linear explainer needs a linear model");
    }
    const Matrix x = SelectRows(prepared.data.rows(), prepared.sample);
    const auto stats =
        BackgroundStats::Compute(prepared.model, names, prepared.background);
    AttributionMatrix phi = LinearShap(prepared.model, names, x, stats);
    phi.instances = prepared.sample;
    const auto residual = ResidualProtectedAttribution(
        MakeBatchScorer(prepared.model, names), f_adv, x);
    const auto share = 1.0 / static_cast<double>(prepared.protected_features.size());
    for (const auto& p : prepared.protected_features) {
      const auto c = static_cast<Eigen::Index>(prepared.data.ColumnIndex(p));
      for (size_t i = 0; i < residual.phi_protected.size(); ++i) {
        phi.values(static_cast<Eigen::Index>(i), c) = share * residual.phi_protected[i];
      }
    }
    return phi;
  }

  ExplainOptions options;
  options.method = explainer.method;
  options.batching = explainer.batching;
  options.max_coalitions = explainer.max_coalitions;
  options.seed = DeriveSeed(seed, "explainer");
  options.threads = threads;
  return ExplainInstances(f_adv, names, prepared.data.rows(), prepared.sample,
                          prepared.background, options);
}

std::vector<double> MeanAbsAttribution(const AttributionMatrix& phi) {
  std::vector<double> out(static_cast<size_t>(phi.values.cols()), 0.0);
  if (phi.values.rows() == 0) return out;
  for (Eigen::Index j = 0; j < phi.values.cols(); ++j) {
    out[static_cast<size_t>(j)] = phi.values.col(j).cwiseAbs().mean();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sweep

std::vector<GridPoint> AdmissionSweepGrid(const std::vector<double>& quantiles,
                                          const std::vector<double>& head_probs) {
  std::vector<GridPoint> grid;
  grid.push_back({"none", 0.0, AttackSpec::None()});
  for (double q : quantiles) grid.push_back({"swapping", q, AttackSpec::Swapping(q)});
  for (double p : head_probs) grid.push_back({"mixing", p, AttackSpec::Mixing(p)});
  grid.push_back({"dominance", 1.0, AttackSpec::Dominance()});
  return grid;
}

SweepResult RunSweep(const ExperimentSpec& spec) {
  spec.Validate();
  const PreparedExperiment prepared = PrepareExperiment(spec);
  const auto& names = prepared.data.column_names();
  SweepResult result;
  for (size_t k = 0; k < spec.grid.size(); ++k) {
    const GridPoint& cell = spec.grid[k];
    const uint64_t cell_seed = DeriveSeed(spec.seed, k);
    for (const auto& explainer : spec.explainers) {
      try {
        const auto phi = ExplainCell(prepared, cell.spec, explainer, cell_seed,
                                     spec.threads);
        const auto means = MeanAbsAttribution(phi);
        for (size_t j = 0; j < names.size(); ++j) {
          result.rows.push_back(
              {cell.attack, cell.param, explainer.Label(), names[j], means[j]});
        }
      } catch (const Error& e) {
        result.errors.push_back({cell.spec.Label(), explainer.Label(), e.what()});
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Rank histogram

RankHistogram ComputeRankHistogram(const AttributionMatrix& phi) {
  const auto n = static_cast<size_t>(phi.values.rows());
  const auto d = static_cast<size_t>(phi.values.cols());
  if (n == 0) throw InvalidArgument("rank histogram needs at least one instance");
  std::vector<std::array<size_t, 4>> counts(d, {0, 0, 0, 0});
  std::vector<size_t> order(d);
  for (size_t i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), size_t{0});
    const auto r = static_cast<Eigen::Index>(i);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return std::abs(phi.values(r, static_cast<Eigen::Index>(a))) >
             std::abs(phi.values(r, static_cast<Eigen::Index>(b)));
    });
    for (size_t rank = 0; rank < d; ++rank) {
      ++counts[order[rank]][std::min<size_t>(rank, 3)];
    }
  }
  RankHistogram h;
  h.features = phi.feature_names;
  h.shares.resize(d);
  for (size_t f = 0; f < d; ++f) {
    for (size_t b = 0; b < 4; ++b) {
      h.shares[f][b] = static_cast<double>(counts[f][b]) / static_cast<double>(n);
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Hybrid grid

FairnessComparison CompareFairness(const PreparedExperiment& prepared,
                                   const AttackSpec& attack, uint64_t seed,
                                   const std::string& group_feature,
                                   double threshold) {
  const Dataset test = prepared.data.Subset(prepared.split.test);
  if (!test.has_labels()) throw SchemaError("fairness comparison needs labels");
  const Direction direction = test.schema().direction();
  const auto y = ScoreBatch(prepared.model, test);
  const auto y_adv = AdversarialScore(MakeAdversarial(prepared, attack, seed), test);
  const size_t group_col = test.ColumnIndex(group_feature);
  const std::array<size_t, 1> cols = {group_col};
  const auto groups = PrivilegedMask(test.rows(), cols);

  FairnessComparison c;
  c.base_stats = GroupConfusion(test.labels(), ThresholdClassify(y, threshold, direction),
                                groups);
  c.adversarial_stats = GroupConfusion(
      test.labels(), ThresholdClassify(y_adv, threshold, direction), groups);
  c.base = ComputeFairnessMetrics(c.base_stats);
  c.adversarial = ComputeFairnessMetrics(c.adversarial_stats);
  c.drops = FairnessDrop(c.base, c.adversarial);
  return c;
}

HybridGridResult RunHybridGrid(const ExperimentSpec& spec,
                               const HybridGridOptions& options) {
  if (options.protected_sets.empty()) {
    throw InvalidArgument("hybrid grid needs at least one protected set");
  }
  PreparedExperiment prepared = PrepareExperiment(spec);
  if (!prepared.data.has_labels()) throw SchemaError("hybrid grid needs labels");
  HybridGridResult result;
  result.features = prepared.data.column_names();
  result.fairness_feature = options.fairness_feature.empty()
                                ? options.protected_sets.front().front()
                                : options.fairness_feature;
  constexpr std::array<AttackKind, 4> kKinds = {
      AttackKind::kDominance, AttackKind::kMixing, AttackKind::kSwapping,
      AttackKind::kNone};
  size_t k = 0;
  for (const auto& set : options.protected_sets) {
    prepared.protected_features = set;
    std::string set_label;
    for (const auto& p : set) set_label += (set_label.empty() ? "" : "+") + p;
    for (AttackKind top : kKinds) {
      for (AttackKind bottom : kKinds) {
        HybridCell cell;
        cell.protected_set = set_label;
        cell.top = top;
        cell.bottom = bottom;
        const AttackSpec attack = AttackSpec::Hybrid(
            StepOf(top, options.head_prob, options.quantile),
            StepOf(bottom, options.head_prob, options.quantile));
        cell.label = attack.Label();
        const uint64_t cell_seed = DeriveSeed(spec.seed, k++);
        try {
          const auto phi = ExplainCell(prepared, attack, options.explainer,
                                       cell_seed, spec.threads);
          cell.mean_abs_phi = MeanAbsAttribution(phi);
          cell.ranks = ComputeRankHistogram(phi);
          const auto fairness = CompareFairness(prepared, attack, cell_seed,
                                                result.fairness_feature,
                                                spec.threshold);
          cell.base_report = fairness.base;
          cell.adversarial_report = fairness.adversarial;
          cell.drops = fairness.drops;
        } catch (const Error& e) {
          cell.error = e.what();
        }
        result.cells.push_back(std::move(cell));
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Region study

RegionStudyResult RunRegionStudy(const ExperimentSpec& spec,
                                 const std::vector<double>& regions) {
  if (spec.explainers.empty()) throw InvalidArgument("region study needs an explainer");
  const PreparedExperiment prepared = PrepareExperiment(spec);
  RegionStudyResult result;
  result.features = prepared.data.column_names();

  std::vector<std::pair<std::string, AttackSpec>> cells;
  cells.emplace_back("none", AttackSpec::None());
  cells.emplace_back("dominance", AttackSpec::Dominance());
  for (double region : regions) {
    Modifiers m;
    m.region = region;
    const int pct = static_cast<int>(std::lround(region * 100.0));
    cells.emplace_back("dominance-top" + std::to_string(pct),
                       AttackSpec::Dominance().WithModifiers(m));
  }
  for (size_t k = 0; k < cells.size(); ++k) {
    const auto phi = ExplainCell(prepared, cells[k].second, spec.explainers.front(),
                                 DeriveSeed(spec.seed, k), spec.threads);
    RegionCell cell;
    cell.label = cells[k].first;
    cell.region = cells[k].second.step.modifiers.region;
    cell.ranks = ComputeRankHistogram(phi);
    cell.mean_abs_phi = MeanAbsAttribution(phi);
    result.cells.push_back(std::move(cell));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Named audits

namespace {

constexpr std::string_view kAdmissionSweep = "admission-sweep";
constexpr std::string_view kDiabetesGrid = "diabetes-grid";
constexpr std::string_view kCreditRegion = "credit-region";

ExplainerSpec Explainer(ExplainerMethod method, Batching batching) {
  ExplainerSpec e;
  e.method = method;
  e.batching = batching;
  return e;
}

void Emit(const std::filesystem::path& dir, const std::string& name,
          const std::string& content, std::vector<std::string>& files) {
  WriteTextFile(dir / name, content);
  files.push_back(name);
}

std::vector<std::string> RunAdmissionSweep(const ExperimentSpec& spec,
                                           const std::filesystem::path& dir) {
  std::vector<std::string> files;
  const SweepResult sweep = RunSweep(spec);
  Emit(dir, "sweep.csv", SweepCsv(sweep), files);
  Emit(dir, "sweep.json", DumpJson(SweepJson(sweep)), files);
  Emit(dir, "sweep.svg", SweepSvg(sweep), files);

  const PreparedExperiment prepared = PrepareExperiment(spec);
  const auto y = ScoreBatch(prepared.model, prepared.data);
  const auto cols = prepared.data.ColumnIndices(prepared.protected_features);
  const auto groups = PrivilegedMask(prepared.data.rows(), cols);
  const std::array<std::pair<std::string, AttackSpec>, 3> slopes = {{
      {"swapping", AttackSpec::Swapping(0.0)},
      {"mixing", AttackSpec::Mixing(0.8)},
      {"dominance", AttackSpec::Dominance()},
  }};
  for (size_t k = 0; k < slopes.size(); ++k) {
    const auto adv = AdversarialScore(
        MakeAdversarial(prepared, slopes[k].second, DeriveSeed(spec.seed, "slope")),
        prepared.data);
    Emit(dir, "slope_" + slopes[k].first + ".svg",
         SlopeSvg(y, adv, groups, slopes[k].second.Label()), files);
  }
  return files;
}

std::vector<std::string> RunDiabetesGrid(const ExperimentSpec& spec,
                                         const std::filesystem::path& dir) {
  std::vector<std::string> files;
  HybridGridOptions options;
  const std::string first = spec.protected_features.empty()
                                ? std::string("Sex")
                                : spec.protected_features.front();
  options.protected_sets = {{first}};
  if (spec.protected_features.size() > 1) {
    options.protected_sets.push_back(spec.protected_features);
  }
  options.fairness_feature = first;
  options.explainer = spec.explainers.front();
  const HybridGridResult grid = RunHybridGrid(spec, options);
  Emit(dir, "grid.json", DumpJson(HybridGridJson(grid)), files);
  Emit(dir, "fairness.json", DumpJson(HybridFairnessJson(grid)), files);
  Emit(dir, "fairness.csv", HybridFairnessCsv(grid), files);
  std::vector<std::string> labels;
  std::vector<RankHistogram> ranks;
  for (const auto& cell : grid.cells) {
    if (cell.error) continue;
    labels.push_back(cell.protected_set + ":" + cell.label);
    ranks.push_back(cell.ranks);
  }
  Emit(dir, "ranks.csv", RankCsv(labels, ranks), files);
  return files;
}

std::vector<std::string> RunCreditRegion(const ExperimentSpec& spec,
                                         const std::filesystem::path& dir) {
  std::vector<std::string> files;
  const RegionStudyResult study = RunRegionStudy(spec);
  std::vector<std::string> labels;
  std::vector<RankHistogram> ranks;
  for (const auto& cell : study.cells) {
    labels.push_back(cell.label);
    ranks.push_back(cell.ranks);
  }
  Emit(dir, "ranks.csv", RankCsv(labels, ranks), files);
  Emit(dir, "region.json", DumpJson(RegionStudyJson(study)), files);
  return files;
}

}  // namespace

std::vector<std::string> AuditNames() {
  return {std::string(kAdmissionSweep), std::string(kDiabetesGrid),
          std::string(kCreditRegion)};
}

ExperimentSpec AuditSpec(const AuditOptions& options) {
  ExperimentSpec spec;
  spec.name = options.experiment;
  spec.seed = options.seed;
  spec.threads = options.threads;
  spec.sample_size = options.sample_size;
  spec.background_size = options.background_size;
  spec.csv_path = options.csv_path;
  spec.schema_path = options.schema_path;
  spec.grid = {{"none", 0.0, AttackSpec::None()}};
  const ExplainerSpec kernel = Explainer(ExplainerMethod::kKernel, Batching::kMegaBatch);
  if (options.experiment == kAdmissionSweep) {
    spec.synth = SynthTemplate::kAdmission;
    spec.n = options.n.value_or(500);
    spec.protected_features = {"Research"};
    spec.grid = AdmissionSweepGrid();
    spec.explainers = {kernel, Explainer(ExplainerMethod::kLinear, Batching::kMegaBatch),
                       Explainer(ExplainerMethod::kExact, Batching::kPerCoalition)};
  } else if (options.experiment == kDiabetesGrid) {
    spec.synth = SynthTemplate::kDiabetes;
    spec.n = options.n.value_or(520);
    spec.model_choice = ModelChoice::kLogistic;
    spec.protected_features = {"Sex", "AgeGroup"};
    spec.threshold = 0.9;
    spec.explainers = {kernel};
  } else if (options.experiment == kCreditRegion) {
    spec.synth = SynthTemplate::kCredit;
    spec.n = options.n.value_or(1000);
    spec.protected_features = {"Gender"};
    spec.explainers = {kernel};
  } else {
    throw InvalidArgument("unknown experiment '" + options.experiment + "'");
  }
  if (spec.csv_path && !spec.schema_path) {
    throw InvalidArgument("--input needs --schema");
  }
  return spec;
}

std::vector<std::string> RunAudit(const AuditOptions& options,
                                  const std::string& out_dir) {
  const ExperimentSpec spec = AuditSpec(options);
  const std::filesystem::path dir(out_dir);
  std::vector<std::string> files;
  if (options.experiment == kAdmissionSweep) {
    files = RunAdmissionSweep(spec, dir);
  } else if (options.experiment == kDiabetesGrid) {
    files = RunDiabetesGrid(spec, dir);
  } else {
    files = RunCreditRegion(spec, dir);
  }
  files.push_back("manifest.json");
  const nlohmann::json manifest = {{"experiment", options.experiment},
                                   {"seed", options.seed},
                                   {"threads", options.threads},
                                   {"spec", spec.ToJson()},
                                   {"files", files}};
  WriteTextFile(dir / "manifest.json", DumpJson(manifest));
  return files;
}

}  // namespace shuffle_audit
