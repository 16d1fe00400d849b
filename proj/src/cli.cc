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

#include "shuffle_audit/cli.h"

#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "shuffle_audit/attacks.h"
#include "shuffle_audit/dataset.h"
#include "shuffle_audit/error.h"
#include "shuffle_audit/fairness.h"
#include "shuffle_audit/harness.h"
#include "shuffle_audit/model.h"
#include "shuffle_audit/random.h"
#include "shuffle_audit/report.h"
#include "shuffle_audit/shapley.h"
#include "shuffle_audit/text_format.h"

#ifndef SHUFFLE_AUDIT_VERSION
#define SHUFFLE_AUDIT_VERSION "dev"
#endif

namespace shuffle_audit {
namespace {

namespace fs = std::filesystem;

struct DataFlags {
  std::string input;
  std::string schema;
  std::string model = "equal";
  bool normalize = false;
  std::vector<std::string> protected_features;
};

struct AttackFlags {
  std::string attack = "none";
  std::optional<double> param;
  std::string coin_variant = "literal";
  bool single_step = false;
  double region = 1.0;
  double frequency = 1.0;
  std::optional<size_t> max_count;
  std::string hybrid_top;
  std::string hybrid_bottom;
};

void AddDataFlags(CLI::App* cmd, DataFlags& f) {
  cmd->add_option("--input", f.input, "Input CSV")->required();
  cmd->add_option("--schema", f.schema, "Schema JSON")->required();
  cmd->add_option("--model", f.model,
                  "'equal' (equal weights), 'logistic' (fit on labels) or a "
                  "model JSON path");
  cmd->add_flag("--normalize", f.normalize, "Min-max normalize scoring columns");
  cmd->add_option("--protected", f.protected_features,
                  "Protected features the attack reads (default: all)");
}

void AddAttackFlags(CLI::App* cmd, AttackFlags& f) {
  cmd->add_option("--attack", f.attack, "none|dominance|mixing|swapping");
  cmd->add_option("--param", f.param,
                  "Mixing head probability or swapping start quantile");
  cmd->add_option("--coin-variant", f.coin_variant, "literal|bernoulli");
  cmd->add_flag("--single-step", f.single_step, "Swapping: one swap per pair per pass");
  cmd->add_option("--region", f.region, "Attacked top fraction of the batch");
  cmd->add_option("--frequency", f.frequency, "Success probability per action");
  cmd->add_option("--max-count", f.max_count, "Cap on executed actions");
  cmd->add_option("--hybrid-top", f.hybrid_top, "Attack on the top half");
  cmd->add_option("--hybrid-bottom", f.hybrid_bottom, "Attack on the bottom half");
}

AttackStep BuildStep(const std::string& kind_text, const AttackFlags& f) {
  AttackStep step;
  step.kind = ParseAttackKind(kind_text);
  step.coin_variant = ParseCoinVariant(f.coin_variant);
  step.single_step = f.single_step;
  if (f.param) {
    if (step.kind == AttackKind::kMixing) step.head_prob = *f.param;
    if (step.kind == AttackKind::kSwapping) step.quantile = *f.param;
  }
  step.modifiers.region = f.region;
  step.modifiers.frequency = f.frequency;
  step.modifiers.max_count = f.max_count;
  return step;
}

AttackSpec BuildAttack(const AttackFlags& f) {
  AttackSpec spec;
  if (!f.hybrid_top.empty() || !f.hybrid_bottom.empty()) {
    spec = AttackSpec::Hybrid(BuildStep(f.hybrid_top.empty() ? "none" : f.hybrid_top, f),
                              BuildStep(f.hybrid_bottom.empty() ? "none" : f.hybrid_bottom, f));
  } else {
    spec.step = BuildStep(f.attack, f);
  }
  spec.Validate();
  return spec;
}

Dataset LoadData(const DataFlags& f) {
  Dataset data = LoadCsv(f.input, FeatureSchema::FromFile(f.schema));
  return f.normalize ? MinMaxNormalize(data) : data;
}

ScoringModel LoadModel(const DataFlags& f, const Dataset& data, uint64_t seed) {
  if (f.model == "equal") {
    return ScoringModel::EqualWeights(data.schema().NamesWithRole(FeatureRole::kScoring));
  }
  if (f.model == "logistic") {
    LogisticHyper hyper;
    hyper.seed = seed;
    return FitLogistic(data, 1.0, hyper).model;
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ReadTextFile(f.model));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("model JSON: ") + e.what(), -1);
  }
  return ScoringModel::FromJson(j);
}

std::vector<std::string> ProtectedOf(const DataFlags& f, const Dataset& data) {
  if (!f.protected_features.empty()) return f.protected_features;
  return data.schema().NamesWithRole(FeatureRole::kProtected);
}

std::vector<std::string> RowIds(const Dataset& data) {
  if (!data.ids().empty()) return data.ids();
  std::vector<std::string> ids(data.num_rows());
  for (size_t i = 0; i < ids.size(); ++i) ids[i] = std::to_string(i);
  return ids;
}

fs::path ParentDir(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  return parent.empty() ? fs::path(".") : parent;
}

void WriteManifest(const fs::path& dir, const std::string& command,
                   const std::vector<std::string>& args, uint64_t seed,
                   const CLI::App& app, const std::vector<std::string>& outputs) {
  const nlohmann::json manifest = {{"command", command},
                                   {"argv", args},
                                   {"seed", seed},
                                   {"version", SHUFFLE_AUDIT_VERSION},
                                   {"config", app.config_to_str(true, false)},
                                   {"outputs", outputs}};
  WriteTextFile(dir / "manifest.json", DumpJson(manifest));
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Audit explanation robustness against score-shuffling attacks",
               "shuffle-audit"};
  app.set_config("--config", "", "INI/TOML config; flags override it");
  app.require_subcommand(1, 1);
  app.failure_message(CLI::FailureMessage::help);
  app.set_version_flag("--version", SHUFFLE_AUDIT_VERSION);

  uint64_t seed = 0;
  const auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Global seed (default 0)");
  };

  // attack
  DataFlags attack_data;
  AttackFlags attack_flags;
  std::string attack_out;
  CLI::App* attack_cmd = app.add_subcommand("attack", "Apply f' to a CSV and emit scores");
  AddDataFlags(attack_cmd, attack_data);
  AddAttackFlags(attack_cmd, attack_flags);
  attack_cmd->add_option("--out", attack_out, "Output CSV (id,f,f_adv)")->required();
  add_seed(attack_cmd);

  // explain
  DataFlags explain_data;
  AttackFlags explain_attack;
  std::string method = "kernel";
  std::string batching;
  size_t max_coalitions = 4096;
  size_t instances = 100;
  size_t background_size = 100;
  int threads = 1;
  std::string explain_out;
  CLI::App* explain_cmd = app.add_subcommand("explain", "Explain instances of f or f'");
  AddDataFlags(explain_cmd, explain_data);
  AddAttackFlags(explain_cmd, explain_attack);
  explain_cmd->add_option("--method", method, "exact|linear|kernel");
  explain_cmd->add_option("--batching", batching, "per_coalition|mega_batch");
  explain_cmd->add_option("--max-coalitions", max_coalitions, "Kernel coalition budget");
  explain_cmd->add_option("--instances", instances, "Explain the first k rows");
  explain_cmd->add_option("--background-size", background_size, "Background rows");
  explain_cmd->add_option("--threads", threads, "Worker threads");
  explain_cmd->add_option("--out", explain_out, "Output CSV or .json")->required();
  add_seed(explain_cmd);

  // fairness
  DataFlags fair_data;
  AttackFlags fair_attack;
  double threshold = 0.9;
  std::string group;
  std::string fair_out;
  CLI::App* fair_cmd = app.add_subcommand("fairness", "Fairness metrics of f and f' and their drops");
  AddDataFlags(fair_cmd, fair_data);
  AddAttackFlags(fair_cmd, fair_attack);
  fair_cmd->add_option("--threshold", threshold, "Positive-decision threshold");
  fair_cmd->add_option("--group", group, "Protected feature defining groups");
  fair_cmd->add_option("--out", fair_out, "Output JSON")->required();
  add_seed(fair_cmd);

  // audit
  AuditOptions audit;
  std::string audit_input;
  std::string audit_schema;
  size_t audit_n = 0;
  std::string out_dir;
  CLI::App* audit_cmd = app.add_subcommand("audit", "Run a named experiment");
  audit_cmd->add_option("--experiment", audit.experiment, "admission-sweep|diabetes-grid|credit-region")
      ->required()
      ->check(CLI::IsMember(AuditNames()));
  audit_cmd->add_option("--input", audit_input, "CSV replacing the synthetic data");
  audit_cmd->add_option("--schema", audit_schema, "Schema for --input");
  audit_cmd->add_option("--n", audit_n, "Synthetic row count");
  audit_cmd->add_option("--sample-size", audit.sample_size, "Explained instances");
  audit_cmd->add_option("--background-size", audit.background_size, "Background rows");
  audit_cmd->add_option("--threads", audit.threads, "Worker threads");
  audit_cmd->add_option("--out-dir", out_dir, "Output directory")->required();
  add_seed(audit_cmd);

  // sweep
  std::string spec_path;
  std::string sweep_dir;
  int sweep_threads = 0;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run a custom experiment grid");
  sweep_cmd->add_option("--spec", spec_path, "Experiment spec JSON")->required();
  sweep_cmd->add_option("--out-dir", sweep_dir, "Output directory")->required();
  sweep_cmd->add_option("--threads", sweep_threads, "Worker threads");
  add_seed(sweep_cmd);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (attack_cmd->parsed()) {
      const Dataset data = LoadData(attack_data);
      const ScoringModel model = LoadModel(attack_data, data, seed);
      const AdversarialScorer scorer(model, ProtectedOf(attack_data, data),
                                     BuildAttack(attack_flags), seed,
                                     data.schema().direction());
      const auto y = ScoreBatch(model, data);
      const auto y_adv = AdversarialScore(scorer, data);
      const auto ids = RowIds(data);
      std::string csv = "id,f,f_adv\n";
      for (size_t i = 0; i < y.size(); ++i) {
        const std::array<std::string, 3> fields = {ids[i], FormatDouble(y[i]),
                                                   FormatDouble(y_adv[i])};
        csv += JoinCsv(fields) + "\n";
      }
      WriteTextFile(attack_out, csv);
      WriteManifest(ParentDir(attack_out), "attack", args, seed, app, {attack_out});
    } else if (explain_cmd->parsed()) {
      const Dataset data = LoadData(explain_data);
      ScoringModel model = LoadModel(explain_data, data, seed);
      std::vector<size_t> all(data.num_rows());
      std::iota(all.begin(), all.end(), size_t{0});
      CounterStream stream(DeriveSeed(seed, "background"));
      const auto perm = RandomPermutation(all.size(), stream);
      Matrix background(static_cast<Eigen::Index>(std::min(background_size, perm.size())),
                        data.rows().cols());
      for (Eigen::Index k = 0; k < background.rows(); ++k) {
        background.row(k) = data.rows().row(static_cast<Eigen::Index>(perm[static_cast<size_t>(k)]));
      }
      std::vector<size_t> sample(all.begin(),
                                 all.begin() + static_cast<long>(std::min(instances, all.size())));
      PreparedExperiment prepared{data, std::move(model), TrainTestSplit{all, all},
                                  std::move(background), std::move(sample),
                                  ProtectedOf(explain_data, data)};
      ExplainerSpec explainer;
      explainer.method = ParseExplainerMethod(method);
      explainer.batching = ParseBatching(
          !batching.empty() ? batching
          : explainer.method == ExplainerMethod::kExact ? "per_coalition"
                                                        : "mega_batch");
      explainer.max_coalitions = max_coalitions;
      const AttributionMatrix phi =
          ExplainCell(prepared, BuildAttack(explain_attack), explainer, seed, threads);
      std::vector<std::string> ids;
      const auto all_ids = RowIds(data);
      for (size_t i : phi.instances) ids.push_back(all_ids[i]);
      if (fs::path(explain_out).extension() == ".json") {
        WriteTextFile(explain_out,
                      DumpJson(AttributionJson(phi, {{"method", method}, {"seed", seed}})));
      } else {
        WriteTextFile(explain_out, AttributionCsv(phi, ids));
      }
      WriteManifest(ParentDir(explain_out), "explain", args, seed, app, {explain_out});
    } else if (fair_cmd->parsed()) {
      const Dataset data = LoadData(fair_data);
      const ScoringModel model = LoadModel(fair_data, data, seed);
      const auto protected_features = ProtectedOf(fair_data, data);
      if (protected_features.empty()) throw SchemaError("no protected feature");
      const std::string group_feature = group.empty() ? protected_features.front() : group;
      const AdversarialScorer scorer(model, protected_features, BuildAttack(fair_attack),
                                     seed, data.schema().direction());
      const Direction direction = data.schema().direction();
      const auto y = ScoreBatch(model, data);
      const auto y_adv = AdversarialScore(scorer, data);
      const std::array<size_t, 1> cols = {data.ColumnIndex(group_feature)};
      const auto groups = PrivilegedMask(data.rows(), cols);
      const std::vector<int> no_labels;
      const std::span<const int> labels =
          data.has_labels() ? std::span<const int>(data.labels()) : std::span<const int>(no_labels);
      const auto base = ComputeFairnessMetrics(
          GroupConfusion(labels, ThresholdClassify(y, threshold, direction), groups));
      const auto adv = ComputeFairnessMetrics(
          GroupConfusion(labels, ThresholdClassify(y_adv, threshold, direction), groups));
      const auto drops = FairnessDrop(base, adv);
      const nlohmann::json report = {{"group_feature", group_feature},
                                     {"threshold", threshold},
                                     {"base", ToJson(base)},
                                     {"adversarial", ToJson(adv)},
                                     {"drops", ToJson(drops)},
                                     {"tolerance", kDefaultDropTolerance},
                                     {"exceeds_tolerance", drops.AnyExceeds(kDefaultDropTolerance)}};
      WriteTextFile(fair_out, DumpJson(report));
      WriteManifest(ParentDir(fair_out), "fairness", args, seed, app, {fair_out});
    } else if (audit_cmd->parsed()) {
      audit.seed = seed;
      if (!audit_input.empty()) audit.csv_path = audit_input;
      if (!audit_schema.empty()) audit.schema_path = audit_schema;
      if (audit_n > 0) audit.n = audit_n;
      const auto files = RunAudit(audit, out_dir);
      for (const auto& f : files) out << (fs::path(out_dir) / f).string() << "\n";
    } else if (sweep_cmd->parsed()) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(ReadTextFile(spec_path));
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("spec JSON: ") + e.what(), -1);
      }
      ExperimentSpec spec = ExperimentSpec::FromJson(j);
      if (sweep_cmd->count("--seed") > 0) spec.seed = seed;
      if (sweep_threads > 0) spec.threads = sweep_threads;
      const SweepResult result = RunSweep(spec);
      const fs::path dir(sweep_dir);
      EmitSweep(result, ReportFormat::kCsv, dir / "sweep.csv");
      EmitSweep(result, ReportFormat::kJson, dir / "sweep.json");
      EmitSweep(result, ReportFormat::kSvg, dir / "sweep.svg");
      const nlohmann::json manifest = {{"command", "sweep"},
                                       {"argv", args},
                                       {"seed", spec.seed},
                                       {"version", SHUFFLE_AUDIT_VERSION},
                                       {"spec", spec.ToJson()},
                                       {"outputs", {"sweep.csv", "sweep.json", "sweep.svg"}}};
      WriteTextFile(dir / "manifest.json", DumpJson(manifest));
      for (const auto& e : result.errors) {
        err << "warning: cell " << e.cell << " / " << e.explainer << ": " << e.message << "\n";
      }
    }
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CapabilityError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

int RunCli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return RunCli(args, std::cout, std::cerr);
}

}  // namespace shuffle_audit
