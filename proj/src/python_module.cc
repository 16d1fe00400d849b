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

// Python bindings. Structured arguments and results cross the boundary as
// JSON text; the package __init__ converts them to and from dicts.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "shuffle_audit/attacks.h"
#include "shuffle_audit/error.h"
#include "shuffle_audit/fairness.h"
#include "shuffle_audit/harness.h"
#include "shuffle_audit/model.h"
#include "shuffle_audit/report.h"
#include "shuffle_audit/shapley.h"

namespace py = pybind11;

namespace shuffle_audit {
namespace {

using Json = nlohmann::json;

py::dict SynthDatasetPy(const std::string& name, size_t n, uint64_t seed) {
  const Dataset d = SynthDataset(ParseSynthTemplate(name), n, seed);
  py::dict out;
  out["columns"] = d.column_names();
  out["rows"] = d.rows();
  if (d.has_labels()) {
    out["labels"] = d.labels();
  } else {
    out["labels"] = py::none();
  }
  return out;
}

std::vector<double> AttackScoresPy(const std::vector<double>& scores,
                                   const std::vector<uint8_t>& privileged,
                                   const std::string& spec_json, uint64_t seed,
                                   const std::string& direction) {
  if (scores.size() != privileged.size()) {
    throw InvalidArgument("scores and privileged differ in length");
  }
  const AttackSpec spec = AttackSpec::FromJson(Json::parse(spec_json));
  spec.Validate();
  const SortedView view = PrepareSortedView(scores, privileged, ParseDirection(direction));
  return ApplyAttack(view, spec, seed);
}

BatchScorer MakeScorer(const std::string& model_json,
                       const std::vector<std::string>& columns,
                       const std::string& attack_json,
                       const std::vector<std::string>& protected_features,
                       uint64_t seed, const std::string& direction) {
  const ScoringModel model = ScoringModel::FromJson(Json::parse(model_json));
  if (attack_json.empty()) return MakeBatchScorer(model, columns);
  const AttackSpec spec = AttackSpec::FromJson(Json::parse(attack_json));
  spec.Validate();
  const AdversarialScorer adv(model, protected_features, spec, seed,
                              ParseDirection(direction));
  return adv.Bind(columns);
}

std::vector<double> ScorePy(const std::string& model_json,
                            const std::vector<std::string>& columns, const Matrix& rows,
                            const std::string& attack_json,
                            const std::vector<std::string>& protected_features,
                            uint64_t seed, const std::string& direction) {
  if (static_cast<size_t>(rows.cols()) != columns.size()) {
    throw InvalidArgument("rows must have one column per name");
  }
  return MakeScorer(model_json, columns, attack_json, protected_features, seed,
                    direction)(rows);
}

py::dict ExplainPy(const std::string& model_json, const std::vector<std::string>& columns,
                   const Matrix& rows, const Matrix& background,
                   const std::string& method, const std::string& batching,
                   size_t max_coalitions, const std::string& attack_json,
                   const std::vector<std::string>& protected_features, uint64_t seed,
                   const std::string& direction) {
  if (static_cast<size_t>(rows.cols()) != columns.size() ||
      background.cols() != rows.cols()) {
    throw InvalidArgument("rows and background must have one column per name");
  }
  AttributionMatrix phi;
  const ExplainerMethod m = ParseExplainerMethod(method);
  if (m == ExplainerMethod::kLinear) {
    if (!attack_json.empty()) {
      throw CapabilityError("linear explainer needs white-box access to a linear model");
    }
    const ScoringModel model = ScoringModel::FromJson(Json::parse(model_json));
    phi = LinearShap(model, columns, rows, BackgroundStats::Compute(model, columns, background));
  } else {
    ExplainOptions options;
    options.method = m;
    options.batching = ParseBatching(batching);
    options.max_coalitions = max_coalitions;
    options.seed = seed;
    std::vector<size_t> instances(static_cast<size_t>(rows.rows()));
    for (size_t i = 0; i < instances.size(); ++i) instances[i] = i;
    phi = ExplainInstances(
        MakeScorer(model_json, columns, attack_json, protected_features, seed, direction),
        columns, rows, instances, background, options);
  }
  py::dict out;
  out["phi"] = phi.values;
  out["base"] = phi.base_values;
  out["features"] = phi.feature_names;
  return out;
}

std::string FairnessPy(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                       const std::vector<uint8_t>& privileged) {
  return ToJson(ComputeFairnessMetrics(GroupConfusion(y_true, y_pred, privileged))).dump();
}

std::string FairnessDropPy(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                           const std::vector<int>& y_pred_adv,
                           const std::vector<uint8_t>& privileged) {
  const auto base = ComputeFairnessMetrics(GroupConfusion(y_true, y_pred, privileged));
  const auto adv = ComputeFairnessMetrics(GroupConfusion(y_true, y_pred_adv, privileged));
  return ToJson(FairnessDrop(base, adv)).dump();
}

std::string RunSweepPy(const std::string& spec_json) {
  const ExperimentSpec spec = ExperimentSpec::FromJson(Json::parse(spec_json));
  py::gil_scoped_release release;
  return SweepJson(RunSweep(spec)).dump();
}

std::vector<std::string> RunAuditPy(const std::string& experiment, const std::string& out_dir,
                                    uint64_t seed, std::optional<size_t> n,
                                    size_t sample_size, size_t background_size, int threads) {
  AuditOptions options;
  options.experiment = experiment;
  options.seed = seed;
  options.n = n;
  options.sample_size = sample_size;
  options.background_size = background_size;
  options.threads = threads;
  py::gil_scoped_release release;
  return RunAudit(options, out_dir);
}

}  // namespace
}  // namespace shuffle_audit

PYBIND11_MODULE(_core, m) {
  namespace sa = shuffle_audit;
  m.doc() = "Shuffle attacks on Shapley explanations: native core";
  m.attr("__version__") = SHUFFLE_AUDIT_VERSION;

  static py::exception<sa::Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<sa::SchemaError> schema_error(m, "SchemaError", error.ptr());
  static py::exception<sa::ParseError> parse_error(m, "ParseError", error.ptr());
  static py::exception<sa::InvalidArgument> invalid(m, "InvalidArgument", error.ptr());
  static py::exception<sa::CapabilityError> capability(m, "CapabilityError", error.ptr());
  static py::exception<sa::NumericError> numeric(m, "NumericError", error.ptr());
  static py::exception<sa::IoError> io_error(m, "IoError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const sa::SchemaError& e) {
      py::set_error(schema_error, e.what());
    } catch (const sa::ParseError& e) {
      py::set_error(parse_error, e.what());
    } catch (const sa::InvalidArgument& e) {
      py::set_error(invalid, e.what());
    } catch (const sa::CapabilityError& e) {
      py::set_error(capability, e.what());
    } catch (const sa::NumericError& e) {
      py::set_error(numeric, e.what());
    } catch (const sa::IoError& e) {
      py::set_error(io_error, e.what());
    } catch (const sa::Error& e) {
      py::set_error(error, e.what());
    } catch (const nlohmann::json::exception& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("synth_dataset", &sa::SynthDatasetPy, py::arg("template"), py::arg("n"),
        py::arg("seed") = 0);
  m.def("attack_scores", &sa::AttackScoresPy, py::arg("scores"), py::arg("privileged"),
        py::arg("spec_json"), py::arg("seed") = 0,
        py::arg("direction") = "higher_is_superior");
  m.def("score", &sa::ScorePy, py::arg("model_json"), py::arg("columns"), py::arg("rows"),
        py::arg("attack_json") = "", py::arg("protected") = std::vector<std::string>{},
        py::arg("seed") = 0, py::arg("direction") = "higher_is_superior");
  m.def("explain", &sa::ExplainPy, py::arg("model_json"), py::arg("columns"), py::arg("rows"),
        py::arg("background"), py::arg("method") = "kernel", py::arg("batching") = "mega_batch",
        py::arg("max_coalitions") = 4096, py::arg("attack_json") = "",
        py::arg("protected") = std::vector<std::string>{}, py::arg("seed") = 0,
        py::arg("direction") = "higher_is_superior");
  m.def("kernel_weight", &sa::ShapleyKernelWeight, py::arg("d"), py::arg("s"));
  m.def("fairness_metrics", &sa::FairnessPy, py::arg("y_true"), py::arg("y_pred"),
        py::arg("privileged"));
  m.def("fairness_drop", &sa::FairnessDropPy, py::arg("y_true"), py::arg("y_pred"),
        py::arg("y_pred_adv"), py::arg("privileged"));
  m.def("run_sweep", &sa::RunSweepPy, py::arg("spec_json"));
  m.def("audit_names", &sa::AuditNames);
  m.def("run_audit", &sa::RunAuditPy, py::arg("experiment"), py::arg("out_dir"),
        py::arg("seed") = 0, py::arg("n") = std::nullopt, py::arg("sample_size") = 100,
        py::arg("background_size") = 100, py::arg("threads") = 1);
}
