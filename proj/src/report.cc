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

#include "shuffle_audit/report.h"

#include <algorithm>
#include <map>
#include <sstream>

#include "shuffle_audit/error.h"
#include "shuffle_audit/text_format.h"

namespace shuffle_audit {
namespace {

constexpr std::array<const char*, 8> kPalette = {
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string OptionalCell(const std::optional<double>& v) {
  return v ? FormatDouble(*v) : std::string();
}

std::string XmlEscape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string Fixed(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << v;
  return os.str();
}

nlohmann::json RankJson(const RankHistogram& h) {
  nlohmann::json out = nlohmann::json::object();
  for (size_t f = 0; f < h.features.size(); ++f) {
    out[h.features[f]] = {h.shares[f][0], h.shares[f][1], h.shares[f][2],
                          h.shares[f][3]};
  }
  return out;
}

nlohmann::json NamedValues(const std::vector<std::string>& names,
                           const std::vector<double>& values) {
  nlohmann::json out = nlohmann::json::object();
  for (size_t j = 0; j < names.size() && j < values.size(); ++j) {
    out[names[j]] = values[j];
  }
  return out;
}

}  // namespace

ReportFormat ParseReportFormat(std::string_view text) {
  if (text == "csv") return ReportFormat::kCsv;
  if (text == "json") return ReportFormat::kJson;
  if (text == "svg") return ReportFormat::kSvg;
  throw InvalidArgument("unknown report format '" + std::string(text) + "'");
}

std::string SweepCsv(const SweepResult& result) {
  std::string out = "attack,param,explainer,feature,mean_abs_phi\n";
  for (const auto& r : result.rows) {
    const std::array<std::string, 5> fields = {r.attack, FormatDouble(r.param),
                                               r.explainer, r.feature,
                                               FormatDouble(r.mean_abs_phi)};
    out += JoinCsv(fields) + "\n";
  }
  return out;
}

nlohmann::json SweepJson(const SweepResult& result) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : result.rows) {
    rows.push_back({{"attack", r.attack},
                    {"param", r.param},
                    {"explainer", r.explainer},
                    {"feature", r.feature},
                    {"mean_abs_phi", r.mean_abs_phi}});
  }
  nlohmann::json errors = nlohmann::json::array();
  for (const auto& e : result.errors) {
    errors.push_back({{"cell", e.cell}, {"explainer", e.explainer}, {"message", e.message}});
  }
  return {{"rows", rows}, {"errors", errors}};
}

std::string SweepSvg(const SweepResult& result) {
  // panel -> feature -> (param, value)
  using Series = std::map<std::string, std::vector<std::pair<double, double>>>;
  std::map<std::pair<std::string, std::string>, Series> panels;
  double y_max = 0.0;
  for (const auto& r : result.rows) {
    if (r.attack != "swapping" && r.attack != "mixing") continue;
    panels[{r.explainer, r.attack}][r.feature].emplace_back(r.param, r.mean_abs_phi);
    y_max = std::max(y_max, r.mean_abs_phi);
  }
  if (y_max <= 0.0) y_max = 1.0;

  constexpr double kW = 320, kH = 220, kPad = 40;
  const size_t count = std::max<size_t>(panels.size(), 1);
  const size_t cols = 2;
  const size_t rows = (count + cols - 1) / cols;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Fixed(kW * cols)
      << "\" height=\"" << Fixed(kH * static_cast<double>(rows)) << "\">\n";
  size_t index = 0;
  for (const auto& [key, series] : panels) {
    const double ox = kW * static_cast<double>(index % cols);
    const double oy = kH * static_cast<double>(index / cols);
    ++index;
    double x_lo = 1e300, x_hi = -1e300;
    for (const auto& [name, pts] : series) {
      for (const auto& [x, y] : pts) {
        x_lo = std::min(x_lo, x);
        x_hi = std::max(x_hi, x);
      }
    }
    if (x_hi <= x_lo) x_hi = x_lo + 1.0;
    const auto px = [&](double x) {
      return ox + kPad + (x - x_lo) / (x_hi - x_lo) * (kW - 2 * kPad);
    };
    const auto py = [&](double y) { return oy + kH - kPad - y / y_max * (kH - 2 * kPad); };
    svg << "<text x=\"" << Fixed(ox + kPad) << "\" y=\"" << Fixed(oy + 20)
        << "\" font-size=\"12\">" << XmlEscape(key.first + " / " + key.second)
        << "</text>\n";
    svg << "<rect x=\"" << Fixed(ox + kPad) << "\" y=\"" << Fixed(oy + kPad)
        << "\" width=\"" << Fixed(kW - 2 * kPad) << "\" height=\""
        << Fixed(kH - 2 * kPad) << "\" fill=\"none\" stroke=\"#999\"/>\n";
    size_t colour = 0;
    for (const auto& [name, pts] : series) {
      auto sorted = pts;
      std::sort(sorted.begin(), sorted.end());
      const char* stroke = kPalette[colour % kPalette.size()];
      svg << "<polyline fill=\"none\" stroke=\"" << stroke << "\" points=\"";
      for (const auto& [x, y] : sorted) svg << Fixed(px(x)) << "," << Fixed(py(y)) << " ";
      svg << "\"/>\n";
      svg << "<text x=\"" << Fixed(ox + kW - kPad + 2) << "\" y=\""
          << Fixed(oy + kPad + 12.0 * static_cast<double>(colour)) << "\" font-size=\"9\" fill=\""
          << stroke << "\">" << XmlEscape(name) << "</text>\n";
      ++colour;
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

nlohmann::json HybridGridJson(const HybridGridResult& result) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : result.cells) {
    nlohmann::json cell = {{"protected_set", c.protected_set},
                           {"top", ToString(c.top)},
                           {"bottom", ToString(c.bottom)},
                           {"label", c.label}};
    if (c.error) {
      cell["error"] = *c.error;
    } else {
      cell["mean_abs_phi"] = NamedValues(result.features, c.mean_abs_phi);
      cell["ranks"] = RankJson(c.ranks);
    }
    cells.push_back(std::move(cell));
  }
  return {{"features", result.features}, {"cells", cells}};
}

nlohmann::json HybridFairnessJson(const HybridGridResult& result) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : result.cells) {
    nlohmann::json cell = {{"protected_set", c.protected_set}, {"label", c.label}};
    if (c.error) {
      cell["error"] = *c.error;
    } else {
      cell["base"] = ToJson(c.base_report);
      cell["adversarial"] = ToJson(c.adversarial_report);
      cell["drops"] = ToJson(c.drops);
      cell["exceeds_tolerance"] = c.drops.AnyExceeds(kDefaultDropTolerance);
    }
    cells.push_back(std::move(cell));
  }
  return {{"group_feature", result.fairness_feature},
          {"tolerance", kDefaultDropTolerance},
          {"cells", cells}};
}

std::string HybridFairnessCsv(const HybridGridResult& result) {
  std::string out = "protected_set,attack,spd_drop,eod_drop,aod_drop,di_drop,theil_drop\n";
  for (const auto& c : result.cells) {
    if (c.error) continue;
    const std::array<std::string, 7> fields = {
        c.protected_set,          c.label,
        OptionalCell(c.drops.spd), OptionalCell(c.drops.eod),
        OptionalCell(c.drops.aod), OptionalCell(c.drops.di),
        OptionalCell(c.drops.theil)};
    out += JoinCsv(fields) + "\n";
  }
  return out;
}

std::string RankCsv(const std::vector<std::string>& cells,
                    const std::vector<RankHistogram>& histograms) {
  if (cells.size() != histograms.size()) {
    throw InvalidArgument("rank table labels and histograms differ in length");
  }
  std::string out = "cell,feature,top1,top2,top3,top4_plus\n";
  for (size_t k = 0; k < cells.size(); ++k) {
    const auto& h = histograms[k];
    for (size_t f = 0; f < h.features.size(); ++f) {
      const std::array<std::string, 6> fields = {
          cells[k], h.features[f], FormatDouble(h.shares[f][0]),
          FormatDouble(h.shares[f][1]), FormatDouble(h.shares[f][2]),
          FormatDouble(h.shares[f][3])};
      out += JoinCsv(fields) + "\n";
    }
  }
  return out;
}

nlohmann::json RegionStudyJson(const RegionStudyResult& result) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : result.cells) {
    cells.push_back({{"label", c.label},
                     {"region", c.region},
                     {"mean_abs_phi", NamedValues(result.features, c.mean_abs_phi)},
                     {"ranks", RankJson(c.ranks)}});
  }
  return {{"features", result.features}, {"cells", cells}};
}

std::string SlopeSvg(std::span<const double> before, std::span<const double> after,
                     std::span<const uint8_t> privileged, const std::string& title) {
  if (before.size() != after.size() || before.size() != privileged.size()) {
    throw InvalidArgument("slope chart inputs differ in length");
  }
  double lo = 1e300, hi = -1e300;
  for (size_t i = 0; i < before.size(); ++i) {
    lo = std::min({lo, before[i], after[i]});
    hi = std::max({hi, before[i], after[i]});
  }
  if (before.empty() || hi <= lo) {
    lo = 0.0;
    hi = 1.0;
  }
  constexpr double kW = 300, kH = 400, kPad = 40;
  const auto py = [&](double y) { return kH - kPad - (y - lo) / (hi - lo) * (kH - 2 * kPad); };
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Fixed(kW)
      << "\" height=\"" << Fixed(kH) << "\">\n";
  svg << "<text x=\"" << Fixed(kPad) << "\" y=\"20\" font-size=\"12\">"
      << XmlEscape(title) << "</text>\n";
  svg << "<text x=\"" << Fixed(kPad) << "\" y=\"" << Fixed(kH - 10)
      << "\" font-size=\"10\">f</text>\n";
  svg << "<text x=\"" << Fixed(kW - kPad) << "\" y=\"" << Fixed(kH - 10)
      << "\" font-size=\"10\">f'</text>\n";
  for (size_t i = 0; i < before.size(); ++i) {
    svg << "<line x1=\"" << Fixed(kPad) << "\" y1=\"" << Fixed(py(before[i]))
        << "\" x2=\"" << Fixed(kW - kPad) << "\" y2=\"" << Fixed(py(after[i]))
        << "\" stroke=\"" << (privileged[i] ? kPalette[0] : kPalette[1])
        << "\" stroke-opacity=\"0.3\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void EmitSweep(const SweepResult& result, ReportFormat format,
               const std::filesystem::path& path) {
  if (result.rows.empty()) throw InvalidArgument("sweep produced no rows");
  switch (format) {
    case ReportFormat::kCsv:
      WriteTextFile(path, SweepCsv(result));
      break;
    case ReportFormat::kJson:
      WriteTextFile(path, DumpJson(SweepJson(result)));
      break;
    case ReportFormat::kSvg:
      WriteTextFile(path, SweepSvg(result));
      break;
  }
}

std::string DumpJson(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace shuffle_audit
