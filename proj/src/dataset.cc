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

#include "shuffle_audit/dataset.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "shuffle_audit/error.h"
#include "shuffle_audit/text_format.h"

namespace shuffle_audit {
namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

std::optional<double> ParseNumber(std::string_view text) {
  text = Trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  return value;
}

std::optional<int> ParseLabel(std::string_view text) {
  const std::string t = Lower(Trim(text));
  if (t == "1" || t == "1.0" || t == "positive" || t == "yes" || t == "true")
    return 1;
  if (t == "0" || t == "0.0" || t == "negative" || t == "no" || t == "false")
    return 0;
  return std::nullopt;
}

bool SameCategory(std::string_view cell, std::string_view privileged) {
  cell = Trim(cell);
  privileged = Trim(privileged);
  if (cell == privileged) return true;
  const auto a = ParseNumber(cell);
  const auto b = ParseNumber(privileged);
  return a && b && *a == *b;
}

}  // namespace

std::string_view ToString(FeatureRole role) {
  switch (role) {
    case FeatureRole::kScoring:
      return "scoring";
    case FeatureRole::kProtected:
      return "protected";
    case FeatureRole::kLabel:
      return "label";
    case FeatureRole::kId:
      return "id";
  }
  return "scoring";
}

std::string_view ToString(Direction direction) {
  return direction == Direction::kHigherIsSuperior ? "higher_is_superior"
                                                   : "lower_is_superior";
}

FeatureRole ParseFeatureRole(std::string_view text) {
  const std::string t = Lower(text);
  if (t == "scoring") return FeatureRole::kScoring;
  if (t == "protected") return FeatureRole::kProtected;
  if (t == "label") return FeatureRole::kLabel;
  if (t == "id") return FeatureRole::kId;
  throw SchemaError("unknown feature role '" + std::string(text) + "'");
}

Direction ParseDirection(std::string_view text) {
  const std::string t = Lower(text);
  if (t == "higher_is_superior" || t == "higher") {
    return Direction::kHigherIsSuperior;
  }
  if (t == "lower_is_superior" || t == "lower") {
    return Direction::kLowerIsSuperior;
  }
  throw SchemaError("unknown direction '" + std::string(text) + "'");
}

// ---------------------------------------------------------------------------
// FeatureSchema

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> features,
                             Direction direction, std::string privileged_value)
    : features_(std::move(features)),
      direction_(direction),
      privileged_value_(std::move(privileged_value)) {
  std::set<std::string> seen;
  int scoring = 0;
  int labels = 0;
  int ids = 0;
  for (const auto& f : features_) {
    if (f.name.empty()) throw SchemaError("feature with empty name");
    if (!seen.insert(f.name).second) {
      throw SchemaError("duplicate feature '" + f.name + "'");
    }
    scoring += f.role == FeatureRole::kScoring;
    labels += f.role == FeatureRole::kLabel;
    ids += f.role == FeatureRole::kId;
  }
  if (scoring == 0) throw SchemaError("schema has no scoring feature");
  if (labels > 1) throw SchemaError("schema has more than one label column");
  if (ids > 1) throw SchemaError("schema has more than one id column");
}

FeatureSchema FeatureSchema::FromJson(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("features") ||
      !j.at("features").is_array()) {
    throw SchemaError("schema JSON needs a 'features' array");
  }
  std::vector<FeatureSpec> features;
  for (const auto& f : j.at("features")) {
    if (!f.contains("name") || !f.at("name").is_string()) {
      throw SchemaError("schema feature without a 'name'");
    }
    FeatureSpec spec;
    spec.name = f.at("name").get<std::string>();
    spec.role = ParseFeatureRole(f.value("role", std::string("scoring")));
    if (f.contains("privileged_value")) {
      const auto& pv = f.at("privileged_value");
      spec.privileged_value = pv.is_string() ? pv.get<std::string>() : pv.dump();
    }
    features.push_back(std::move(spec));
  }
  const Direction direction =
      ParseDirection(j.value("direction", std::string("higher_is_superior")));
  std::string privileged = "1";
  if (j.contains("privileged_value")) {
    const auto& pv = j.at("privileged_value");
    privileged = pv.is_string() ? pv.get<std::string>() : pv.dump();
  }
  return FeatureSchema(std::move(features), direction, std::move(privileged));
}

FeatureSchema FeatureSchema::FromFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open schema file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("malformed schema JSON in " + path.string() + ": " +
                      e.what());
  }
  return FromJson(j);
}

nlohmann::json FeatureSchema::ToJson() const {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& f : features_) {
    nlohmann::json entry = {{"name", f.name}, {"role", ToString(f.role)}};
    if (f.privileged_value) entry["privileged_value"] = *f.privileged_value;
    features.push_back(std::move(entry));
  }
  return {{"features", std::move(features)},
          {"direction", ToString(direction_)},
          {"privileged_value", privileged_value_}};
}

const std::string& FeatureSchema::PrivilegedValueFor(
    const FeatureSpec& spec) const {
  return spec.privileged_value ? *spec.privileged_value : privileged_value_;
}

std::vector<std::string> FeatureSchema::NamesWithRole(FeatureRole role) const {
  std::vector<std::string> names;
  for (const auto& f : features_) {
    if (f.role == role) names.push_back(f.name);
  }
  return names;
}

std::vector<std::string> FeatureSchema::ColumnNames() const {
  std::vector<std::string> names;
  for (const auto& f : features_) {
    if (f.role == FeatureRole::kScoring || f.role == FeatureRole::kProtected) {
      names.push_back(f.name);
    }
  }
  return names;
}

std::optional<std::string> FeatureSchema::LabelName() const {
  for (const auto& f : features_) {
    if (f.role == FeatureRole::kLabel) return f.name;
  }
  return std::nullopt;
}

std::optional<std::string> FeatureSchema::IdName() const {
  for (const auto& f : features_) {
    if (f.role == FeatureRole::kId) return f.name;
  }
  return std::nullopt;
}

const FeatureSpec* FeatureSchema::Find(std::string_view name) const {
  for (const auto& f : features_) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

FeatureSchema FeatureSchema::WithDirection(Direction direction) const {
  FeatureSchema copy = *this;
  copy.direction_ = direction;
  return copy;
}

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(FeatureSchema schema, Matrix rows,
                 std::optional<std::vector<int>> labels,
                 std::vector<std::string> ids)
    : schema_(std::move(schema)),
      columns_(schema_.ColumnNames()),
      rows_(std::move(rows)),
      labels_(std::move(labels)),
      ids_(std::move(ids)) {
  if (rows_.rows() < 1) throw InvalidArgument("dataset needs at least 1 row");
  if (static_cast<size_t>(rows_.cols()) != columns_.size()) {
    throw InvalidArgument("dataset has " + std::to_string(rows_.cols()) +
                          " columns but the schema declares " +
                          std::to_string(columns_.size()));
  }
  if (!rows_.allFinite()) throw NumericError("dataset contains non-finite values");
  if (labels_) {
    if (labels_->size() != num_rows()) {
      throw InvalidArgument("label vector length does not match row count");
    }
    for (int y : *labels_) {
      if (y != 0 && y != 1) throw InvalidArgument("labels must be 0 or 1");
    }
  }
  if (!ids_.empty() && ids_.size() != num_rows()) {
    throw InvalidArgument("id vector length does not match row count");
  }
}

const std::vector<int>& Dataset::labels() const {
  if (!labels_) throw SchemaError("dataset has no label column");
  return *labels_;
}

size_t Dataset::ColumnIndex(std::string_view name) const {
  const auto it = std::find(columns_.begin(), columns_.end(), name);
  if (it == columns_.end()) {
    throw SchemaError("dataset has no column '" + std::string(name) + "'");
  }
  return static_cast<size_t>(it - columns_.begin());
}

std::vector<size_t> Dataset::ColumnIndices(
    std::span<const std::string> names) const {
  std::vector<size_t> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(ColumnIndex(n));
  return out;
}

std::vector<size_t> Dataset::ScoringColumns() const {
  const auto names = schema_.NamesWithRole(FeatureRole::kScoring);
  return ColumnIndices(names);
}

std::vector<size_t> Dataset::ProtectedColumns() const {
  const auto names = schema_.NamesWithRole(FeatureRole::kProtected);
  return ColumnIndices(names);
}

std::vector<double> Dataset::Column(size_t index) const {
  std::vector<double> out(num_rows());
  for (size_t i = 0; i < out.size(); ++i) out[i] = rows_(i, index);
  return out;
}

Dataset Dataset::Subset(std::span<const size_t> row_indices) const {
  Matrix sub(row_indices.size(), rows_.cols());
  std::optional<std::vector<int>> labels;
  if (labels_) labels.emplace();
  std::vector<std::string> ids;
  for (size_t k = 0; k < row_indices.size(); ++k) {
    const size_t r = row_indices[k];
    if (r >= num_rows()) throw InvalidArgument("row index out of range");
    sub.row(k) = rows_.row(r);
    if (labels) labels->push_back((*labels_)[r]);
    if (!ids_.empty()) ids.push_back(ids_[r]);
  }
  return Dataset(schema_, std::move(sub), std::move(labels), std::move(ids));
}

Dataset Dataset::WithRows(Matrix rows) const {
  if (rows.rows() != rows_.rows() || rows.cols() != rows_.cols()) {
    throw InvalidArgument("WithRows: shape mismatch");
  }
  return Dataset(schema_, std::move(rows), labels_, ids_);
}

std::vector<uint8_t> PrivilegedMask(const Matrix& rows,
                                    std::span<const size_t> protected_columns) {
  std::vector<uint8_t> mask(static_cast<size_t>(rows.rows()), 0);
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    bool privileged = !protected_columns.empty();
    for (size_t c : protected_columns) {
      privileged = privileged && rows(i, static_cast<Eigen::Index>(c)) ==
                                     kPrivilegedCode;
    }
    mask[static_cast<size_t>(i)] = privileged ? 1 : 0;
  }
  return mask;
}

// ---------------------------------------------------------------------------
// CSV

std::vector<std::vector<std::string>> ParseCsvRecords(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  // Skip a UTF-8 byte-order mark.
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  auto end_record = [&] {
    if (field_started || !record.empty() || !field.empty()) {
      record.push_back(std::move(field));
      records.push_back(std::move(record));
    }
    record.clear();
    field.clear();
    field_started = false;
  };
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field", -1);
  end_record();
  return records;
}

Dataset ParseCsv(std::string_view text, const FeatureSchema& schema) {
  const auto records = ParseCsvRecords(text);
  if (records.empty()) throw SchemaError("CSV has no header row");
  const auto& header = records.front();
  std::map<std::string, size_t, std::less<>> header_index;
  for (size_t c = 0; c < header.size(); ++c) {
    header_index.emplace(std::string(Trim(header[c])), c);
  }
  auto locate = [&](const std::string& name) {
    const auto it = header_index.find(name);
    if (it == header_index.end()) {
      throw SchemaError("CSV is missing declared column '" + name + "'");
    }
    return it->second;
  };
  for (const auto& f : schema.features()) locate(f.name);

  const size_t n = records.size() - 1;
  if (n == 0) throw InvalidArgument("CSV has no data rows");
  const auto columns = schema.ColumnNames();
  Matrix rows(n, columns.size());
  std::optional<std::vector<int>> labels;
  if (schema.LabelName()) labels.emplace(n);
  std::vector<std::string> ids;

  for (size_t col = 0; col < columns.size(); ++col) {
    const FeatureSpec& spec = *schema.Find(columns[col]);
    const size_t src = locate(spec.name);
    // Category dictionary for protected columns: privileged -> 1, others get
    // 0, 2, 3, ... by first appearance.
    std::map<std::string, int, std::less<>> codes;
    int next_code = 0;
    for (size_t r = 0; r < n; ++r) {
      const auto& rec = records[r + 1];
      if (src >= rec.size()) {
        throw ParseError("row has too few fields for column '" + spec.name + "'",
                         static_cast<long>(r));
      }
      const std::string_view cell = rec[src];
      if (spec.role == FeatureRole::kScoring) {
        const auto value = ParseNumber(cell);
        if (!value || !std::isfinite(*value)) {
          throw ParseError("non-numeric value '" + std::string(cell) +
                               "' in scoring column '" + spec.name + "'",
                           static_cast<long>(r));
        }
        rows(r, col) = *value;
      } else {
        if (SameCategory(cell, schema.PrivilegedValueFor(spec))) {
          rows(r, col) = kPrivilegedCode;
          continue;
        }
        const std::string key(Trim(cell));
        auto it = codes.find(key);
        if (it == codes.end()) {
          it = codes.emplace(key, next_code).first;
          next_code += next_code == 0 ? 2 : 1;
        }
        rows(r, col) = it->second;
      }
    }
  }
  if (labels) {
    const size_t src = locate(*schema.LabelName());
    for (size_t r = 0; r < n; ++r) {
      const auto& rec = records[r + 1];
      const auto y = src < rec.size() ? ParseLabel(rec[src]) : std::nullopt;
      if (!y) {
        throw ParseError("label is not binary in column '" +
                             *schema.LabelName() + "'",
                         static_cast<long>(r));
      }
      (*labels)[r] = *y;
    }
  }
  if (const auto id_name = schema.IdName()) {
    const size_t src = locate(*id_name);
    for (size_t r = 0; r < n; ++r) {
      const auto& rec = records[r + 1];
      ids.emplace_back(src < rec.size() ? std::string(Trim(rec[src])) : "");
    }
  }
  return Dataset(schema, std::move(rows), std::move(labels), std::move(ids));
}

Dataset LoadCsv(const std::filesystem::path& path, const FeatureSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open CSV file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseCsv(buffer.str(), schema);
}

void WriteCsv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const auto& schema = dataset.schema();
  std::vector<std::string> header;
  for (const auto& f : schema.features()) {
    if (f.role == FeatureRole::kId && dataset.ids().empty()) continue;
    header.push_back(f.name);
  }
  out << JoinCsv(header) << '\n';
  for (size_t r = 0; r < dataset.num_rows(); ++r) {
    std::vector<std::string> fields;
    for (const auto& f : schema.features()) {
      switch (f.role) {
        case FeatureRole::kId:
          if (!dataset.ids().empty()) fields.push_back(dataset.ids()[r]);
          break;
        case FeatureRole::kLabel:
          fields.push_back(std::to_string(dataset.labels()[r]));
          break;
        default:
          fields.push_back(FormatDouble(dataset.rows()(
              static_cast<Eigen::Index>(r),
              static_cast<Eigen::Index>(dataset.ColumnIndex(f.name)))));
      }
    }
    out << JoinCsv(fields) << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

// ---------------------------------------------------------------------------

Dataset MinMaxNormalize(const Dataset& dataset) {
  Matrix rows = dataset.rows();
  for (size_t c : dataset.ScoringColumns()) {
    auto col = rows.col(static_cast<Eigen::Index>(c));
    const double lo = col.minCoeff();
    const double hi = col.maxCoeff();
    if (hi > lo) {
      col = (col.array() - lo) / (hi - lo);
    } else {
      col.setZero();
    }
  }
  return dataset.WithRows(std::move(rows));
}

}  // namespace shuffle_audit
