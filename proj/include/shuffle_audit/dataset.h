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

// Tabular datasets with a role-annotated schema.
//
// A Dataset stores an N x d row-major matrix whose columns are the scoring
// and protected features of its schema, in schema order. Label and id
// columns live outside the matrix: labels as a 0/1 vector, ids as strings.
//
// Protected columns are integer-coded. The schema's privileged value maps to
// code 1; every other category gets 0, 2, 3, ... in order of first
// appearance. Attacks consume the binary view "code == 1".

#ifndef SHUFFLE_AUDIT_DATASET_H_
#define SHUFFLE_AUDIT_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

namespace shuffle_audit {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kPrivilegedCode = 1.0;

enum class FeatureRole { kScoring, kProtected, kLabel, kId };

enum class Direction { kHigherIsSuperior, kLowerIsSuperior };

std::string_view ToString(FeatureRole role);
std::string_view ToString(Direction direction);
FeatureRole ParseFeatureRole(std::string_view text);
Direction ParseDirection(std::string_view text);

struct FeatureSpec {
  std::string name;
  FeatureRole role = FeatureRole::kScoring;
  // Overrides the schema-level privileged value for this protected feature.
  std::optional<std::string> privileged_value;
};

class FeatureSchema {
 public:
  // Throws SchemaError when the invariants do not hold: at least one scoring
  // feature, unique names, at most one label column.
  FeatureSchema(std::vector<FeatureSpec> features, Direction direction,
                std::string privileged_value = "1");

  // JSON layout:
  //   {"features": [{"name": "GRE", "role": "scoring"}, ...],
  //    "direction": "higher_is_superior",
  //    "privileged_value": "1"}
  static FeatureSchema FromJson(const nlohmann::json& j);
  static FeatureSchema FromFile(const std::filesystem::path& path);
  nlohmann::json ToJson() const;

  const std::vector<FeatureSpec>& features() const { return features_; }
  Direction direction() const { return direction_; }
  const std::string& privileged_value() const { return privileged_value_; }
  const std::string& PrivilegedValueFor(const FeatureSpec& spec) const;

  std::vector<std::string> NamesWithRole(FeatureRole role) const;
  // Scoring and protected feature names in schema order; these are the
  // Dataset matrix columns.
  std::vector<std::string> ColumnNames() const;
  std::optional<std::string> LabelName() const;
  std::optional<std::string> IdName() const;
  const FeatureSpec* Find(std::string_view name) const;

  FeatureSchema WithDirection(Direction direction) const;

 private:
  std::vector<FeatureSpec> features_;
  Direction direction_;
  std::string privileged_value_;
};

class Dataset {
 public:
  // rows must have one column per schema.ColumnNames() entry; labels, when
  // present, one 0/1 entry per row. Throws InvalidArgument on shape errors
  // and NumericError on non-finite values.
  Dataset(FeatureSchema schema, Matrix rows,
          std::optional<std::vector<int>> labels = std::nullopt,
          std::vector<std::string> ids = {});

  const FeatureSchema& schema() const { return schema_; }
  const Matrix& rows() const { return rows_; }
  size_t num_rows() const { return static_cast<size_t>(rows_.rows()); }
  size_t num_columns() const { return static_cast<size_t>(rows_.cols()); }
  const std::vector<std::string>& column_names() const { return columns_; }

  bool has_labels() const { return labels_.has_value(); }
  const std::vector<int>& labels() const;
  const std::vector<std::string>& ids() const { return ids_; }

  // Throws SchemaError naming the column when absent.
  size_t ColumnIndex(std::string_view name) const;
  std::vector<size_t> ColumnIndices(std::span<const std::string> names) const;
  std::vector<size_t> ScoringColumns() const;
  std::vector<size_t> ProtectedColumns() const;

  std::vector<double> Column(size_t index) const;

  // Row subset in the given order.
  Dataset Subset(std::span<const size_t> row_indices) const;

  // Same data with different matrix values (shape must match).
  Dataset WithRows(Matrix rows) const;

 private:
  FeatureSchema schema_;
  std::vector<std::string> columns_;
  Matrix rows_;
  std::optional<std::vector<int>> labels_;
  std::vector<std::string> ids_;
};

// Privileged flag per row: 1 iff every listed protected column equals the
// privileged code. With several columns this is their intersection.
std::vector<uint8_t> PrivilegedMask(const Matrix& rows,
                                    std::span<const size_t> protected_columns);

// Reads an RFC-4180 CSV whose header names every schema feature (extra
// columns are ignored). Throws SchemaError naming a missing column and
// ParseError with the data-row index for a non-numeric scoring cell.
Dataset LoadCsv(const std::filesystem::path& path, const FeatureSchema& schema);
Dataset ParseCsv(std::string_view text, const FeatureSchema& schema);

// Writes the dataset back as CSV (id, features, label), codes as numbers.
void WriteCsv(const Dataset& dataset, const std::filesystem::path& path);

// Maps each scoring column to [0, 1] via (x - min) / (max - min). Constant
// columns become all zeros. Protected columns and labels are untouched.
Dataset MinMaxNormalize(const Dataset& dataset);

// Splits RFC-4180 CSV text into records of fields. Exposed for testing.
std::vector<std::vector<std::string>> ParseCsvRecords(std::string_view text);

}  // namespace shuffle_audit

#endif  // SHUFFLE_AUDIT_DATASET_H_
