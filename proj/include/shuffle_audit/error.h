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

#ifndef SHUFFLE_AUDIT_ERROR_H_
#define SHUFFLE_AUDIT_ERROR_H_

#include <stdexcept>
#include <string>

namespace shuffle_audit {

// Base of every error raised by the library. The CLI maps the subclasses
// below onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Schema file or dataset layout is inconsistent (missing column, bad role).
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A data cell could not be parsed. Carries the zero-based data row index.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, long row)
      : Error(message + " (row " + std::to_string(row) + ")"), row_(row) {}
  long row() const { return row_; }

 private:
  long row_;
};

// Argument values outside their documented range or mismatched sizes.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// The requested computation exceeds a hard capability limit, e.g. exact
// Shapley values on more features than the enumeration cap allows.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

// Numerical failure: model fitting on degenerate labels, non-finite values.
class NumericError : public Error {
 public:
  using Error::Error;
};

// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace shuffle_audit

#endif  // SHUFFLE_AUDIT_ERROR_H_
