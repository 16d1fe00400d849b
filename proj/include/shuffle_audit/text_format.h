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

#ifndef SHUFFLE_AUDIT_TEXT_FORMAT_H_
#define SHUFFLE_AUDIT_TEXT_FORMAT_H_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace shuffle_audit {

// Shortest decimal text that round-trips to the same double.
std::string FormatDouble(double value);

// Quotes a CSV field only when it contains a comma, quote or newline.
std::string CsvEscape(std::string_view field);
std::string JoinCsv(std::span<const std::string> fields);

// Creates parent directories as needed. Throws IoError on failure.
void WriteTextFile(const std::filesystem::path& path, std::string_view text);
std::string ReadTextFile(const std::filesystem::path& path);

}  // namespace shuffle_audit

#endif  // SHUFFLE_AUDIT_TEXT_FORMAT_H_
