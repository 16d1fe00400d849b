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

// Report emission. CSV and JSON output is byte-stable for identical inputs:
// numbers use shortest round-trip formatting and no timestamps are written.

#ifndef SHUFFLE_AUDIT_REPORT_H_
#define SHUFFLE_AUDIT_REPORT_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "shuffle_audit/harness.h"

namespace shuffle_audit {

enum class ReportFormat { kCsv, kJson, kSvg };
ReportFormat ParseReportFormat(std::string_view text);

// Header: attack,param,explainer,feature,mean_abs_phi
std::string SweepCsv(const SweepResult& result);
nlohmann::json SweepJson(const SweepResult& result);
// One panel per (explainer, attack family): a line per feature over param.
std::string SweepSvg(const SweepResult& result);

nlohmann::json HybridGridJson(const HybridGridResult& result);
nlohmann::json HybridFairnessJson(const HybridGridResult& result);
// One row per grid cell: protected_set,attack,spd_drop,...,theil_drop
std::string HybridFairnessCsv(const HybridGridResult& result);

// Header: cell,feature,top1,top2,top3,top4_plus
std::string RankCsv(const std::vector<std::string>& cells,
                    const std::vector<RankHistogram>& histograms);
nlohmann::json RegionStudyJson(const RegionStudyResult& result);

// Before/after slope chart: one polyline per instance from f to f',
// coloured by group.
std::string SlopeSvg(std::span<const double> before,
                     std::span<const double> after,
                     std::span<const uint8_t> privileged,
                     const std::string& title);

// Writes a result in the requested format; throws IoError when the path is
// not writable and InvalidArgument when the result is empty.
void EmitSweep(const SweepResult& result, ReportFormat format,
               const std::filesystem::path& path);

// Pretty JSON with a trailing newline.
std::string DumpJson(const nlohmann::json& j);

}  // namespace shuffle_audit

#endif  // SHUFFLE_AUDIT_REPORT_H_
