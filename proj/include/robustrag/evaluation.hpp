// Copyright 2026 The robustrag Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "robustrag/certification.hpp"
#include "robustrag/core.hpp"
#include "robustrag/metric.hpp"

namespace robustrag {

struct DatasetRecord {
  Query query;
  ReferenceAnswer answers;
  RetrievalSet passages;
  std::vector<std::string> choices;  // empty unless multiple choice
};

/// One JSON object per line: {id, question, answers[], choices[]?,
/// passages[{text, rank}]}. Multiple-choice records use the "mc"
/// instruction set.
DatasetRecord parse_dataset_record(const std::string& json_line);
std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path);

/// {query_id, kind, k_prime, positions, payload_text, repeat, target_text}.
/// An empty payload_text means an instruction-injection payload built from
/// target_text; otherwise payload_text is repeated as a poisoning passage.
struct AttackRecord {
  std::string query_id;
  AttackKind kind = AttackKind::kInjection;
  int k_prime = 1;
  std::vector<int> positions;
  std::string payload_text;
  int repeat = 1;
  std::string target_text;

  AttackSpec to_spec(const Query& query) const;
};
AttackRecord parse_attack_record(const std::string& json_line);
std::vector<AttackRecord> load_attacks(const std::filesystem::path& path);

struct ReportRow {
  std::string query_id;
  std::string aggregator;
  std::string attack_kind;
  std::optional<int> k_prime;
  int omega = 1;
  std::optional<double> bacc;
  std::optional<double> tau;
  std::optional<double> racc;
  std::optional<bool> asr;
  std::string status;
  std::optional<std::size_t> response_count;
  std::optional<double> wall_time_ms;
  std::string error;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

enum class ReportFormat { kCsv, kJsonl };
/// Chosen from the file extension: ".csv" is CSV, anything else JSON-lines.
ReportFormat report_format_for(const std::filesystem::path& path);

void write_report(std::ostream& out, const std::vector<ReportRow>& rows, ReportFormat format);
void write_report(const std::filesystem::path& path, const std::vector<ReportRow>& rows);
std::vector<ReportRow> read_report(const std::filesystem::path& path);
std::vector<ReportRow> read_report(std::istream& in, ReportFormat format);

struct MeanStat {
  double mean = 0.0;
  std::size_t count = 0;
};

struct ReportSummary {
  std::size_t rows = 0;
  std::optional<MeanStat> bacc;
  std::optional<MeanStat> cacc;
  std::optional<MeanStat> racc;
  std::optional<MeanStat> asr;
  std::map<std::string, MeanStat> cacc_by_status;
  std::size_t subsampled = 0;
  std::size_t errors = 0;

  std::string to_json() const;
};

/// Means over the rows carrying each column. Throws kEmptyInput on no rows.
ReportSummary aggregate_report(const std::vector<ReportRow>& rows);

}  // namespace robustrag
