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

#include "robustrag/evaluation.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "robustrag/attack.hpp"

namespace robustrag {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr const char* kColumns[] = {"query_id", "aggregator", "attack_kind", "k_prime",       "omega",
                                    "bacc",     "tau",        "racc",        "asr",           "status",
                                    "response_count", "wall_time_ms", "error"};

json parse_line(const std::string& line, const char* what) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string(what) + ": " + e.what());
  }
}

template <typename F>
auto with_parse_errors(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string(what) + ": " + e.what());
  }
}

template <typename T, typename Parse>
std::vector<T> load_lines(const std::filesystem::path& path, Parse parse) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<T> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse(line));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> csv_cells(const ReportRow& r) {
  auto opt = [](const auto& o) { return o ? format_number(static_cast<double>(*o)) : std::string(); };
  return {r.query_id,
          r.aggregator,
          r.attack_kind,
          r.k_prime ? std::to_string(*r.k_prime) : "",
          std::to_string(r.omega),
          opt(r.bacc),
          opt(r.tau),
          opt(r.racc),
          r.asr ? (*r.asr ? "1" : "0") : "",
          r.status,
          r.response_count ? std::to_string(*r.response_count) : "",
          opt(r.wall_time_ms),
          r.error};
}

// Splits CSV text into records, honouring quoted fields.
std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false, any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          cell += '"';
          in.get();
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(cell));
      cell.clear();
    } else if (c == '\n') {
      row.push_back(std::move(cell));
      cell.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else if (c != '\r') {
      cell += c;
    }
  }
  if (any) {
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kParse, "not a number: " + s);
  }
}

ReportRow row_from_cells(const std::vector<std::string>& c) {
  if (c.size() != std::size(kColumns)) throw Error(ErrorCode::kParse, "wrong number of report columns");
  ReportRow r;
  auto opt_d = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<double>(parse_double(s)); };
  r.query_id = c[0];
  r.aggregator = c[1];
  r.attack_kind = c[2];
  if (!c[3].empty()) r.k_prime = static_cast<int>(parse_double(c[3]));
  r.omega = static_cast<int>(parse_double(c[4]));
  r.bacc = opt_d(c[5]);
  r.tau = opt_d(c[6]);
  r.racc = opt_d(c[7]);
  if (!c[8].empty()) r.asr = c[8] == "1";
  r.status = c[9];
  if (!c[10].empty()) r.response_count = static_cast<std::size_t>(parse_double(c[10]));
  r.wall_time_ms = opt_d(c[11]);
  r.error = c[12];
  return r;
}

ordered_json row_to_json(const ReportRow& r) {
  ordered_json j;
  auto put = [&](const char* key, const auto& o) {
    if (o) {
      j[key] = *o;
    } else {
      j[key] = nullptr;
    }
  };
  j["query_id"] = r.query_id;
  j["aggregator"] = r.aggregator;
  j["attack_kind"] = r.attack_kind;
  put("k_prime", r.k_prime);
  j["omega"] = r.omega;
  put("bacc", r.bacc);
  put("tau", r.tau);
  put("racc", r.racc);
  put("asr", r.asr);
  j["status"] = r.status;
  put("response_count", r.response_count);
  put("wall_time_ms", r.wall_time_ms);
  j["error"] = r.error;
  return j;
}

ReportRow row_from_json(const json& j) {
  return with_parse_errors("report row", [&] {
    ReportRow r;
    auto get_opt = [&](const char* key, auto& field) {
      if (j.contains(key) && !j.at(key).is_null()) {
        field = j.at(key).get<typename std::remove_reference_t<decltype(field)>::value_type>();
      }
    };
    r.query_id = j.at("query_id").get<std::string>();
    r.aggregator = j.value("aggregator", "");
    r.attack_kind = j.value("attack_kind", "");
    get_opt("k_prime", r.k_prime);
    r.omega = j.value("omega", 1);
    get_opt("bacc", r.bacc);
    get_opt("tau", r.tau);
    get_opt("racc", r.racc);
    get_opt("asr", r.asr);
    r.status = j.value("status", "");
    get_opt("response_count", r.response_count);
    get_opt("wall_time_ms", r.wall_time_ms);
    r.error = j.value("error", "");
    return r;
  });
}

void add(std::optional<MeanStat>& stat, double v) {
  if (!stat) stat = MeanStat{};
  stat->mean += v;
  ++stat->count;
}

void finish(std::optional<MeanStat>& stat) {
  if (stat) stat->mean /= static_cast<double>(stat->count);
}

}  // namespace

DatasetRecord parse_dataset_record(const std::string& json_line) {
  const json j = parse_line(json_line, "dataset record");
  return with_parse_errors("dataset record", [&] {
    DatasetRecord rec;
    rec.query.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
    rec.query.question = j.at("question").get<std::string>();
    if (rec.query.question.empty()) throw Error(ErrorCode::kParse, "empty question");
    rec.answers = ReferenceAnswer(j.at("answers").get<std::vector<std::string>>());
    if (j.contains("choices") && !j.at("choices").is_null()) {
      rec.choices = j.at("choices").get<std::vector<std::string>>();
      if (rec.choices.size() < 2) throw Error(ErrorCode::kParse, "choices need at least two labels");
      rec.query.instruction_id = "mc";
    }
    std::vector<Passage> passages;
    for (const auto& p : j.at("passages")) {
      passages.push_back(Passage::make(p.at("text").get<std::string>(), p.at("rank").get<int>()));
    }
    rec.passages = RetrievalSet(std::move(passages));
    return rec;
  });
}

std::vector<DatasetRecord> load_dataset(const std::filesystem::path& path) {
  return load_lines<DatasetRecord>(path, parse_dataset_record);
}

AttackSpec AttackRecord::to_spec(const Query& query) const {
  AttackSpec spec;
  spec.kind = kind;
  spec.k_prime = k_prime;
  spec.positions = positions;
  const Passage payload =
      payload_text.empty() ? build_pia(query, target_text, repeat) : build_poison(query, payload_text, repeat);
  spec.malicious_passages.assign(static_cast<std::size_t>(k_prime), payload);
  return spec;
}

AttackRecord parse_attack_record(const std::string& json_line) {
  const json j = parse_line(json_line, "attack record");
  return with_parse_errors("attack record", [&] {
    AttackRecord a;
    a.query_id = j.at("query_id").is_string() ? j.at("query_id").get<std::string>() : j.at("query_id").dump();
    a.kind = parse_attack_kind(j.value("kind", "injection"));
    a.k_prime = j.value("k_prime", 1);
    a.positions = j.at("positions").get<std::vector<int>>();
    a.payload_text = j.value("payload_text", "");
    a.repeat = j.value("repeat", 1);
    a.target_text = j.value("target_text", "");
    if (static_cast<int>(a.positions.size()) != a.k_prime) {
      throw Error(ErrorCode::kParse, "positions must list k_prime ranks");
    }
    return a;
  });
}

std::vector<AttackRecord> load_attacks(const std::filesystem::path& path) {
  return load_lines<AttackRecord>(path, parse_attack_record);
}

ReportFormat report_format_for(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? ReportFormat::kCsv : ReportFormat::kJsonl;
}

void write_report(std::ostream& out, const std::vector<ReportRow>& rows, ReportFormat format) {
  if (format == ReportFormat::kCsv) {
    for (std::size_t i = 0; i < std::size(kColumns); ++i) out << (i ? "," : "") << kColumns[i];
    out << '\n';
    for (const auto& r : rows) {
      const auto cells = csv_cells(r);
      for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_escape(cells[i]);
      out << '\n';
    }
    return;
  }
  for (const auto& r : rows) out << row_to_json(r).dump() << '\n';
}

void write_report(const std::filesystem::path& path, const std::vector<ReportRow>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write_report(out, rows, report_format_for(path));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::vector<ReportRow> read_report(std::istream& in, ReportFormat format) {
  std::vector<ReportRow> rows;
  if (format == ReportFormat::kCsv) {
    auto records = parse_csv(in);
    if (records.empty()) return rows;
    for (std::size_t i = 1; i < records.size(); ++i) rows.push_back(row_from_cells(records[i]));
    return rows;
  }
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    rows.push_back(row_from_json(parse_line(line, "report row")));
  }
  return rows;
}

std::vector<ReportRow> read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return read_report(in, report_format_for(path));
}

ReportSummary aggregate_report(const std::vector<ReportRow>& rows) {
  if (rows.empty()) throw Error(ErrorCode::kEmptyInput, "no report rows to summarise");
  ReportSummary s;
  s.rows = rows.size();
  for (const auto& r : rows) {
    if (!r.error.empty()) ++s.errors;
    if (r.bacc) add(s.bacc, *r.bacc);
    if (r.racc) add(s.racc, *r.racc);
    if (r.asr) add(s.asr, *r.asr ? 1.0 : 0.0);
    if (r.tau) {
      add(s.cacc, *r.tau);
      auto& by = s.cacc_by_status[r.status];
      by.mean += *r.tau;
      ++by.count;
      if (r.status == to_string(CertificationStatus::kSubsampled)) ++s.subsampled;
    }
  }
  finish(s.bacc);
  finish(s.cacc);
  finish(s.racc);
  finish(s.asr);
  for (auto& [status, stat] : s.cacc_by_status) stat.mean /= static_cast<double>(stat.count);
  return s;
}

std::string ReportSummary::to_json() const {
  ordered_json j;
  auto put = [&](const char* key, const std::optional<MeanStat>& m) {
    if (m) {
      j[key] = {{"mean", m->mean}, {"count", m->count}};
    } else {
      j[key] = nullptr;
    }
  };
  j["rows"] = rows;
  put("bacc", bacc);
  put("cacc", cacc);
  put("racc", racc);
  put("asr", asr);
  ordered_json by = ordered_json::object();
  for (const auto& [status, m] : cacc_by_status) by[status] = {{"mean", m.mean}, {"count", m.count}};
  j["cacc_by_status"] = by;
  j["subsampled"] = subsampled;
  j["errors"] = errors;
  return j.dump(2);
}

}  // namespace robustrag
