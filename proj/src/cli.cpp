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

#include "robustrag/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "robustrag/attack.hpp"
#include "robustrag/backends.hpp"
#include "robustrag/certification.hpp"
#include "robustrag/evaluation.hpp"
#include "robustrag/mock_model.hpp"

namespace robustrag::cli {

namespace {

struct RunConfig {
  DefenseConfig defense;
  std::string aggregator = "keyword";
  std::string backend = "mock";
  std::string mock_table;
  std::string base_url;
  std::string model_name = "default";
  std::string cache_dir;
  std::string dataset;
  std::string attacks;
  std::string instructions;
  std::string out;
  std::string threat_model = "injection";
  int k_prime = 1;
  int workers = 1;
  bool timings = false;
  bool oracle = false;
  std::vector<std::string> report_inputs;
};

// Configuration and input problems map to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void add_defense_options(CLI::App& cmd, RunConfig& cfg) {
  cmd.add_option("--dataset", cfg.dataset, "JSON-lines dataset")->required();
  cmd.add_option("--backend", cfg.backend, "mock, http, mock:<table> or http:<base-url>");
  cmd.add_option("--mock-table", cfg.mock_table, "Mock rule table (JSON)");
  cmd.add_option("--base-url", cfg.base_url, "OpenAI-compatible endpoint base URL");
  cmd.add_option("--model", cfg.model_name, "Model name sent to the HTTP backend");
  cmd.add_option("--cache-dir", cfg.cache_dir, "Response cache directory");
  cmd.add_option("--aggregator", cfg.aggregator, "keyword, decoding, voting or vanilla");
  cmd.add_option("--k", cfg.defense.k, "Passages used per query");
  cmd.add_option("--omega", cfg.defense.omega, "Passages per isolated group");
  cmd.add_option("--alpha", cfg.defense.alpha, "Keyword threshold fraction");
  cmd.add_option("--beta", cfg.defense.beta, "Keyword threshold cap");
  cmd.add_option("--eta", cfg.defense.eta, "Decoding confidence margin");
  cmd.add_option("--gamma", cfg.defense.gamma, "Abstain probability cutoff");
  cmd.add_option("--t-max", cfg.defense.t_max, "Maximum decoded tokens");
  cmd.add_option("--seed", cfg.defense.seed, "Subsampling seed");
  cmd.add_flag("--allow-approximate", cfg.defense.allow_approximate,
               "Permit decoding inference on truncated-logprob backends");
  cmd.add_option("--instructions", cfg.instructions, "Directory of instruction templates");
  cmd.add_option("--workers", cfg.workers, "Concurrent records")->check(CLI::PositiveNumber);
  cmd.add_option("--out", cfg.out, "Report file (.csv or .jsonl); stdout when omitted");
  cmd.add_flag("--timings", cfg.timings, "Record wall_time_ms per row");
}

void add_threat_options(CLI::App& cmd, RunConfig& cfg) {
  cmd.add_option("--k-prime", cfg.k_prime, "Corrupted passages")->check(CLI::NonNegativeNumber);
  cmd.add_option("--threat-model", cfg.threat_model, "injection or modification");
}

std::shared_ptr<Model> make_backend(RunConfig& cfg) {
  std::string kind = cfg.backend;
  if (const auto colon = kind.find(':'); colon != std::string::npos && kind.rfind("http", 0) != 0) {
    cfg.mock_table = kind.substr(colon + 1);
    kind = kind.substr(0, colon);
  } else if (kind.rfind("http:", 0) == 0 && kind.rfind("http://", 0) != 0) {
    cfg.base_url = kind.substr(5);
    kind = "http";
  } else if (kind.rfind("http://", 0) == 0 || kind.rfind("https://", 0) == 0) {
    cfg.base_url = kind;
    kind = "http";
  }

  std::shared_ptr<Model> model;
  if (kind == "mock") {
    if (cfg.mock_table.empty()) throw ConfigError("the mock backend needs --mock-table");
    if (!std::filesystem::exists(cfg.mock_table)) throw ConfigError("mock table not found: " + cfg.mock_table);
    model = std::make_shared<MockModel>(MockTable::load(cfg.mock_table));
  } else if (kind == "http") {
    if (cfg.base_url.empty()) throw ConfigError("the http backend needs --base-url");
    HttpModelOptions opts;
    opts.base_url = cfg.base_url;
    opts.model = cfg.model_name;
    model = std::make_shared<HttpModel>(opts);
  } else {
    throw ConfigError("unknown backend: " + cfg.backend);
  }
  if (!cfg.cache_dir.empty()) model = cached(model, cfg.cache_dir);
  return model;
}

RetrievalSet top_k(const DatasetRecord& rec, int k) { return rec.passages.top(std::min(k, rec.passages.k())); }

DefenseConfig effective_config(const RunConfig& cfg, const RetrievalSet& retrieval) {
  DefenseConfig d = cfg.defense;
  d.k = retrieval.k();
  d.omega = std::min(d.omega, d.k);
  return d;
}

ReportRow base_row(const RunConfig& cfg, const DatasetRecord& rec) {
  ReportRow row;
  row.query_id = rec.query.id;
  row.aggregator = cfg.aggregator;
  row.omega = cfg.defense.omega;
  return row;
}

/// Runs `work` over [0, n) on `workers` threads; results keep index order.
std::vector<ReportRow> parallel_rows(std::size_t n, int workers,
                                     const std::function<ReportRow(std::size_t)>& work) {
  std::vector<ReportRow> rows(n);
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i = next++; i < n; i = next++) rows[i] = work(i);
  };
  std::vector<std::thread> pool;
  const auto extra = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  for (std::size_t t = 1; t < extra; ++t) pool.emplace_back(loop);
  loop();
  for (auto& t : pool) t.join();
  return rows;
}

/// Wraps a row computation: per-record errors become the row's error cell
/// and timing is recorded only on request.
ReportRow guarded(const RunConfig& cfg, ReportRow row, const std::function<void(ReportRow&)>& fill) {
  const auto start = std::chrono::steady_clock::now();
  try {
    fill(row);
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  if (cfg.timings) {
    row.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  return row;
}

class Session {
 public:
  explicit Session(RunConfig& cfg) : cfg_(cfg) {
    cfg_.defense.aggregator = parse_aggregator(cfg_.aggregator);
    cfg_.defense.validate();
    attack_kind_ = parse_attack_kind(cfg_.threat_model);
    if (!std::filesystem::exists(cfg_.dataset)) throw ConfigError("dataset not found: " + cfg_.dataset);
    records_ = load_dataset(cfg_.dataset);
    registry_ = cfg_.instructions.empty() ? InstructionRegistry::builtin()
                                          : InstructionRegistry::load_directory(cfg_.instructions);
    model_ = make_backend(cfg_);
  }

  std::vector<ReportRow> run() {
    return parallel_rows(records_.size(), cfg_.workers, [&](std::size_t i) {
      const auto& rec = records_[i];
      return guarded(cfg_, base_row(cfg_, rec), [&](ReportRow& row) { row.bacc = benign_score(rec); });
    });
  }

  std::vector<ReportRow> certify() {
    return parallel_rows(records_.size(), cfg_.workers, [&](std::size_t i) {
      const auto& rec = records_[i];
      ReportRow row = base_row(cfg_, rec);
      row.attack_kind = std::string(to_string(attack_kind_));
      row.k_prime = cfg_.k_prime;
      return guarded(cfg_, row, [&](ReportRow& r) {
        r.bacc = benign_score(rec);
        const RetrievalSet retrieval = top_k(rec, cfg_.defense.k);
        const CertifyRequest req{attack_kind_, cfg_.k_prime, rec.choices};
        const auto result = robustrag::certify(rec.query, retrieval, req, rec.answers,
                                               effective_config(cfg_, retrieval), *model_, metric_substring,
                                               registry_);
        r.tau = result.tau.value();
        r.status = std::string(to_string(result.status));
        r.response_count = result.responses.size();
      });
    });
  }

  std::vector<ReportRow> attack() {
    if (cfg_.attacks.empty()) throw ConfigError("attack needs --attacks");
    if (!std::filesystem::exists(cfg_.attacks)) throw ConfigError("attack file not found: " + cfg_.attacks);
    const auto attacks = load_attacks(cfg_.attacks);
    std::map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < records_.size(); ++i) by_id.emplace(records_[i].query.id, i);
    for (const auto& a : attacks) {
      if (by_id.count(a.query_id) == 0) throw ConfigError("attack references unknown query " + a.query_id);
    }
    return cfg_.oracle ? oracle_rows(attacks, by_id) : attack_rows(attacks, by_id);
  }

 private:
  double benign_score(const DatasetRecord& rec) {
    const RetrievalSet retrieval = top_k(rec, cfg_.defense.k);
    const Response r =
        run_inference(rec.query, retrieval, rec.choices, effective_config(cfg_, retrieval), *model_, registry_);
    return metric_substring(r, rec.answers).value();
  }

  std::vector<ReportRow> attack_rows(const std::vector<AttackRecord>& attacks,
                                     const std::map<std::string, std::size_t>& by_id) {
    return parallel_rows(attacks.size(), cfg_.workers, [&](std::size_t i) {
      const auto& a = attacks[i];
      const auto& rec = records_[by_id.at(a.query_id)];
      ReportRow row = base_row(cfg_, rec);
      row.attack_kind = std::string(to_string(a.kind));
      row.k_prime = a.k_prime;
      return guarded(cfg_, row, [&](ReportRow& r) {
        r.bacc = benign_score(rec);
        const RetrievalSet retrieval = top_k(rec, cfg_.defense.k);
        const RetrievalSet corrupted = apply_attack(retrieval, a.to_spec(rec.query));
        const Response resp = run_inference(rec.query, corrupted, rec.choices,
                                            effective_config(cfg_, retrieval), *model_, registry_);
        r.racc = metric_substring(resp, rec.answers).value();
        r.asr = target_hit(resp, a.target_text);
      });
    });
  }

  // Exhaustive injection search over the payloads listed for each query,
  // reported next to the certified bound for the same k'.
  std::vector<ReportRow> oracle_rows(const std::vector<AttackRecord>& attacks,
                                     const std::map<std::string, std::size_t>& by_id) {
    std::map<std::size_t, std::vector<Passage>> pools;
    for (const auto& a : attacks) {
      const auto idx = by_id.at(a.query_id);
      pools[idx].push_back(a.to_spec(records_[idx].query).malicious_passages.front());
    }
    std::vector<std::size_t> order;
    for (const auto& kv : pools) order.push_back(kv.first);
    return parallel_rows(order.size(), cfg_.workers, [&](std::size_t i) {
      const auto& rec = records_[order[i]];
      ReportRow row = base_row(cfg_, rec);
      row.attack_kind = "oracle";
      row.k_prime = cfg_.k_prime;
      return guarded(cfg_, row, [&](ReportRow& r) {
        const RetrievalSet retrieval = top_k(rec, cfg_.defense.k);
        const DefenseConfig d = effective_config(cfg_, retrieval);
        r.bacc = benign_score(rec);
        const auto oracle = oracle_attack(rec.query, retrieval, pools.at(order[i]), cfg_.k_prime, rec.choices,
                                          rec.answers, d, *model_, metric_substring, kDefaultOracleBudget,
                                          registry_);
        r.racc = oracle.min_score.value();
        if (d.aggregator != Aggregator::kVanilla) {
          const CertifyRequest req{AttackKind::kInjection, cfg_.k_prime, rec.choices};
          const auto cert =
              robustrag::certify(rec.query, retrieval, req, rec.answers, d, *model_, metric_substring, registry_);
          r.tau = cert.tau.value();
          r.status = std::string(to_string(cert.status));
          r.response_count = cert.responses.size();
        }
      });
    });
  }

  RunConfig& cfg_;
  AttackKind attack_kind_ = AttackKind::kInjection;
  std::vector<DatasetRecord> records_;
  InstructionRegistry registry_;
  std::shared_ptr<Model> model_;
};

void emit(const RunConfig& cfg, const std::vector<ReportRow>& rows, std::ostream& out) {
  if (cfg.out.empty()) {
    write_report(out, rows, ReportFormat::kJsonl);
  } else {
    write_report(std::filesystem::path(cfg.out), rows);
  }
}

int status_of(const std::vector<ReportRow>& rows) {
  const bool any_error = std::any_of(rows.begin(), rows.end(), [](const ReportRow& r) { return !r.error.empty(); });
  return any_error ? kExitPartialFailure : kExitOk;
}

// Splices key=value lines from --config in front of the command-line flags,
// so later flags win under the take-last policy.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 == args.size()) throw ConfigError("--config needs a file");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!path) return rest;
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(*path);
  } catch (const CLI::FileError& e) {
    throw ConfigError(e.what());
  }
  std::vector<std::string> spliced;
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    std::string value;
    for (const auto& v : item.inputs) value += (value.empty() ? "" : " ") + v;
    spliced.push_back("--" + item.name + "=" + value);
  }
  const auto at = std::find_if(rest.begin(), rest.end(), [](const std::string& a) { return a.rfind('-', 0) != 0; });
  if (at == rest.end()) {
    rest.insert(rest.end(), spliced.begin(), spliced.end());
  } else {
    rest.insert(std::next(at), spliced.begin(), spliced.end());
  }
  return rest;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Isolate-then-aggregate RAG defense: inference, certification and attacks"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.footer("--config FILE reads flat key=value defaults; flags override them.");

  RunConfig cfg;
  auto* run_cmd = app.add_subcommand("run", "Benign inference; writes bacc rows");
  add_defense_options(*run_cmd, cfg);

  auto* certify_cmd = app.add_subcommand("certify", "Certified lower bound per record");
  add_defense_options(*certify_cmd, cfg);
  add_threat_options(*certify_cmd, cfg);

  auto* attack_cmd = app.add_subcommand("attack", "Apply attack records; writes racc and asr rows");
  add_defense_options(*attack_cmd, cfg);
  add_threat_options(*attack_cmd, cfg);
  attack_cmd->add_option("--attacks", cfg.attacks, "JSON-lines attack records")->required();
  attack_cmd->add_flag("--oracle", cfg.oracle,
                       "Exhaustive injection search over each query's payloads, with its certified bound");

  auto* report_cmd = app.add_subcommand("report", "Summarise report files");
  report_cmd->add_option("inputs", cfg.report_inputs, "Report files (.csv or .jsonl)")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  report_cmd->add_option("--out", cfg.out, "Summary file; stdout when omitted");

  try {
    const auto expanded = expand_config(args);
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitConfigError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    if (report_cmd->parsed()) {
      std::vector<ReportRow> rows;
      for (const auto& path : cfg.report_inputs) {
        if (!std::filesystem::exists(path)) throw ConfigError("report not found: " + path);
        auto part = read_report(std::filesystem::path(path));
        rows.insert(rows.end(), part.begin(), part.end());
      }
      const std::string summary = aggregate_report(rows).to_json() + "\n";
      if (cfg.out.empty()) {
        out << summary;
      } else {
        std::ofstream f(cfg.out, std::ios::binary | std::ios::trunc);
        if (!(f << summary)) throw ConfigError("cannot write " + cfg.out);
      }
      return kExitOk;
    }

    Session session(cfg);
    std::vector<ReportRow> rows;
    if (run_cmd->parsed()) rows = session.run();
    if (certify_cmd->parsed()) rows = session.certify();
    if (attack_cmd->parsed()) rows = session.attack();
    emit(cfg, rows, out);
    return status_of(rows);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }
}

}  // namespace robustrag::cli
