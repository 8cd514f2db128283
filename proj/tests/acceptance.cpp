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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "robustrag/attack.hpp"
#include "robustrag/backends.hpp"
#include "robustrag/certification.hpp"
#include "robustrag/cli.hpp"
#include "robustrag/mock_model.hpp"
#include "support.hpp"

using namespace robustrag;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

const Query kMountain{"tallest", "Which mountain is tallest?"};
const ReferenceAnswer kEverest({"Everest"});

// ---------------------------------------------------------------- criterion 1

// The decoding rule applied after the attacker adds x to the top token and y
// to the runner-up: 1 = top token, 2 = runner-up token, 0 = fallback token.
int perturbed_decision(double a, double b, double x, double y, double eta) {
  const double ta = a + x, tb = b + y;
  if (ta - tb > eta) return 1;
  if (tb - ta > eta) return 2;
  return 0;
}

Verdict lemma_suite() {
  Verdict v;
  const auto start = Clock::now();
  std::mt19937_64 rng(20240601);
  // dyadic grid keeps every sum exact in binary floating point
  auto grid = [&](double hi) {
    const auto steps = static_cast<long>(hi * 64);
    return static_cast<double>(std::uniform_int_distribution<long>(0, steps)(rng)) / 64.0;
  };
  long counts[4] = {0, 0, 0, 0};
  long violations = 0;
  const int tuples = 10000;
  for (int i = 0; i < tuples; ++i) {
    const int m = std::uniform_int_distribution<int>(1, 10)(rng);
    const int m_prime = std::uniform_int_distribution<int>(1, m)(rng);
    double a = grid(m), b = grid(m);
    if (a < b) std::swap(a, b);
    const double eta = grid(2.0 * m_prime);
    const double x = grid(m_prime), y = grid(m_prime);
    const GapCase c = classify_gap(a - b, eta, m_prime);
    ++counts[static_cast<int>(c)];

    const double mp = m_prime;
    const std::vector<std::pair<double, double>> probes = {{x, y}, {0, mp}, {mp, 0}, {0, 0}, {mp, mp}};
    switch (c) {
      case GapCase::kAlwaysTop:
        for (auto [px, py] : probes) violations += perturbed_decision(a, b, px, py, eta) != 1;
        break;
      case GapCase::kAlwaysNoRetrieval:
        for (auto [px, py] : probes) violations += perturbed_decision(a, b, px, py, eta) != 0;
        break;
      case GapCase::kEither:
        for (auto [px, py] : probes) violations += perturbed_decision(a, b, px, py, eta) == 2;
        // both outcomes are reachable
        violations += perturbed_decision(a, b, mp, 0, eta) != 1;
        violations += perturbed_decision(a, b, 0, mp, eta) != 0;
        break;
      case GapCase::kUndecided:
        break;
    }
  }
  const double elapsed = seconds_since(start);
  v.require(violations == 0, std::to_string(violations) + " lemma violations");
  v.require(elapsed < 1.0, "runtime " + std::to_string(elapsed) + " s");
  v.require(counts[0] > 0 && counts[1] > 0 && counts[2] > 0, "some lemma case never sampled");
  v.detail << tuples << " tuples, " << violations << " violations, cases top/either/fallback/undecided = "
           << counts[0] << "/" << counts[1] << "/" << counts[2] << "/" << counts[3] << ", " << elapsed << " s";
  return v;
}

// ---------------------------------------------------------------- criterion 2

MockTable vote_table() {
  return MockTable()
      .on({"vote-src-A"}, "A")
      .on({"vote-src-B"}, "B")
      .on({"vote-src-C"}, "C")
      .on({"vote-src-D"}, "D");
}

struct VoteInstance {
  std::string labels;  // one label per rank
  std::string correct;
};

RetrievalSet vote_retrieval(const std::string& labels) {
  std::vector<std::string> texts;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    texts.push_back("vote-src-" + std::string(1, labels[i]) + " doc" + std::to_string(i + 1));
  }
  return RetrievalSet::from_texts(texts);
}

// Vote gap over the top k - k' labels, counted straight from the instance.
std::pair<char, int> expected_gap(const std::string& labels, int k_prime) {
  std::map<char, int> c;
  for (char ch : std::string("ABCD")) c[ch] = 0;
  for (std::size_t i = 0; i + static_cast<std::size_t>(k_prime) < labels.size(); ++i) ++c[labels[i]];
  char best = 'A';
  for (auto [ch, n] : c) {
    if (n > c[best]) best = ch;
  }
  int runner = 0;
  for (auto [ch, n] : c) {
    if (ch != best) runner = std::max(runner, n);
  }
  return {best, c[best] - runner};
}

Verdict voting_soundness() {
  Verdict v;
  MockModel model(vote_table());
  const std::vector<std::string> choices = {"A", "B", "C", "D"};
  const std::vector<VoteInstance> instances = {
      {"BBABBCBBAB", "B"},
      {"BBABBCBBAB", "A"},
      {"BABABABBCD", "B"},
  };
  DefenseConfig config;
  config.k = 10;
  config.omega = 1;
  config.aggregator = Aggregator::kVoting;
  long attacks = 0;
  int certified = 0;
  for (const auto& inst : instances) {
    const auto retrieval = vote_retrieval(inst.labels);
    const ReferenceAnswer answer({inst.correct});
    std::vector<Passage> pool;
    for (const auto& c : choices) {
      if (c != inst.correct) pool.push_back({"vote-src-" + c + " forged", 1});
    }
    for (int kp = 0; kp <= 4; ++kp) {
      const auto cert = certify(kMountain, retrieval, {AttackKind::kInjection, kp, choices}, answer, config, model);
      const auto [winner, gap] = expected_gap(inst.labels, kp);
      const bool should_certify = (kp == 0 ? gap > 0 : gap > kp) && std::string(1, winner) == inst.correct;
      v.require(cert.tau.value() == (should_certify ? 1.0 : 0.0),
                inst.labels + "/" + inst.correct + " k'=" + std::to_string(kp) + " tau mismatch");
      certified += cert.tau.value() == 1.0;
      const auto oracle = oracle_attack(kMountain, retrieval, pool, kp, choices, answer, config, model);
      attacks += static_cast<long>(oracle.attacks_evaluated);
      v.require(oracle.min_score >= cert.tau, inst.labels + " k'=" + std::to_string(kp) + " oracle below tau");
    }
  }
  v.detail << instances.size() << " instances x k' 0..4, " << attacks << " oracle attacks, " << certified
           << " certified at tau = 1";
  return v;
}

// ---------------------------------------------------------------- criterion 3

MockTable keyword_table() {
  return MockTable()
      .name("keyword-acceptance")
      .on({"using provided keywords", "fuji"}, "Fuji")
      .on({"using provided keywords", "tokyo"}, "Tokyo")
      .on({"using provided keywords", "nepal", "everest"}, "Everest in Nepal")
      .on({"using provided keywords", "everest"}, "Everest")
      .on({"using provided keywords"}, "unsure")
      .on({"bn-1"}, "Mount Everest")
      .on({"bn-2"}, "Everest, Nepal")
      .on({"bn-3"}, "Mount Everest")
      .on({"bn-4"}, "Everest")
      .on({"zq-tokyo"}, "Tokyo")
      .on({"zq-abstain"}, "I don't know")
      .on({"zq-ever"}, "Everest")
      .on({"zq-nepal"}, "Nepal")
      .on({"zq-evnep"}, "Everest Nepal")
      .on({"zq-fuji"}, "Fuji")
      .on({"zq-mount"}, "Mount Everest")
      .on({"zq-mixed"}, "Fuji, Tokyo, Nepal");
}

std::vector<Passage> keyword_pool() {
  std::vector<Passage> pool;
  for (const char* m : {"zq-tokyo", "zq-abstain", "zq-ever", "zq-nepal", "zq-evnep", "zq-fuji", "zq-mount", "zq-mixed"}) {
    pool.push_back({std::string(m) + " payload", 1});
  }
  return pool;
}

RetrievalSet keyword_retrieval() { return RetrievalSet::from_texts({"bn-1 a", "bn-2 b", "bn-3 c", "bn-4 d"}); }

DefenseConfig keyword_config() {
  DefenseConfig c;
  c.k = 4;
  c.omega = 1;
  c.alpha = 0.5;
  c.beta = 2;
  c.aggregator = Aggregator::kKeyword;
  return c;
}

Verdict keyword_soundness() {
  Verdict v;
  robustrag::testing::TempDir cache_dir("acceptance-keyword");
  auto model = cached(std::make_shared<MockModel>(keyword_table()), cache_dir.path());
  const auto retrieval = keyword_retrieval();
  const auto config = keyword_config();
  const auto pool = keyword_pool();

  auto run_once = [&] {
    const auto cert = certify(kMountain, retrieval, {AttackKind::kInjection, 1, {}}, kEverest, config, *model);
    const auto oracle = oracle_attack(kMountain, retrieval, pool, 1, {}, kEverest, config, *model);
    return std::make_pair(cert, oracle);
  };
  run_once();  // warms the cache
  const auto start = Clock::now();
  const auto [cert, oracle] = run_once();
  const double warm = seconds_since(start);

  v.require(cert.status == CertificationStatus::kExact, "status " + std::string(to_string(cert.status)));
  v.require(oracle.attacks_evaluated == 32, "expected 32 attacks");
  v.require(oracle.min_score >= cert.tau, "oracle below tau");
  std::size_t outside = 0;
  for (const auto& r : oracle.responses) outside += !cert.responses.contains(r);
  v.require(outside == 0, std::to_string(outside) + " attacked responses outside R");
  v.require(warm < 10.0, "warm runtime " + std::to_string(warm) + " s");
  v.detail << "tau = " << cert.tau.value() << ", |R| = " << cert.responses.size() << ", " << oracle.attacks_evaluated
           << " attacks, oracle min = " << oracle.min_score.value() << ", warm " << warm << " s";
  return v;
}

// ---------------------------------------------------------------- criterion 4

MockTable decoding_table() {
  using S = MockTable::StepDistribution;
  return MockTable()
      .name("decoding-acceptance")
      .vocabulary({"Mount", "Everest", "Fuji", "the", "peak"})
      .on({"answer query"}, "Mount Fuji")
      .on_steps({"dec-src-1"}, {S{{"Mount", 0.9}, {"Fuji", 0.1}}, S{{"Everest", 0.8}, {"peak", 0.2}}, S{{"</s>", 1.0}}})
      .on_steps({"dec-src-2"},
                {S{{"Mount", 0.9}, {"the", 0.1}}, S{{"Everest", 0.9}, {"Fuji", 0.1}}, S{{"</s>", 0.95}, {"peak", 0.05}}})
      .on_steps({"dec-src-3"}, {S{{"the", 0.6}, {"Mount", 0.4}}, S{{"peak", 1.0}}, S{{"</s>", 1.0}}});
}

RetrievalSet decoding_retrieval() { return RetrievalSet::from_texts({"dec-src-1", "dec-src-2", "dec-src-3"}); }

DefenseConfig decoding_config(double eta) {
  DefenseConfig c;
  c.k = 3;
  c.omega = 1;
  c.eta = eta;
  c.t_max = 4;
  c.aggregator = Aggregator::kDecoding;
  return c;
}

Verdict decoding_soundness() {
  Verdict v;
  const auto start = Clock::now();
  MockModel model(decoding_table());
  const auto retrieval = decoding_retrieval();
  std::vector<TokenId> script_tokens;
  for (TokenId t = 0; t < model.vocab_size(); ++t) {
    if (t != model.eos()) script_tokens.push_back(t);
  }
  v.require(model.vocab_size() <= 12, "vocabulary larger than 12");
  const auto scripts = all_scripts(script_tokens, 4);
  int exact_runs = 0;
  for (double eta : {0.0, 1.0}) {
    const auto config = decoding_config(eta);
    const auto cert = certify(kMountain, retrieval, {AttackKind::kInjection, 1, {}}, kEverest, config, model);
    const auto oracle =
        oracle_attack_scripts(kMountain, retrieval, scripts, model.vocab_size(), 1, kEverest, config, model);
    v.detail << "eta " << eta << ": tau = " << cert.tau.value() << " (" << to_string(cert.status)
             << "), |R| = " << cert.responses.size() << ", " << oracle.attacks_evaluated << " attacks, oracle min = "
             << oracle.min_score.value() << "; ";
    if (cert.status != CertificationStatus::kExact) continue;
    ++exact_runs;
    v.require(oracle.min_score >= cert.tau, "oracle below tau at eta " + std::to_string(eta));
    std::size_t outside = 0;
    for (const auto& r : oracle.responses) outside += !cert.responses.contains(r);
    v.require(outside == 0, std::to_string(outside) + " responses outside R at eta " + std::to_string(eta));
  }
  const double elapsed = seconds_since(start);
  v.require(exact_runs == 2, "expected both runs to certify exactly");
  v.require(elapsed < 30.0, "runtime " + std::to_string(elapsed) + " s");
  v.detail << elapsed << " s";
  return v;
}

// ---------------------------------------------------------------- criterion 5

Verdict zero_corruption_identity() {
  Verdict v;
  int checked = 0;
  auto check = [&](const std::string& label, const RetrievalSet& retrieval, const std::vector<std::string>& choices,
                   const ReferenceAnswer& answer, const DefenseConfig& config, Model& model) {
    const auto inferred = run_inference(kMountain, retrieval, choices, config, model);
    for (auto kind : {AttackKind::kInjection, AttackKind::kModification}) {
      const auto cert = certify(kMountain, retrieval, {kind, 0, choices}, answer, config, model);
      v.require(cert.tau == metric_substring(inferred, answer), label + ": tau differs from inference score");
      v.require(!cert.responses.empty() && cert.responses.contains(inferred), label + ": inference output not in R");
      ++checked;
    }
  };

  MockModel votes(vote_table());
  DefenseConfig vc;
  vc.k = 10;
  vc.aggregator = Aggregator::kVoting;
  for (const char* labels : {"BBABBCBBAB", "BABABABBCD", "AABBCCDDAB"}) {
    for (int omega : {1, 2, 3}) {
      vc.omega = omega;
      check(std::string("voting ") + labels, vote_retrieval(labels), {"A", "B", "C", "D"}, ReferenceAnswer({"B"}), vc,
            votes);
    }
  }

  MockModel keywords(keyword_table());
  for (int omega : {1, 2}) {
    auto kc = keyword_config();
    kc.omega = omega;
    check("keyword", keyword_retrieval(), {}, kEverest, kc, keywords);
    check("keyword-abstain", RetrievalSet::from_texts({"zq-abstain 1", "zq-abstain 2"}), {}, kEverest, kc, keywords);
  }

  MockModel decoding(decoding_table());
  for (double eta : {0.0, 0.5, 1.0, 3.0}) {
    for (int omega : {1, 2, 3}) {
      auto dc = decoding_config(eta);
      dc.omega = omega;
      check("decoding", decoding_retrieval(), {}, kEverest, dc, decoding);
    }
  }
  v.detail << checked << " zero-corruption certifications matched inference";
  return v;
}

// ---------------------------------------------------------------- criterion 6

Verdict monotonicity() {
  Verdict v;
  MockTable t = vote_table();
  t.on({"using provided keywords", "everest"}, "Everest").on({"using provided keywords"}, "unsure");
  t.on_steps({"mono-dec"}, {{{"Everest", 1.0}}});
  t.on({"answer query"}, "Fuji");
  t.on({"mono-kw"}, "Mount Everest");
  MockModel model(t);

  std::vector<std::string> vote_texts, kw_texts, dec_texts;
  for (int i = 1; i <= 10; ++i) {
    vote_texts.push_back("vote-src-B " + std::to_string(i));
    kw_texts.push_back("mono-kw " + std::to_string(i));
    dec_texts.push_back("mono-dec " + std::to_string(i));
  }
  struct Setup {
    const char* name;
    Aggregator aggregator;
    RetrievalSet retrieval;
    ReferenceAnswer answer;
  };
  const std::vector<Setup> setups = {
      {"voting", Aggregator::kVoting, RetrievalSet::from_texts(vote_texts), ReferenceAnswer({"B"})},
      {"keyword", Aggregator::kKeyword, RetrievalSet::from_texts(kw_texts), kEverest},
      {"decoding", Aggregator::kDecoding, RetrievalSet::from_texts(dec_texts), kEverest},
  };
  for (const auto& s : setups) {
    DefenseConfig c;
    c.k = 10;
    c.aggregator = s.aggregator;
    std::vector<double> taus;
    for (int kp = 0; kp <= 5; ++kp) {
      taus.push_back(certify(kMountain, s.retrieval, {AttackKind::kInjection, kp, {"A", "B", "C", "D"}}, s.answer, c,
                             model)
                         .tau.value());
    }
    for (std::size_t i = 1; i < taus.size(); ++i) {
      v.require(taus[i] <= taus[i - 1], std::string(s.name) + " tau increased at k'=" + std::to_string(i));
    }
    if (s.aggregator == Aggregator::kVoting) {
      v.require(taus.front() == 1.0, "voting should certify without corruption");
      v.require(taus[5] == 0.0, "voting tau should reach 0 at k' = m/2");
    }
    v.detail << s.name << " tau(k'=0..5) =";
    for (double t : taus) v.detail << ' ' << t;
    v.detail << "; ";
  }
  return v;
}

// ---------------------------------------------------------------- criterion 7

Verdict powerset_cap() {
  Verdict v;
  const char* nato[] = {"alfa", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel",
                        "india", "juliett", "kilo", "lima", "mike", "november", "oscar", "papa"};
  std::vector<std::string> outputs(9);
  for (int i = 0; i < 16; ++i) {
    for (int r : {i % 9, (i + 1) % 9}) {
      auto& o = outputs[static_cast<std::size_t>(r)];
      o += (o.empty() ? "" : ", ") + std::string(nato[i]);
    }
  }
  MockTable t;
  t.on({"using provided keywords"}, "whatever");
  std::vector<std::string> texts;
  for (int r = 0; r < 9; ++r) {
    const std::string marker = "cap-src-" + std::to_string(r) + ".";
    t.on({marker}, outputs[static_cast<std::size_t>(r)]);
    texts.push_back(marker);
  }
  texts.push_back("cap-src-0.");
  MockModel model(t);
  DefenseConfig c;
  c.k = 10;
  c.alpha = 1.0;
  c.beta = 3;

  // independent tally of the nine surviving responses
  std::map<std::string, int> counts;
  for (const auto& o : outputs) {
    for (const auto& w : get_unique_keywords(o)) ++counts[w];
  }
  const double threshold = std::min(1.0 * (9 + 1), 3.0);
  int contestable = 0;
  for (const auto& [w, n] : counts) contestable += (n < threshold && n >= threshold - 1);
  v.require(contestable == 16, "construction has " + std::to_string(contestable) + " contestable keywords");

  const auto cert = certify(kMountain, RetrievalSet::from_texts(texts), {AttackKind::kInjection, 1, {}},
                            ReferenceAnswer({"whatever"}), c, model);
  v.require(cert.status == CertificationStatus::kFailedPowersetCap, "status " + std::string(to_string(cert.status)));
  v.require(cert.tau.value() == 0.0, "tau should be 0");
  v.detail << contestable << " contestable keywords" << ", status " << to_string(cert.status) << ", tau " << cert.tau.value();
  return v;
}

// ---------------------------------------------------------------- criterion 8

Verdict group_size_tradeoff() {
  Verdict v;
  // clue-a and clue-b each name a region; together they pin down the peak
  const MockTable t = MockTable()
                          .on({"using provided keywords", "himalaya"}, "Himalaya")
                          .on({"using provided keywords", "everest"}, "Everest")
                          .on({"using provided keywords"}, "unsure")
                          .on({"clue-a", "clue-b"}, "Mount Everest")
                          .on({"full-src"}, "Mount Everest")
                          .on({"clue-a"}, "Himalaya")
                          .on({"clue-b"}, "Nepal");
  MockModel model(t);
  struct Instance {
    const char* name;
    std::vector<std::string> texts;
  };
  const std::vector<Instance> instances = {
      {"clue pairs", {"clue-a 1", "clue-b 1", "clue-a 2", "clue-b 2", "clue-a 3", "clue-b 3", "clue-a 4", "clue-b 4"}},
      {"mixed", {"full-src 1", "full-src 2", "full-src 3", "full-src 4", "full-src 5", "full-src 6", "clue-b 1", "clue-a 1"}},
  };
  int strict_bacc = 0, strict_tau = 0;
  for (const auto& inst : instances) {
    const auto retrieval = RetrievalSet::from_texts(inst.texts);
    double bacc[3] = {0, 0, 0}, tau[3] = {0, 0, 0};
    for (int omega : {1, 2}) {
      DefenseConfig c;
      c.k = 8;
      c.omega = omega;
      bacc[omega] = metric_substring(rrag_keyword(kMountain, retrieval, c, model), kEverest).value();
      tau[omega] = certify(kMountain, retrieval, {AttackKind::kInjection, 1, {}}, kEverest, c, model).tau.value();
    }
    v.require(bacc[2] >= bacc[1], std::string(inst.name) + ": benign accuracy dropped with larger groups");
    v.require(tau[2] <= tau[1], std::string(inst.name) + ": certified bound grew with larger groups");
    strict_bacc += bacc[2] > bacc[1];
    strict_tau += tau[2] < tau[1];
    v.detail << inst.name << ": bacc " << bacc[1] << " -> " << bacc[2] << ", tau " << tau[1] << " -> " << tau[2]
             << "; ";
  }
  v.require(strict_bacc > 0 && strict_tau > 0, "tradeoff never strict in both directions");
  return v;
}

// ---------------------------------------------------------------- criterion 9

Verdict modification_is_stronger() {
  Verdict v;
  using S = MockTable::StepDistribution;
  MockTable t = vote_table();
  t.on({"using provided keywords", "fuji"}, "Fuji")
      .on({"using provided keywords", "everest"}, "Everest")
      .on({"using provided keywords"}, "unsure")
      .on({"answer query"}, "Fuji")
      .on({"rnd-ever"}, "Mount Everest")
      .on({"rnd-fuji"}, "Mount Fuji")
      .on({"rnd-none"}, "I don't know")
      .on_steps({"rnd-dec-strong"}, {S{{"Everest", 1.0}}})
      .on_steps({"rnd-dec-weak"}, {S{{"Everest", 0.6}, {"Fuji", 0.4}}});
  MockModel model(t);
  std::mt19937 rng(99);
  int strictly = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int k = std::uniform_int_distribution<int>(3, 7)(rng);
    DefenseConfig c;
    c.k = k;
    c.omega = std::uniform_int_distribution<int>(1, 2)(rng);
    c.alpha = std::uniform_int_distribution<int>(1, 4)(rng) * 0.25;
    c.beta = std::uniform_int_distribution<int>(1, 3)(rng);
    c.eta = std::uniform_int_distribution<int>(0, 2)(rng) * 0.5;
    const int kind = trial % 3;
    c.aggregator = kind == 0 ? Aggregator::kVoting : kind == 1 ? Aggregator::kKeyword : Aggregator::kDecoding;
    const int kp = std::uniform_int_distribution<int>(1, 2)(rng);

    std::vector<std::string> texts;
    for (int i = 0; i < k; ++i) {
      const int pick = std::uniform_int_distribution<int>(0, 3)(rng);
      std::string base;
      if (kind == 0) base = pick == 3 ? "vote-src-A" : "vote-src-B";
      if (kind == 1) base = pick == 3 ? "rnd-fuji" : pick == 2 ? "rnd-none" : "rnd-ever";
      if (kind == 2) base = pick == 3 ? "rnd-dec-weak" : "rnd-dec-strong";
      texts.push_back(base + " " + std::to_string(i));
    }
    const auto retrieval = RetrievalSet::from_texts(texts);
    const ReferenceAnswer answer(kind == 0 ? std::vector<std::string>{"B"} : std::vector<std::string>{"Everest"});
    const std::vector<std::string> choices = {"A", "B"};
    const auto inj = certify(kMountain, retrieval, {AttackKind::kInjection, kp, choices}, answer, c, model);
    const auto mod = certify(kMountain, retrieval, {AttackKind::kModification, kp, choices}, answer, c, model);
    v.require(mod.tau <= inj.tau, "trial " + std::to_string(trial) + ": modification bound exceeds injection");
    strictly += mod.tau < inj.tau;
  }
  v.detail << "20 random instances, modification strictly lower in " << strictly;
  return v;
}

// ---------------------------------------------------------------- criterion 10

Verdict determinism() {
  Verdict v;
  robustrag::testing::TempDir dir("acceptance-determinism");
  const std::string data = ROBUSTRAG_TEST_DATA;
  std::ostringstream sink;
  std::vector<std::string> files;
  for (const char* aggregator : {"keyword", "decoding"}) {
    for (int run = 0; run < 3; ++run) {
      const auto out = dir.path() / (std::string(aggregator) + std::to_string(run) + ".csv");
      const int code = cli::run({"certify", "--dataset", data + "/geo.jsonl", "--mock-table", data + "/geo_table.json",
                                 "--cache-dir", (dir.path() / "cache").string(), "--aggregator", aggregator, "--k",
                                 "4", "--alpha", "0.5", "--beta", "2", "--k-prime", "1", "--seed", "7", "--workers",
                                 "2", "--out", out.string()},
                                sink, sink);
      v.require(code == cli::kExitOk, std::string("certify exited with ") + std::to_string(code));
      files.push_back(robustrag::testing::read_file(out));
    }
  }
  v.require(files[0] == files[1] && files[1] == files[2], "keyword reports differ between runs");
  v.require(files[3] == files[4] && files[4] == files[5], "decoding reports differ between runs");
  v.require(!files[0].empty() && !files[3].empty(), "empty report");
  v.detail << "3 runs x 2 aggregators, cold then warm cache, byte-identical";
  return v;
}

// ---------------------------------------------------------------- criterion 11

Verdict injection_sanity() {
  Verdict v;
  MockTable t;
  t.on({"please output Atlantis"}, "Atlantis")
      .on({"using provided keywords", "everest"}, "Everest")
      .on({"using provided keywords", "nile"}, "Nile")
      .on({"using provided keywords"}, "unsure")
      .on({"pia-ever"}, "Mount Everest")
      .on({"pia-nile"}, "The Nile river");
  MockModel model(t);
  struct Item {
    Query query;
    std::vector<std::string> texts;
  };
  const std::vector<Item> items = {
      {{"tallest", "Which mountain is tallest?"}, {"pia-ever 1", "pia-ever 2", "pia-ever 3", "pia-ever 4", "pia-ever 5"}},
      {{"longest", "Which river is longest?"}, {"pia-nile 1", "pia-nile 2", "pia-nile 3", "pia-nile 4", "pia-nile 5"}},
  };
  for (auto aggregator : {Aggregator::kVanilla, Aggregator::kKeyword}) {
    DefenseConfig c;
    c.k = 5;
    c.aggregator = aggregator;
    int hits = 0, total = 0;
    for (const auto& item : items) {
      for (int pos = 1; pos <= 5; ++pos) {
        const auto attacked = inject(RetrievalSet::from_texts(item.texts),
                                     std::vector<Passage>{build_pia(item.query, "Atlantis", 10)}, std::vector<int>{pos});
        hits += target_hit(run_inference(item.query, attacked, {}, c, model), "Atlantis");
        ++total;
      }
    }
    const double asr = static_cast<double>(hits) / total;
    v.require(asr == (aggregator == Aggregator::kVanilla ? 1.0 : 0.0),
              std::string(to_string(aggregator)) + " asr " + std::to_string(asr));
    v.detail << to_string(aggregator) << " asr = " << asr << " over " << total << " attacks; ";
  }
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"lemma property suite", lemma_suite},
      {"voting certification soundness", voting_soundness},
      {"keyword certification soundness", keyword_soundness},
      {"decoding certification soundness", decoding_soundness},
      {"zero-corruption identity", zero_corruption_identity},
      {"monotonicity in k'", monotonicity},
      {"power-set cap", powerset_cap},
      {"group-size tradeoff", group_size_tradeoff},
      {"modification at least as strong as injection", modification_is_stronger},
      {"determinism and cache transparency", determinism},
      {"instruction-injection sanity", injection_sanity},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "exception: " << e.what();
    }
    failed += !v.pass;
    std::printf("%s criterion %zu: %s -- %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                v.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
