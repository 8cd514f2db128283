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

#include "robustrag/core.hpp"

#include <set>

#include "robustrag/text.hpp"

namespace robustrag {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInvalidOmega: return "invalid-omega";
    case ErrorCode::kNoBenignGroups: return "no-benign-groups";
    case ErrorCode::kBudgetExceeded: return "budget-exceeded";
    case ErrorCode::kBackendUnavailable: return "backend-unavailable";
    case ErrorCode::kNoRuleMatched: return "no-rule-matched";
    case ErrorCode::kCapabilityUnsupported: return "capability-unsupported";
    case ErrorCode::kCacheCorrupt: return "cache-corrupt";
    case ErrorCode::kNoVotes: return "no-votes";
    case ErrorCode::kPositionOutOfRange: return "position-out-of-range";
    case ErrorCode::kDuplicatePosition: return "duplicate-position";
    case ErrorCode::kInvalidTarget: return "invalid-target";
    case ErrorCode::kParse: return "parse-error";
    case ErrorCode::kIo: return "io-error";
    case ErrorCode::kEmptyInput: return "empty-input";
  }
  return "unknown";
}

std::string concat(std::span<const std::string> parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += '\n';
    out += parts[i];
  }
  return out;
}

std::string concat(std::initializer_list<std::string_view> parts) {
  std::string out;
  bool first = true;
  for (auto p : parts) {
    if (!first) out += '\n';
    out += p;
    first = false;
  }
  return out;
}

Passage Passage::make(std::string text, int rank) {
  if (text::trim(text).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "passage text is blank");
  }
  if (rank < 1) throw Error(ErrorCode::kInvalidArgument, "passage rank must be >= 1");
  return Passage{std::move(text), rank};
}

RetrievalSet::RetrievalSet(std::vector<Passage> passages) : passages_(std::move(passages)) {
  if (passages_.empty()) throw Error(ErrorCode::kInvalidArgument, "retrieval set with k = 0");
  int prev = 0;
  for (const auto& p : passages_) {
    if (text::trim(p.text).empty()) {
      throw Error(ErrorCode::kInvalidArgument, "passage text is blank");
    }
    if (p.rank <= prev) {
      throw Error(ErrorCode::kInvalidArgument, "passage ranks must be strictly increasing from 1");
    }
    prev = p.rank;
  }
}

RetrievalSet RetrievalSet::from_texts(const std::vector<std::string>& texts) {
  std::vector<Passage> ps;
  ps.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    ps.push_back(Passage::make(texts[i], static_cast<int>(i) + 1));
  }
  return RetrievalSet(std::move(ps));
}

const Passage& RetrievalSet::at(int rank) const {
  if (rank < 1 || rank > k()) throw Error(ErrorCode::kPositionOutOfRange, "rank out of range");
  return passages_[static_cast<std::size_t>(rank - 1)];
}

RetrievalSet RetrievalSet::top(int count) const {
  if (count < 1 || count > k()) throw Error(ErrorCode::kInvalidArgument, "top(count) out of range");
  return RetrievalSet(std::vector<Passage>(passages_.begin(), passages_.begin() + count));
}

ReferenceAnswer::ReferenceAnswer(std::vector<std::string> accepted) : accepted_(std::move(accepted)) {
  if (accepted_.empty()) throw Error(ErrorCode::kInvalidArgument, "reference answer has no strings");
  for (const auto& a : accepted_) {
    if (a.empty()) throw Error(ErrorCode::kInvalidArgument, "empty reference answer string");
  }
}

bool contains_abstain(std::string_view t) { return text::contains_ci(t, kAbstainPhrase); }

Response Response::from_text(std::string t) {
  Response r;
  r.abstained = contains_abstain(t);
  r.text = std::move(t);
  return r;
}

Response Response::from_tokens(std::string t, std::vector<TokenId> tokens) {
  Response r = from_text(std::move(t));
  r.tokens = std::move(tokens);
  return r;
}

Response Response::abstain() { return from_text(std::string(kAbstainPhrase)); }

QualityScore::QualityScore(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "quality score outside [0, 1]");
  }
}

QualityScore QualityScore::from_percent(double percent) { return QualityScore(percent / 100.0); }

std::string_view to_string(Aggregator a) {
  switch (a) {
    case Aggregator::kKeyword: return "keyword";
    case Aggregator::kDecoding: return "decoding";
    case Aggregator::kVoting: return "voting";
    case Aggregator::kVanilla: return "vanilla";
  }
  return "unknown";
}

Aggregator parse_aggregator(std::string_view s) {
  if (s == "keyword") return Aggregator::kKeyword;
  if (s == "decoding") return Aggregator::kDecoding;
  if (s == "voting") return Aggregator::kVoting;
  if (s == "vanilla") return Aggregator::kVanilla;
  throw Error(ErrorCode::kInvalidArgument, "unknown aggregator: " + std::string(s));
}

std::string_view to_string(AttackKind a) {
  return a == AttackKind::kInjection ? "injection" : "modification";
}

AttackKind parse_attack_kind(std::string_view s) {
  if (s == "injection") return AttackKind::kInjection;
  if (s == "modification") return AttackKind::kModification;
  throw Error(ErrorCode::kInvalidArgument, "unknown threat model: " + std::string(s));
}

void DefenseConfig::validate() const {
  auto fail = [](const char* m) { throw Error(ErrorCode::kInvalidArgument, m); };
  if (k < 1) fail("k must be >= 1");
  if (omega < 1 || omega > k) throw Error(ErrorCode::kInvalidOmega, "omega must be in [1, k]");
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail("alpha must be in [0, 1]");
  if (beta < 1) fail("beta must be >= 1");
  if (!(eta >= 0.0)) fail("eta must be >= 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) fail("gamma must be in (0, 1]");
  if (t_max < 1) fail("t_max must be >= 1");
}

void AttackSpec::validate(int k) const {
  if (k_prime < 0 || k_prime > k) throw Error(ErrorCode::kInvalidArgument, "k' must be in [0, k]");
  if (static_cast<int>(malicious_passages.size()) != k_prime ||
      static_cast<int>(positions.size()) != k_prime) {
    throw Error(ErrorCode::kInvalidArgument, "attack needs exactly k' passages and positions");
  }
  std::set<int> seen;
  for (int p : positions) {
    if (p < 1 || p > k) throw Error(ErrorCode::kPositionOutOfRange, "attack position out of [1, k]");
    if (!seen.insert(p).second) throw Error(ErrorCode::kDuplicatePosition, "duplicate attack position");
  }
}

}  // namespace robustrag
