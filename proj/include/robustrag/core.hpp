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

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace robustrag {

enum class ErrorCode {
  kInvalidArgument,
  kInvalidOmega,
  kNoBenignGroups,
  kBudgetExceeded,
  kBackendUnavailable,
  kNoRuleMatched,
  kCapabilityUnsupported,
  kCacheCorrupt,
  kNoVotes,
  kPositionOutOfRange,
  kDuplicatePosition,
  kInvalidTarget,
  kParse,
  kIo,
  kEmptyInput,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Joins parts with a single newline. An empty sequence yields "".
std::string concat(std::span<const std::string> parts);
std::string concat(std::initializer_list<std::string_view> parts);

struct Passage {
  std::string text;
  int rank = 1;  // 1-based retrieval position

  static Passage make(std::string text, int rank);
};

class RetrievalSet {
 public:
  RetrievalSet() = default;
  /// Validates: non-empty, non-blank passages, strictly increasing ranks.
  explicit RetrievalSet(std::vector<Passage> passages);
  /// Assigns ranks 1..k in order.
  static RetrievalSet from_texts(const std::vector<std::string>& texts);

  int k() const noexcept { return static_cast<int>(passages_.size()); }
  const std::vector<Passage>& passages() const noexcept { return passages_; }
  const Passage& at(int rank) const;  // 1-based
  RetrievalSet top(int count) const;

 private:
  std::vector<Passage> passages_;
};

struct Query {
  std::string id;
  std::string question;
  std::string instruction_id = "qa";
};

class ReferenceAnswer {
 public:
  ReferenceAnswer() = default;
  explicit ReferenceAnswer(std::vector<std::string> accepted);
  const std::vector<std::string>& accepted() const noexcept { return accepted_; }

 private:
  std::vector<std::string> accepted_;
};

using TokenId = std::int32_t;

inline constexpr std::string_view kAbstainPhrase = "I don't know";

/// Case-insensitive membership test for the abstain phrase.
bool contains_abstain(std::string_view text);

struct Response {
  std::string text;
  std::optional<std::vector<TokenId>> tokens;
  bool abstained = false;

  static Response from_text(std::string text);
  static Response from_tokens(std::string text, std::vector<TokenId> tokens);
  static Response abstain();

  friend bool operator==(const Response& a, const Response& b) {
    return a.text == b.text;
  }
};

/// A non-negative quality score normalised to [0, 1].
class QualityScore {
 public:
  constexpr QualityScore() = default;
  explicit QualityScore(double value);
  /// For judge-style scores on a 0..100 scale.
  static QualityScore from_percent(double percent);
  constexpr double value() const noexcept { return value_; }

  friend constexpr auto operator<=>(QualityScore, QualityScore) = default;

 private:
  double value_ = 0.0;
};

enum class Aggregator { kKeyword, kDecoding, kVoting, kVanilla };
std::string_view to_string(Aggregator a);
Aggregator parse_aggregator(std::string_view s);

enum class AttackKind { kInjection, kModification };
std::string_view to_string(AttackKind a);
AttackKind parse_attack_kind(std::string_view s);

struct DefenseConfig {
  int k = 10;
  int omega = 1;
  double alpha = 0.2;
  int beta = 3;
  double eta = 0.0;
  double gamma = 0.99;
  int t_max = 20;
  Aggregator aggregator = Aggregator::kKeyword;
  std::uint64_t seed = 0;
  /// Permits decoding aggregation on truncated-logprob backends (inference only).
  bool allow_approximate = false;

  void validate() const;
};

struct AttackSpec {
  AttackKind kind = AttackKind::kInjection;
  int k_prime = 1;
  std::vector<Passage> malicious_passages;
  std::vector<int> positions;  // 1-based ranks

  void validate(int k) const;
};

}  // namespace robustrag
