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

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "robustrag/core.hpp"
#include "robustrag/isolation.hpp"
#include "robustrag/keywords.hpp"
#include "robustrag/model.hpp"
#include "robustrag/prompts.hpp"

namespace robustrag {

/// One generate call per group with the retrieval instruction.
std::vector<Response> group_responses(const Query& query, std::span<const PassageGroup> groups,
                                      Model& model, const InstructionSet& ins, int max_new_tokens);

/// Tally of the non-abstained responses.
KeywordTally tally_keywords(std::span<const Response> responses);

/// Final keyword-stage answer over an already sorted keyword list.
Response keyword_answer(const Query& query, const std::vector<std::string>& sorted_keywords,
                        Model& model, const InstructionSet& ins, int max_new_tokens);

/// Keyword aggregation over explicit groups. n = 0 yields an abstained
/// response without a second model call.
Response keyword_aggregate(const Query& query, std::span<const PassageGroup> groups,
                           const DefenseConfig& config, Model& model, const InstructionSet& ins);

Response rrag_keyword(const Query& query, const RetrievalSet& retrieval, const DefenseConfig& config,
                      Model& model,
                      const InstructionRegistry& registry = InstructionRegistry::builtin());

/// Element-wise sum of next-token distributions.
class ScoreVector {
 public:
  explicit ScoreVector(int vocab_size) : vocab_size_(vocab_size) {}

  void add(const TokenDistribution& d);
  double operator[](TokenId t) const;
  int vocab_size() const noexcept { return vocab_size_; }

  struct Entry {
    TokenId token = 0;
    double score = 0.0;
  };
  /// Largest and second-largest coordinates, ties to the lowest token id.
  /// With a single-token vocabulary the runner-up is {-1, 0}.
  std::pair<Entry, Entry> top2() const;

 private:
  std::map<TokenId, double> sums_;
  int vocab_size_;
};

/// Decoding decision threshold shared by inference and certification.
inline bool decisive(double top1, double top2, double eta) { return top1 - top2 > eta; }

/// Indices of groups whose abstain-phrase probability is strictly below gamma.
std::vector<std::size_t> abstain_filter(const Query& query, std::span<const PassageGroup> groups,
                                        const DefenseConfig& config, Model& model,
                                        const InstructionSet& ins);

/// Greedy next token of the retrieval-free prompt given the tokens so far.
TokenId no_retrieval_token(const Query& query, const std::vector<TokenId>& partial, Model& model,
                           const InstructionSet& ins);

/// Sum of the group distributions for the given partial response.
ScoreVector group_score_sum(const Query& query, std::span<const PassageGroup> groups,
                            const std::vector<TokenId>& partial, Model& model, const InstructionSet& ins);

Response decoding_aggregate(const Query& query, std::span<const PassageGroup> groups,
                            const DefenseConfig& config, Model& model, const InstructionSet& ins);

Response rrag_decoding(const Query& query, const RetrievalSet& retrieval, const DefenseConfig& config,
                       Model& model,
                       const InstructionRegistry& registry = InstructionRegistry::builtin());

/// First label (in choice order) occurring in text as a standalone token.
/// Matching is case-sensitive.
std::optional<std::string> match_choice(std::string_view text, std::span<const std::string> choices);

class VoteCounts {
 public:
  explicit VoteCounts(std::vector<std::string> choices);

  void add(const Response& response);
  int count(const std::string& label) const;
  int total() const noexcept { return total_; }
  const std::vector<std::string>& choices() const noexcept { return choices_; }

  /// Highest count, ties to the lexicographically smallest label.
  /// Throws kNoVotes when nothing was counted.
  std::string winner() const;
  /// Winner's count minus the best count among the other labels.
  int gap() const;

 private:
  std::vector<std::string> choices_;
  std::vector<int> counts_;
  int total_ = 0;
};

VoteCounts vote_counts(const Query& query, std::span<const PassageGroup> groups,
                       std::span<const std::string> choices, Model& model, const InstructionSet& ins);

std::string rrag_vote(const Query& query, const RetrievalSet& retrieval,
                      std::span<const std::string> choices, const DefenseConfig& config, Model& model,
                      const InstructionRegistry& registry = InstructionRegistry::builtin());

/// Undefended baseline: all passages in one prompt.
Response rrag_vanilla(const Query& query, const RetrievalSet& retrieval, const DefenseConfig& config,
                      Model& model,
                      const InstructionRegistry& registry = InstructionRegistry::builtin());

/// Generation length for text responses.
inline constexpr int kMaxResponseTokens = 64;

}  // namespace robustrag
