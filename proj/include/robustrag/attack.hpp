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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "robustrag/aggregation.hpp"
#include "robustrag/core.hpp"
#include "robustrag/metric.hpp"
#include "robustrag/model.hpp"
#include "robustrag/prompts.hpp"

namespace robustrag {

/// Instruction-injection passage naming the target answer, repeated
/// `repeat` times.
Passage build_pia(const Query& query, const std::string& target_answer, int repeat);
/// `repeat` copies of supplied supporting text for an incorrect answer.
Passage build_poison(const Query& query, const std::string& fake_support_text, int repeat);

/// Places malicious passages at the given 1-based ranks; the bottom k'
/// originals are ejected and survivors keep their relative order.
RetrievalSet inject(const RetrievalSet& retrieval, std::span<const Passage> malicious,
                    std::span<const int> positions);
/// Drops the originals at `replaced` ranks, then injects at `positions`.
RetrievalSet modify(const RetrievalSet& retrieval, std::span<const int> replaced,
                    std::span<const Passage> malicious, std::span<const int> positions);

RetrievalSet apply_attack(const RetrievalSet& retrieval, const AttackSpec& spec);

/// Case-insensitive hit of the attacker's target in the response.
bool target_hit(const Response& response, const std::string& target_text);

struct AttackOutcome {
  RetrievalSet corrupted_retrieval;
  Response response;
  QualityScore score;
  bool target_hit = false;
};

/// The deployed inference for `config.aggregator`, returning the answer
/// as a response (voting answers are the winning label).
Response run_inference(const Query& query, const RetrievalSet& retrieval, std::span<const std::string> choices,
                       const DefenseConfig& config, Model& model,
                       const InstructionRegistry& registry = InstructionRegistry::builtin());

/// One attacker-controlled decoding script: per-step one-hot tokens, with
/// EOS past the end. `abstain` makes the group report the abstain phrase
/// with probability one instead.
struct AdversarialScript {
  std::vector<TokenId> tokens;
  bool abstain = false;
};

/// Wraps a model so any prompt containing a script marker is answered from
/// that script. Other prompts pass through.
class ScriptedOverlay final : public Model {
 public:
  ScriptedOverlay(Model& inner, std::vector<AdversarialScript> scripts, int vocab_size);

  /// Passage text that routes a group to script `index`.
  static std::string marker(std::size_t index);

  std::string id() const override { return inner_.id() + "+scripted"; }
  bool exact_distributions() const override { return inner_.exact_distributions(); }
  TokenId eos() const override { return inner_.eos(); }
  std::string token_text(TokenId token) const override { return inner_.token_text(token); }
  TokenId intern(std::string_view token) override { return inner_.intern(token); }
  std::string detokenize(std::span<const TokenId> tokens) const override { return inner_.detokenize(tokens); }
  ModelReply invoke(const ModelRequest& request) override;

 private:
  const AdversarialScript* script_for(const std::string& prompt_text) const;
  TokenId token_at(const AdversarialScript& script, std::size_t step) const;

  Model& inner_;
  std::vector<AdversarialScript> scripts_;
  int vocab_size_;
};

/// Every token sequence of length up to `max_len` over `tokens` (EOS implied
/// after the last), plus one abstaining script.
std::vector<AdversarialScript> all_scripts(std::span<const TokenId> tokens, int max_len);

struct OracleResult {
  QualityScore min_score{1.0};
  std::vector<int> argmin_positions;
  std::vector<std::size_t> argmin_payloads;  // pool indices
  std::vector<Response> responses;           // one per evaluated attack
  std::uint64_t attacks_evaluated = 0;
};

inline constexpr std::uint64_t kDefaultOracleBudget = 1'000'000;

/// Runs the deployed inference under every (rank combination x pool
/// assignment) injection of k' passages and reports the worst score.
OracleResult oracle_attack(const Query& query, const RetrievalSet& retrieval, std::span<const Passage> pool,
                           int k_prime, std::span<const std::string> choices, const ReferenceAnswer& answer,
                           const DefenseConfig& config, Model& model, const Metric& metric = metric_substring,
                           std::uint64_t budget = kDefaultOracleBudget,
                           const InstructionRegistry& registry = InstructionRegistry::builtin());

/// Decoding oracle: attacker passages are script markers answered by a
/// ScriptedOverlay over `model` with the given vocabulary size.
OracleResult oracle_attack_scripts(const Query& query, const RetrievalSet& retrieval,
                                   std::span<const AdversarialScript> scripts, int vocab_size, int k_prime,
                                   const ReferenceAnswer& answer, const DefenseConfig& config, Model& model,
                                   const Metric& metric = metric_substring,
                                   std::uint64_t budget = kDefaultOracleBudget,
                                   const InstructionRegistry& registry = InstructionRegistry::builtin());

}  // namespace robustrag
