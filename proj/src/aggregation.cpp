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

#include "robustrag/aggregation.hpp"

#include <algorithm>
#include <cctype>

namespace robustrag {

std::vector<Response> group_responses(const Query& query, std::span<const PassageGroup> groups,
                                      Model& model, const InstructionSet& ins, int max_new_tokens) {
  std::vector<Response> out;
  out.reserve(groups.size());
  for (const auto& g : groups) out.push_back(model.generate(group_prompt(ins, query, g.text), max_new_tokens));
  return out;
}

KeywordTally tally_keywords(std::span<const Response> responses) {
  KeywordTally tally;
  for (const auto& r : responses) {
    if (r.abstained || contains_abstain(r.text)) continue;
    tally.add_response_text(r.text);
  }
  return tally;
}

Response keyword_answer(const Query& query, const std::vector<std::string>& sorted_keywords,
                        Model& model, const InstructionSet& ins, int max_new_tokens) {
  return model.generate(keyword_prompt(ins, query, sorted_keywords), max_new_tokens);
}

Response keyword_aggregate(const Query& query, std::span<const PassageGroup> groups,
                           const DefenseConfig& config, Model& model, const InstructionSet& ins) {
  const auto responses = group_responses(query, groups, model, ins, kMaxResponseTokens);
  const KeywordTally tally = tally_keywords(responses);
  if (tally.n() == 0) return Response::abstain();
  const double mu = keyword_threshold(config.alpha, tally.n(), config.beta);
  return keyword_answer(query, tally.retained(mu), model, ins, kMaxResponseTokens);
}

Response rrag_keyword(const Query& query, const RetrievalSet& retrieval, const DefenseConfig& config,
                      Model& model, const InstructionRegistry& registry) {
  const Grouping g = iso_group(retrieval, config.omega);
  return keyword_aggregate(query, g.groups, config, model, registry.get(query.instruction_id));
}

void ScoreVector::add(const TokenDistribution& d) {
  vocab_size_ = std::max(vocab_size_, d.vocab_size());
  for (const auto& [t, p] : d.probs()) sums_[t] += p;
}

double ScoreVector::operator[](TokenId t) const {
  auto it = sums_.find(t);
  return it == sums_.end() ? 0.0 : it->second;
}

std::pair<ScoreVector::Entry, ScoreVector::Entry> ScoreVector::top2() const {
  // Best coordinate other than `skip`, counting absent ids as zero.
  auto best_excluding = [this](TokenId skip) {
    Entry best{-1, -1.0};
    for (const auto& [t, s] : sums_) {
      if (t != skip && s > best.score) best = {t, s};
    }
    TokenId absent = 0;
    while (absent < vocab_size_ && (absent == skip || sums_.count(absent) != 0)) ++absent;
    if (absent < vocab_size_ && (best.score < 0.0 || (best.score == 0.0 && absent < best.token))) {
      best = {absent, 0.0};
    }
    if (best.token < 0) best = {-1, 0.0};
    return best;
  };
  const Entry first = best_excluding(-1);
  return {first, best_excluding(first.token)};
}

std::vector<std::size_t> abstain_filter(const Query& query, std::span<const PassageGroup> groups,
                                        const DefenseConfig& config, Model& model,
                                        const InstructionSet& ins) {
  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < groups.size(); ++j) {
    const Prompt prompt(group_prompt(ins, query, groups[j].text));
    double p = 0.0;
    try {
      p = model.sequence_probability(prompt, kAbstainPhrase);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kCapabilityUnsupported || !config.allow_approximate) throw;
      // approximate backends: fall back to the greedy response itself
      p = model.generate(prompt, kMaxResponseTokens).abstained ? 1.0 : 0.0;
    }
    if (p < config.gamma) kept.push_back(j);
  }
  return kept;
}

TokenId no_retrieval_token(const Query& query, const std::vector<TokenId>& partial, Model& model,
                           const InstructionSet& ins) {
  return model.next_token_greedy(Prompt(no_retrieval_prompt(ins, query), partial));
}

ScoreVector group_score_sum(const Query& query, std::span<const PassageGroup> groups,
                            const std::vector<TokenId>& partial, Model& model, const InstructionSet& ins) {
  ScoreVector sum(0);
  for (const auto& g : groups) {
    sum.add(model.next_token_distribution(Prompt(group_prompt(ins, query, g.text), partial)));
  }
  return sum;
}

Response decoding_aggregate(const Query& query, std::span<const PassageGroup> groups,
                            const DefenseConfig& config, Model& model, const InstructionSet& ins) {
  if (!model.exact_distributions() && !config.allow_approximate) {
    throw Error(ErrorCode::kCapabilityUnsupported,
                "decoding aggregation needs exact distributions; enable approximate mode explicitly");
  }
  std::vector<PassageGroup> active;
  for (std::size_t j : abstain_filter(query, groups, config, model, ins)) active.push_back(groups[j]);
  if (active.empty()) return Response::abstain();

  std::vector<TokenId> partial;
  while (static_cast<int>(partial.size()) < config.t_max) {
    const auto [top, runner] = group_score_sum(query, active, partial, model, ins).top2();
    const TokenId next = decisive(top.score, runner.score, config.eta)
                             ? top.token
                             : no_retrieval_token(query, partial, model, ins);
    if (next == model.eos()) break;
    partial.push_back(next);
  }
  return Response::from_tokens(model.detokenize(partial), partial);
}

Response rrag_decoding(const Query& query, const RetrievalSet& retrieval, const DefenseConfig& config,
                       Model& model, const InstructionRegistry& registry) {
  const Grouping g = iso_group(retrieval, config.omega);
  return decoding_aggregate(query, g.groups, config, model, registry.get(query.instruction_id));
}

std::optional<std::string> match_choice(std::string_view text, std::span<const std::string> choices) {
  auto boundary = [&](std::size_t i) {
    return i >= text.size() || std::isalnum(static_cast<unsigned char>(text[i])) == 0;
  };
  for (const auto& label : choices) {
    if (label.empty()) continue;
    for (std::size_t pos = text.find(label); pos != std::string_view::npos;
         pos = text.find(label, pos + 1)) {
      const bool left = pos == 0 || boundary(pos - 1);
      if (left && boundary(pos + label.size())) return label;
    }
  }
  return std::nullopt;
}

VoteCounts::VoteCounts(std::vector<std::string> choices)
    : choices_(std::move(choices)), counts_(choices_.size(), 0) {
  if (choices_.size() < 2) throw Error(ErrorCode::kInvalidArgument, "voting needs at least two choices");
}

void VoteCounts::add(const Response& response) {
  if (response.abstained) return;
  const auto label = match_choice(response.text, choices_);
  if (!label) return;
  const auto it = std::find(choices_.begin(), choices_.end(), *label);
  ++counts_[static_cast<std::size_t>(it - choices_.begin())];
  ++total_;
}

int VoteCounts::count(const std::string& label) const {
  const auto it = std::find(choices_.begin(), choices_.end(), label);
  return it == choices_.end() ? 0 : counts_[static_cast<std::size_t>(it - choices_.begin())];
}

std::string VoteCounts::winner() const {
  if (total_ == 0) throw Error(ErrorCode::kNoVotes, "no group produced a recognisable choice");
  std::size_t best = 0;
  for (std::size_t i = 1; i < choices_.size(); ++i) {
    if (counts_[i] > counts_[best] || (counts_[i] == counts_[best] && choices_[i] < choices_[best])) best = i;
  }
  return choices_[best];
}

int VoteCounts::gap() const {
  const std::string w = winner();
  int runner = 0;
  for (std::size_t i = 0; i < choices_.size(); ++i) {
    if (choices_[i] != w) runner = std::max(runner, counts_[i]);
  }
  return count(w) - runner;
}

VoteCounts vote_counts(const Query& query, std::span<const PassageGroup> groups,
                       std::span<const std::string> choices, Model& model, const InstructionSet& ins) {
  VoteCounts votes(std::vector<std::string>(choices.begin(), choices.end()));
  for (const auto& r : group_responses(query, groups, model, ins, kMaxResponseTokens)) votes.add(r);
  return votes;
}

std::string rrag_vote(const Query& query, const RetrievalSet& retrieval,
                      std::span<const std::string> choices, const DefenseConfig& config, Model& model,
                      const InstructionRegistry& registry) {
  const Grouping g = iso_group(retrieval, config.omega);
  return vote_counts(query, g.groups, choices, model, registry.get(query.instruction_id)).winner();
}

Response rrag_vanilla(const Query& query, const RetrievalSet& retrieval, const DefenseConfig& /*config*/,
                      Model& model, const InstructionRegistry& registry) {
  return model.generate(vanilla_prompt(registry.get(query.instruction_id), query, retrieval),
                        kMaxResponseTokens);
}

}  // namespace robustrag
