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
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "robustrag/model.hpp"

namespace robustrag {

/// Ordered rule table driving MockModel. A rule fires when every string in
/// `all_of` occurs in the rendered prompt; the first firing rule wins. A rule
/// either emits a fixed output (one token per whitespace-separated word) or
/// a per-step sequence of next-token distributions. Steps past the end of a
/// rule yield EOS with probability one.
class MockTable {
 public:
  using StepDistribution = std::map<std::string, double>;

  struct Rule {
    std::vector<std::string> all_of;
    std::optional<std::string> output;
    std::vector<StepDistribution> steps;
  };

  MockTable& name(std::string n);
  MockTable& eos_token(std::string token);
  /// Extra vocabulary entries, allocated ids in order before any rule words.
  MockTable& vocabulary(std::vector<std::string> tokens);
  MockTable& on(std::vector<std::string> all_of, std::string output);
  MockTable& on_steps(std::vector<std::string> all_of, std::vector<StepDistribution> steps);

  static MockTable from_json_text(std::string_view json_text);
  static MockTable load(const std::string& path);
  std::string to_json_text() const;

  const std::string& table_name() const noexcept { return name_; }
  const std::string& eos() const noexcept { return eos_; }
  const std::vector<std::string>& extra_vocabulary() const noexcept { return vocab_; }
  const std::vector<Rule>& rules() const noexcept { return rules_; }

 private:
  std::string name_ = "mock";
  std::string eos_ = "</s>";
  std::vector<std::string> vocab_;
  std::vector<Rule> rules_;
};

/// Deterministic exact-distribution backend over a MockTable. Tokens are
/// whitespace-separated words; detokenisation joins with single spaces.
/// generate() is greedy replay of next_token_distribution().
class MockModel final : public Model {
 public:
  explicit MockModel(MockTable table);

  std::string id() const override { return id_; }
  bool exact_distributions() const override { return true; }
  TokenId eos() const override { return eos_; }
  std::string token_text(TokenId token) const override;
  TokenId intern(std::string_view token) override;
  std::string detokenize(std::span<const TokenId> tokens) const override;
  ModelReply invoke(const ModelRequest& request) override;

  int vocab_size() const noexcept { return static_cast<int>(tokens_.size()); }
  std::optional<TokenId> find_token(std::string_view token) const;
  /// Whitespace tokenisation; nullopt if any word is outside the vocabulary.
  std::optional<std::vector<TokenId>> tokenize(std::string_view text) const;
  const MockTable& table() const noexcept { return table_; }

 private:
  struct CompiledRule {
    std::vector<std::string> all_of;
    std::vector<TokenDistribution> steps;
  };

  TokenId add_token(const std::string& token);
  TokenDistribution distribution(const std::string& rendered, std::size_t step) const;

  MockTable table_;
  std::string id_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
  TokenId eos_ = 0;
  std::vector<CompiledRule> rules_;
};

}  // namespace robustrag
