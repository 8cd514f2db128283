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
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "robustrag/core.hpp"

namespace robustrag {

/// Next-token probabilities over a finite vocabulary. Tokens absent from the
/// map have probability zero. Truncated backends (top-L logprobs) report the
/// unaccounted mass in missing_mass() instead of renormalising.
class TokenDistribution {
 public:
  TokenDistribution() = default;
  TokenDistribution(std::map<TokenId, double> probs, int vocab_size, double missing_mass = 0.0);

  static TokenDistribution one_hot(TokenId token, int vocab_size);
  static TokenDistribution uniform(int vocab_size);

  const std::map<TokenId, double>& probs() const noexcept { return probs_; }
  int vocab_size() const noexcept { return vocab_size_; }
  double missing_mass() const noexcept { return missing_mass_; }
  bool exact() const noexcept { return missing_mass_ == 0.0; }
  double sum() const;

  double operator[](TokenId token) const;
  /// Highest probability; ties go to the lowest token id.
  TokenId argmax() const;

 private:
  std::map<TokenId, double> probs_;
  int vocab_size_ = 0;
  double missing_mass_ = 0.0;
};

/// A prompt plus the tokens decoded so far. The
/// rendered text is concat(text, detokenize(continuation)) when the
/// continuation is non-empty.
struct Prompt {
  std::string text;
  std::vector<TokenId> continuation;

  Prompt() = default;
  Prompt(std::string t) : text(std::move(t)) {}  // NOLINT(google-explicit-constructor)
  Prompt(const char* t) : text(t) {}             // NOLINT(google-explicit-constructor)
  Prompt(std::string t, std::vector<TokenId> c) : text(std::move(t)), continuation(std::move(c)) {}
};

enum class RequestMode { kGenerate, kNextTokenDistribution, kNextTokenGreedy, kSequenceProbability };
std::string_view to_string(RequestMode m);

struct ModelRequest {
  Prompt prompt;
  RequestMode mode = RequestMode::kGenerate;
  int max_new_tokens = 64;
  std::vector<TokenId> stop_tokens;
  std::string target;  // sequence_probability only
};

using ModelReply = std::variant<Response, TokenDistribution, TokenId, double>;

/// The three call modes of a generative model (text, next-token
/// distribution, greedy next token) plus teacher-forced sequence
/// probability. Implementations must be callable concurrently.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string id() const = 0;
  /// True when next_token_distribution returns full, normalised distributions.
  virtual bool exact_distributions() const = 0;
  virtual TokenId eos() const = 0;
  virtual std::string token_text(TokenId token) const = 0;
  /// Maps a token string back to an id, allocating one if the backend's
  /// vocabulary is open.
  virtual TokenId intern(std::string_view token) = 0;
  virtual std::string detokenize(std::span<const TokenId> tokens) const = 0;
  virtual ModelReply invoke(const ModelRequest& request) = 0;

  std::string render(const Prompt& prompt) const;

  Response generate(const Prompt& prompt, int max_new_tokens = 64);
  TokenDistribution next_token_distribution(const Prompt& prompt);
  TokenId next_token_greedy(const Prompt& prompt);
  double sequence_probability(const Prompt& prompt, std::string_view target);
};

}  // namespace robustrag
