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

#include "robustrag/model.hpp"

#include <cmath>

namespace robustrag {

namespace {
constexpr double kSumTolerance = 1e-9;
}

TokenDistribution::TokenDistribution(std::map<TokenId, double> probs, int vocab_size,
                                     double missing_mass)
    : probs_(std::move(probs)), vocab_size_(vocab_size), missing_mass_(missing_mass) {
  if (vocab_size_ < 1) throw Error(ErrorCode::kInvalidArgument, "vocab_size must be >= 1");
  for (const auto& [t, p] : probs_) {
    if (t < 0 || t >= vocab_size_) {
      throw Error(ErrorCode::kInvalidArgument, "token id outside the vocabulary");
    }
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "probability outside [0, 1]");
  }
  if (!(missing_mass_ >= 0.0 && missing_mass_ <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "missing mass outside [0, 1]");
  }
  const double s = sum();
  if (missing_mass_ == 0.0) {
    if (std::abs(s - 1.0) > kSumTolerance) {
      throw Error(ErrorCode::kInvalidArgument, "exact distribution does not sum to 1");
    }
  } else if (s > 1.0 + kSumTolerance) {
    throw Error(ErrorCode::kInvalidArgument, "truncated distribution has mass above 1");
  }
}

TokenDistribution TokenDistribution::one_hot(TokenId token, int vocab_size) {
  return TokenDistribution({{token, 1.0}}, vocab_size);
}

TokenDistribution TokenDistribution::uniform(int vocab_size) {
  std::map<TokenId, double> m;
  for (TokenId t = 0; t < vocab_size; ++t) m[t] = 1.0 / vocab_size;
  // absorb rounding so the exact-sum invariant holds
  double s = 0.0;
  for (const auto& kv : m) s += kv.second;
  m[0] += 1.0 - s;
  return TokenDistribution(std::move(m), vocab_size);
}

double TokenDistribution::sum() const {
  double s = 0.0;
  for (const auto& kv : probs_) s += kv.second;
  return s;
}

double TokenDistribution::operator[](TokenId token) const {
  auto it = probs_.find(token);
  return it == probs_.end() ? 0.0 : it->second;
}

TokenId TokenDistribution::argmax() const {
  TokenId best = 0;
  double best_p = -1.0;
  // map iteration is in ascending id order; strict > keeps the lowest id on ties
  for (const auto& [t, p] : probs_) {
    if (p > best_p) {
      best = t;
      best_p = p;
    }
  }
  if (best_p <= 0.0) {
    // all-zero mass: lowest id carrying zero probability
    return 0;
  }
  return best;
}

std::string_view to_string(RequestMode m) {
  switch (m) {
    case RequestMode::kGenerate: return "generate";
    case RequestMode::kNextTokenDistribution: return "next_token_distribution";
    case RequestMode::kNextTokenGreedy: return "next_token_greedy";
    case RequestMode::kSequenceProbability: return "sequence_probability";
  }
  return "unknown";
}

std::string Model::render(const Prompt& prompt) const {
  if (prompt.continuation.empty()) return prompt.text;
  return concat({prompt.text, detokenize(prompt.continuation)});
}

Response Model::generate(const Prompt& prompt, int max_new_tokens) {
  if (max_new_tokens < 1) throw Error(ErrorCode::kInvalidArgument, "max_new_tokens must be >= 1");
  ModelRequest req{prompt, RequestMode::kGenerate, max_new_tokens, {}, {}};
  return std::get<Response>(invoke(req));
}

TokenDistribution Model::next_token_distribution(const Prompt& prompt) {
  ModelRequest req{prompt, RequestMode::kNextTokenDistribution, 1, {}, {}};
  return std::get<TokenDistribution>(invoke(req));
}

TokenId Model::next_token_greedy(const Prompt& prompt) {
  ModelRequest req{prompt, RequestMode::kNextTokenGreedy, 1, {}, {}};
  return std::get<TokenId>(invoke(req));
}

double Model::sequence_probability(const Prompt& prompt, std::string_view target) {
  ModelRequest req{prompt, RequestMode::kSequenceProbability, 1, {}, std::string(target)};
  return std::get<double>(invoke(req));
}

}  // namespace robustrag
