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
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace robustrag {

using KeywordSet = std::set<std::string>;

/// True for articles, conjunctions, prepositions, auxiliaries, pronouns and
/// determiners. Expects a lowercase word.
bool is_stopword(std::string_view word);

/// Informative words plus every maximal run of two or more consecutive
/// informative words (space-joined). Lowercased; punctuation separates runs.
KeywordSet get_unique_keywords(std::string_view text);

/// Keyword counts over non-abstained responses plus the number n of such
/// responses. Each response contributes at most one count per keyword.
class KeywordTally {
 public:
  void add(const KeywordSet& keywords);
  void add_response_text(std::string_view text) { add(get_unique_keywords(text)); }

  int n() const noexcept { return n_; }
  int count(const std::string& keyword) const;
  const std::map<std::string, int>& counts() const noexcept { return counts_; }

  /// Keywords with count >= threshold, sorted byte-wise ascending.
  std::vector<std::string> retained(double threshold) const;

 private:
  std::map<std::string, int> counts_;
  int n_ = 0;
};

/// min(alpha * n, beta)
double keyword_threshold(double alpha, int n, int beta);

}  // namespace robustrag
