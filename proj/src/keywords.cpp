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

#include "robustrag/keywords.hpp"

#include <algorithm>
#include <iterator>
#include <cctype>

#include "robustrag/text.hpp"

namespace robustrag {

namespace {

constexpr std::string_view kStopwords[] = {
    "a",       "about",   "above",  "after",   "against", "all",     "along",   "am",
    "among",   "an",      "and",    "any",     "are",     "around",  "as",      "at",
    "be",      "been",    "before", "behind",  "being",   "below",   "beneath", "beside",
    "between", "beyond",  "both",   "but",     "by",      "can",     "could",   "did",
    "do",      "does",    "doing",  "down",    "during",  "each",    "either",  "every",
    "for",     "from",    "had",    "has",     "have",    "having",  "he",      "her",
    "hers",    "herself", "him",    "himself", "his",     "i",       "if",      "in",
    "inside",  "into",    "is",     "it",      "its",     "itself",  "may",     "me",
    "might",   "must",    "my",     "myself",  "neither", "no",      "nor",     "of",
    "off",     "on",      "onto",   "or",      "our",     "ours",    "out",     "over",
    "shall",   "she",     "should", "so",      "some",    "than",    "that",    "the",
    "their",   "theirs",  "them",   "these",   "they",    "this",    "those",   "through",
    "to",      "toward",  "under",  "until",   "up",      "upon",    "us",      "was",
    "we",      "were",    "what",   "which",   "while",   "who",     "whom",    "whose",
    "will",    "with",    "within", "without", "would",   "yet",     "you",     "your",
    "yours",   "yourself", "yourselves", "whether", "via", "per",
};

constexpr bool is_separator(char c) {
  switch (c) {
    case '.': case ',': case ';': case ':': case '!': case '?':
    case '(': case ')': case '"': case '[': case ']': case '{': case '}':
      return true;
    default:
      return false;
  }
}

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::string strip_edges(std::string_view w) {
  std::size_t b = 0, e = w.size();
  while (b < e && !is_alnum(w[b])) ++b;
  while (e > b && !is_alnum(w[e - 1])) --e;
  return std::string(w.substr(b, e - b));
}

}  // namespace

bool is_stopword(std::string_view word) {
  static const std::vector<std::string_view> sorted = [] {
    std::vector<std::string_view> v(std::begin(kStopwords), std::end(kStopwords));
    std::sort(v.begin(), v.end());
    return v;
  }();
  return std::binary_search(sorted.begin(), sorted.end(), word);
}

KeywordSet get_unique_keywords(std::string_view text) {
  KeywordSet out;
  std::vector<std::string> run;
  auto flush = [&] {
    if (run.size() >= 2) out.insert(text::join(run, " "));
    run.clear();
  };

  const std::string lowered = text::to_lower(text);
  std::string word;
  auto end_word = [&] {
    if (word.empty()) return;
    std::string w = strip_edges(word);
    word.clear();
    if (w.empty()) return;
    if (is_stopword(w)) {
      flush();
      return;
    }
    out.insert(w);
    run.push_back(std::move(w));
  };

  for (char c : lowered) {
    if (is_separator(c)) {
      end_word();
      flush();
    } else if (std::isspace(static_cast<unsigned char>(c)) != 0) {
      end_word();
    } else {
      word.push_back(c);
    }
  }
  end_word();
  flush();
  return out;
}

void KeywordTally::add(const KeywordSet& keywords) {
  ++n_;
  for (const auto& w : keywords) ++counts_[w];
}

int KeywordTally::count(const std::string& keyword) const {
  auto it = counts_.find(keyword);
  return it == counts_.end() ? 0 : it->second;
}

std::vector<std::string> KeywordTally::retained(double threshold) const {
  std::vector<std::string> out;
  for (const auto& [w, c] : counts_) {
    if (c >= threshold) out.push_back(w);
  }
  return out;  // std::map iteration is already byte-wise ascending
}

double keyword_threshold(double alpha, int n, int beta) {
  return std::min(alpha * static_cast<double>(n), static_cast<double>(beta));
}

}  // namespace robustrag
