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

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "robustrag/core.hpp"

namespace robustrag {

/// The instruction strings prepended to every prompt of one task family.
struct InstructionSet {
  std::string retrieval;     // answer from retrieved passages, may abstain
  std::string keyword;       // answer from an aggregated keyword list
  std::string no_retrieval;  // answer with no passages (decoding fallback)
};

/// Instruction sets keyed by Query::instruction_id. Ships "qa" and "mc";
/// a directory of <id>/{retrieval,keyword,no_retrieval}.txt overrides or adds.
class InstructionRegistry {
 public:
  static const InstructionRegistry& builtin();
  static InstructionRegistry load_directory(const std::filesystem::path& dir);

  void add(std::string id, InstructionSet set);
  const InstructionSet& get(const std::string& id) const;
  bool contains(const std::string& id) const { return sets_.count(id) != 0; }

 private:
  std::map<std::string, InstructionSet> sets_;
};

/// i1 ⊕ q ⊕ g
std::string group_prompt(const InstructionSet& ins, const Query& q, const std::string& group_text);
/// i2 ⊕ q ⊕ Sorted(W), keywords joined by ", ".
std::string keyword_prompt(const InstructionSet& ins, const Query& q,
                           const std::vector<std::string>& sorted_keywords);
std::string no_retrieval_prompt(const InstructionSet& ins, const Query& q);
/// Undefended baseline: every passage in one prompt.
std::string vanilla_prompt(const InstructionSet& ins, const Query& q, const RetrievalSet& retrieval);

}  // namespace robustrag
