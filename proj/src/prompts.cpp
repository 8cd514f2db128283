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

#include "robustrag/prompts.hpp"

#include <fstream>
#include <sstream>

namespace robustrag {

namespace {

InstructionRegistry make_builtin() {
  InstructionRegistry r;
  r.add("qa", InstructionSet{
                  "answer the query given retrieved passages, say 'I don't know' if no relevant "
                  "information found",
                  "answer the query using provided keywords",
                  "answer query",
              });
  r.add("mc", InstructionSet{
                  "answer the multiple-choice query with one option given retrieved passages, say "
                  "'I don't know' if no relevant information found",
                  "answer the multiple-choice query using provided keywords",
                  "answer the multiple-choice query",
              });
  return r;
}

std::string read_asset(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::kIo, "cannot read instruction asset " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  std::string s = ss.str();
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

}  // namespace

const InstructionRegistry& InstructionRegistry::builtin() {
  static const InstructionRegistry registry = make_builtin();
  return registry;
}

InstructionRegistry InstructionRegistry::load_directory(const std::filesystem::path& dir) {
  InstructionRegistry r = builtin();
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "instruction directory not found: " + dir.string());
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_directory()) continue;
    const auto& p = entry.path();
    InstructionSet set{read_asset(p / "retrieval.txt"), read_asset(p / "keyword.txt"),
                       read_asset(p / "no_retrieval.txt")};
    r.add(p.filename().string(), std::move(set));
  }
  return r;
}

void InstructionRegistry::add(std::string id, InstructionSet set) { sets_[std::move(id)] = std::move(set); }

const InstructionSet& InstructionRegistry::get(const std::string& id) const {
  auto it = sets_.find(id);
  if (it == sets_.end()) throw Error(ErrorCode::kInvalidArgument, "unknown instruction id: " + id);
  return it->second;
}

std::string group_prompt(const InstructionSet& ins, const Query& q, const std::string& group_text) {
  return concat({ins.retrieval, q.question, group_text});
}

std::string keyword_prompt(const InstructionSet& ins, const Query& q,
                           const std::vector<std::string>& sorted_keywords) {
  std::string list;
  for (std::size_t i = 0; i < sorted_keywords.size(); ++i) {
    if (i) list += ", ";
    list += sorted_keywords[i];
  }
  return concat({ins.keyword, q.question, list});
}

std::string no_retrieval_prompt(const InstructionSet& ins, const Query& q) {
  return concat({ins.no_retrieval, q.question});
}

std::string vanilla_prompt(const InstructionSet& ins, const Query& q, const RetrievalSet& retrieval) {
  std::vector<std::string> parts{ins.retrieval, q.question};
  for (const auto& p : retrieval.passages()) parts.push_back(p.text);
  return concat(parts);
}

}  // namespace robustrag
