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

#include "robustrag/mock_model.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "robustrag/hashing.hpp"
#include "robustrag/text.hpp"

namespace robustrag {

using nlohmann::json;

MockTable& MockTable::name(std::string n) {
  name_ = std::move(n);
  return *this;
}

MockTable& MockTable::eos_token(std::string token) {
  eos_ = std::move(token);
  return *this;
}

MockTable& MockTable::vocabulary(std::vector<std::string> tokens) {
  vocab_ = std::move(tokens);
  return *this;
}

MockTable& MockTable::on(std::vector<std::string> all_of, std::string output) {
  rules_.push_back(Rule{std::move(all_of), std::move(output), {}});
  return *this;
}

MockTable& MockTable::on_steps(std::vector<std::string> all_of, std::vector<StepDistribution> steps) {
  rules_.push_back(Rule{std::move(all_of), std::nullopt, std::move(steps)});
  return *this;
}

MockTable MockTable::from_json_text(std::string_view json_text) {
  MockTable t;
  try {
    const json j = json::parse(json_text);
    t.name_ = j.value("name", std::string("mock"));
    t.eos_ = j.value("eos", std::string("</s>"));
    if (j.contains("vocab")) t.vocab_ = j.at("vocab").get<std::vector<std::string>>();
    for (const auto& r : j.at("rules")) {
      Rule rule;
      const auto& m = r.at("match");
      if (m.is_string()) {
        rule.all_of.push_back(m.get<std::string>());
      } else {
        rule.all_of = m.get<std::vector<std::string>>();
      }
      if (r.contains("output")) {
        rule.output = r.at("output").get<std::string>();
      } else {
        rule.steps = r.at("steps").get<std::vector<StepDistribution>>();
      }
      t.rules_.push_back(std::move(rule));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("mock table: ") + e.what());
  }
  return t;
}

MockTable MockTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open mock table " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string MockTable::to_json_text() const {
  json j;
  j["name"] = name_;
  j["eos"] = eos_;
  j["vocab"] = vocab_;
  j["rules"] = json::array();
  for (const auto& r : rules_) {
    json jr;
    jr["match"] = r.all_of;
    if (r.output) {
      jr["output"] = *r.output;
    } else {
      jr["steps"] = r.steps;
    }
    j["rules"].push_back(std::move(jr));
  }
  return j.dump();
}

MockModel::MockModel(MockTable table) : table_(std::move(table)) {
  for (const auto& t : table_.extra_vocabulary()) add_token(t);
  eos_ = add_token(table_.eos());
  for (const auto& w : text::split_ws(kAbstainPhrase)) add_token(w);
  for (const auto& r : table_.rules()) {
    if (r.output) {
      for (const auto& w : text::split_ws(*r.output)) add_token(w);
    }
    for (const auto& step : r.steps) {
      for (const auto& kv : step) add_token(kv.first);
    }
  }
  const int v = vocab_size();
  for (const auto& r : table_.rules()) {
    CompiledRule cr;
    cr.all_of = r.all_of;
    if (r.output) {
      for (const auto& w : text::split_ws(*r.output)) {
        cr.steps.push_back(TokenDistribution::one_hot(ids_.at(w), v));
      }
    } else {
      for (const auto& step : r.steps) {
        std::map<TokenId, double> m;
        for (const auto& [tok, p] : step) m[ids_.at(tok)] += p;
        cr.steps.emplace_back(std::move(m), v);
      }
    }
    rules_.push_back(std::move(cr));
  }
  id_ = "mock:" + table_.table_name() + ":" + sha256_hex(table_.to_json_text()).substr(0, 16);
}

TokenId MockModel::add_token(const std::string& token) {
  auto [it, inserted] = ids_.emplace(token, static_cast<TokenId>(tokens_.size()));
  if (inserted) tokens_.push_back(token);
  return it->second;
}

std::string MockModel::token_text(TokenId token) const {
  if (token < 0 || token >= vocab_size()) throw Error(ErrorCode::kInvalidArgument, "unknown token id");
  return tokens_[static_cast<std::size_t>(token)];
}

std::optional<TokenId> MockModel::find_token(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

TokenId MockModel::intern(std::string_view token) {
  auto id = find_token(token);
  if (!id) throw Error(ErrorCode::kInvalidArgument, "token outside mock vocabulary: " + std::string(token));
  return *id;
}

std::optional<std::vector<TokenId>> MockModel::tokenize(std::string_view t) const {
  std::vector<TokenId> out;
  for (const auto& w : text::split_ws(t)) {
    auto id = find_token(w);
    if (!id) return std::nullopt;
    out.push_back(*id);
  }
  return out;
}

std::string MockModel::detokenize(std::span<const TokenId> tokens) const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += token_text(tokens[i]);
  }
  return out;
}

TokenDistribution MockModel::distribution(const std::string& rendered, std::size_t step) const {
  for (const auto& r : rules_) {
    bool match = true;
    for (const auto& s : r.all_of) {
      if (rendered.find(s) == std::string::npos) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    if (step < r.steps.size()) return r.steps[step];
    return TokenDistribution::one_hot(eos_, vocab_size());
  }
  throw Error(ErrorCode::kNoRuleMatched, "no mock rule matches prompt: " + rendered.substr(0, 120));
}

ModelReply MockModel::invoke(const ModelRequest& req) {
  switch (req.mode) {
    case RequestMode::kNextTokenDistribution:
      return distribution(render(req.prompt), req.prompt.continuation.size());
    case RequestMode::kNextTokenGreedy:
      return distribution(render(req.prompt), req.prompt.continuation.size()).argmax();
    case RequestMode::kGenerate: {
      if (req.max_new_tokens < 1) {
        throw Error(ErrorCode::kInvalidArgument, "max_new_tokens must be >= 1");
      }
      Prompt p = req.prompt;
      std::vector<TokenId> out;
      for (int i = 0; i < req.max_new_tokens; ++i) {
        const TokenId t = distribution(render(p), p.continuation.size()).argmax();
        if (t == eos_) break;
        if (std::find(req.stop_tokens.begin(), req.stop_tokens.end(), t) != req.stop_tokens.end()) break;
        out.push_back(t);
        p.continuation.push_back(t);
      }
      return Response::from_tokens(detokenize(out), out);
    }
    case RequestMode::kSequenceProbability: {
      const auto target = tokenize(req.target);
      if (!target || target->empty()) {
        if (target && target->empty()) {
          throw Error(ErrorCode::kInvalidArgument, "sequence_probability target has no tokens");
        }
        return 0.0;
      }
      Prompt p = req.prompt;
      double prob = 1.0;
      for (TokenId t : *target) {
        prob *= distribution(render(p), p.continuation.size())[t];
        if (prob == 0.0) break;
        p.continuation.push_back(t);
      }
      return prob;
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown request mode");
}

}  // namespace robustrag
