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

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "robustrag/backends.hpp"

namespace robustrag {

using nlohmann::json;

namespace {

constexpr std::string_view kEosToken = "<|eos|>";

// Splits "scheme://host[:port][/prefix]" into the client host and path prefix.
std::pair<std::string, std::string> split_base_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "base URL needs a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, ""};
  std::string prefix = url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, path_start), prefix};
}

}  // namespace

HttpModel::HttpModel(HttpModelOptions options) : options_(std::move(options)) {
  if (options_.model.empty()) throw Error(ErrorCode::kInvalidArgument, "HTTP backend needs a model name");
  std::tie(host_, path_prefix_) = split_base_url(options_.base_url);
  tokens_.emplace_back(kEosToken);
  ids_.emplace(std::string(kEosToken), 0);
}

std::string HttpModel::id() const { return "http:" + options_.base_url + ":" + options_.model; }

std::string HttpModel::token_text(TokenId token) const {
  std::lock_guard lock(mu_);
  if (token < 0 || static_cast<std::size_t>(token) >= tokens_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "unknown token id");
  }
  return tokens_[static_cast<std::size_t>(token)];
}

TokenId HttpModel::intern(std::string_view token) {
  std::lock_guard lock(mu_);
  auto [it, inserted] = ids_.emplace(std::string(token), static_cast<TokenId>(tokens_.size()));
  if (inserted) tokens_.emplace_back(token);
  return it->second;
}

std::string HttpModel::detokenize(std::span<const TokenId> tokens) const {
  std::string out;
  for (TokenId t : tokens) {
    if (t != 0) out += token_text(t);
  }
  return out;
}

std::string HttpModel::post(const std::string& body) const {
  httplib::Client client(host_);
  client.set_connection_timeout(options_.timeout_seconds, 0);
  client.set_read_timeout(options_.timeout_seconds, 0);
  httplib::Headers headers;
  if (const char* key = std::getenv(options_.api_key_env.c_str()); key != nullptr && *key != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const std::string path = path_prefix_ + "/chat/completions";
  std::string last_error = "no attempt";
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(100 << attempt));
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) return res->body;
    last_error = "HTTP " + std::to_string(res->status);
    if (res->status < 500 && res->status != 429) break;
  }
  throw Error(ErrorCode::kBackendUnavailable, "chat completions request failed: " + last_error);
}

ModelReply HttpModel::invoke(const ModelRequest& req) {
  json body;
  body["model"] = options_.model;
  body["messages"] = json::array({{{"role", "user"}, {"content", render(req.prompt)}}});
  body["temperature"] = 0;

  switch (req.mode) {
    case RequestMode::kGenerate: {
      body["max_tokens"] = req.max_new_tokens;
      try {
        const json reply = json::parse(post(body.dump()));
        const auto& content = reply.at("choices").at(0).at("message").at("content");
        return Response::from_text(content.is_null() ? std::string() : content.get<std::string>());
      } catch (const json::exception& e) {
        throw Error(ErrorCode::kBackendUnavailable, std::string("malformed completion: ") + e.what());
      }
    }
    case RequestMode::kNextTokenDistribution:
    case RequestMode::kNextTokenGreedy: {
      body["max_tokens"] = 1;
      body["logprobs"] = true;
      body["top_logprobs"] = options_.top_logprobs;
      std::map<TokenId, double> probs;
      try {
        const json reply = json::parse(post(body.dump()));
        const auto& choice = reply.at("choices").at(0);
        const json* content = nullptr;
        if (choice.contains("logprobs") && !choice["logprobs"].is_null()) {
          content = &choice["logprobs"].at("content");
        }
        if (content == nullptr || content->empty()) {
          probs[eos()] = 1.0;  // nothing generated: the model stopped
        } else {
          for (const auto& cand : content->at(0).at("top_logprobs")) {
            const TokenId t = intern(cand.at("token").get<std::string>());
            probs[t] += std::exp(cand.at("logprob").get<double>());
          }
        }
      } catch (const json::exception& e) {
        throw Error(ErrorCode::kBackendUnavailable, std::string("malformed logprobs: ") + e.what());
      }
      double mass = 0.0;
      for (auto& kv : probs) {
        kv.second = std::min(kv.second, 1.0);
        mass += kv.second;
      }
      if (mass > 1.0) {
        // exp(logprob) rounding can overshoot 1; scale the overshoot away
        for (auto& kv : probs) kv.second /= mass;
        mass = 1.0;
      }
      int vocab;
      {
        std::lock_guard lock(mu_);
        vocab = static_cast<int>(tokens_.size());
      }
      TokenDistribution dist(std::move(probs), vocab, std::max(0.0, 1.0 - mass));
      if (req.mode == RequestMode::kNextTokenGreedy) return dist.argmax();
      return dist;
    }
    case RequestMode::kSequenceProbability:
      throw Error(ErrorCode::kCapabilityUnsupported,
                  "sequence probability needs an exact-distribution backend");
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown request mode");
}

}  // namespace robustrag
