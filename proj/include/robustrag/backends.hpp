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

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "robustrag/model.hpp"

namespace robustrag {

struct HttpModelOptions {
  /// e.g. "http://127.0.0.1:8000/v1"; "/chat/completions" is appended.
  std::string base_url;
  std::string model;
  /// Name of the environment variable holding the bearer token.
  std::string api_key_env = "ROBUSTRAG_API_KEY";
  int top_logprobs = 5;
  int max_retries = 2;
  int timeout_seconds = 60;
};

/// OpenAI-compatible chat-completions client. Next-token distributions come
/// from top-L logprobs and are truncated: the missing mass is reported, never
/// renormalised, and exact_distributions() is false so certification refuses
/// this backend. Tokens are interned into an open vocabulary; id 0 is EOS.
class HttpModel final : public Model {
 public:
  explicit HttpModel(HttpModelOptions options);

  std::string id() const override;
  bool exact_distributions() const override { return false; }
  TokenId eos() const override { return 0; }
  std::string token_text(TokenId token) const override;
  TokenId intern(std::string_view token) override;
  std::string detokenize(std::span<const TokenId> tokens) const override;
  ModelReply invoke(const ModelRequest& request) override;

 private:
  std::string post(const std::string& body) const;

  HttpModelOptions options_;
  std::string host_;
  std::string path_prefix_;
  mutable std::mutex mu_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

/// Transparent on-disk memoisation of any backend. One file per request key
/// (hex SHA-256 of the canonical request JSON); each entry carries a digest of
/// its payload and a mismatch is treated as a miss and rewritten.
class CachedModel final : public Model {
 public:
  CachedModel(std::shared_ptr<Model> inner, std::filesystem::path cache_dir);

  std::string id() const override { return inner_->id(); }
  bool exact_distributions() const override { return inner_->exact_distributions(); }
  TokenId eos() const override { return inner_->eos(); }
  std::string token_text(TokenId token) const override { return inner_->token_text(token); }
  TokenId intern(std::string_view token) override { return inner_->intern(token); }
  std::string detokenize(std::span<const TokenId> tokens) const override {
    return inner_->detokenize(tokens);
  }
  ModelReply invoke(const ModelRequest& request) override;

  /// Hex digest naming the cache file for `request`.
  std::string key(const ModelRequest& request) const;
  std::filesystem::path entry_path(const ModelRequest& request) const;

  std::size_t hits() const noexcept { return hits_.load(); }
  std::size_t misses() const noexcept { return misses_.load(); }
  std::size_t corrupt_entries() const noexcept { return corrupt_.load(); }

 private:
  std::shared_ptr<Model> inner_;
  std::filesystem::path dir_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
  std::atomic<std::size_t> corrupt_{0};
};

/// Convenience factory matching the cached(backend, dir) operation.
std::shared_ptr<Model> cached(std::shared_ptr<Model> backend, const std::filesystem::path& cache_dir);

}  // namespace robustrag
