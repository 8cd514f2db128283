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
#include <fstream>
#include <sstream>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "robustrag/mock_model.hpp"
#include "robustrag/model.hpp"

namespace robustrag::testing {

/// Counts invocations reaching the wrapped model.
class CountingModel final : public Model {
 public:
  explicit CountingModel(std::shared_ptr<Model> inner) : inner_(std::move(inner)) {}

  std::string id() const override { return inner_->id(); }
  bool exact_distributions() const override { return inner_->exact_distributions(); }
  TokenId eos() const override { return inner_->eos(); }
  std::string token_text(TokenId t) const override { return inner_->token_text(t); }
  TokenId intern(std::string_view t) override { return inner_->intern(t); }
  std::string detokenize(std::span<const TokenId> t) const override { return inner_->detokenize(t); }
  ModelReply invoke(const ModelRequest& r) override {
    ++calls;
    return inner_->invoke(r);
  }

  std::atomic<int> calls{0};

 private:
  std::shared_ptr<Model> inner_;
};

/// A fresh, empty directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("robustrag-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << body;
}

}  // namespace robustrag::testing
