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

#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "robustrag/backends.hpp"
#include "robustrag/hashing.hpp"

namespace robustrag {

using nlohmann::json;

namespace {

json token_strings(Model& m, const std::vector<TokenId>& tokens) {
  json out = json::array();
  for (TokenId t : tokens) out.push_back(m.token_text(t));
  return out;
}

json key_material(Model& inner, const ModelRequest& req) {
  json k;
  k["backend"] = inner.id();
  k["mode"] = std::string(to_string(req.mode));
  k["prompt"] = req.prompt.text;
  k["continuation"] = token_strings(inner, req.prompt.continuation);
  if (req.mode == RequestMode::kGenerate) {
    k["max_new_tokens"] = req.max_new_tokens;
    k["stop"] = token_strings(inner, req.stop_tokens);
  }
  if (req.mode == RequestMode::kSequenceProbability) k["target"] = req.target;
  return k;
}

json encode(Model& inner, const ModelReply& reply) {
  json p;
  if (const auto* r = std::get_if<Response>(&reply)) {
    p["type"] = "response";
    p["text"] = r->text;
    p["tokens"] = r->tokens ? token_strings(inner, *r->tokens) : json(nullptr);
  } else if (const auto* d = std::get_if<TokenDistribution>(&reply)) {
    p["type"] = "distribution";
    json probs = json::array();
    for (const auto& [t, pr] : d->probs()) probs.push_back(json::array({inner.token_text(t), pr}));
    p["probs"] = std::move(probs);
    p["vocab_size"] = d->vocab_size();
    p["missing_mass"] = d->missing_mass();
  } else if (const auto* t = std::get_if<TokenId>(&reply)) {
    p["type"] = "token";
    p["token"] = inner.token_text(*t);
  } else {
    p["type"] = "probability";
    p["value"] = std::get<double>(reply);
  }
  return p;
}

ModelReply decode(Model& inner, const json& p) {
  const auto type = p.at("type").get<std::string>();
  if (type == "response") {
    auto text = p.at("text").get<std::string>();
    if (p.at("tokens").is_null()) return Response::from_text(std::move(text));
    std::vector<TokenId> tokens;
    for (const auto& s : p.at("tokens")) tokens.push_back(inner.intern(s.get<std::string>()));
    return Response::from_tokens(std::move(text), std::move(tokens));
  }
  if (type == "distribution") {
    std::map<TokenId, double> probs;
    int vocab = p.at("vocab_size").get<int>();
    for (const auto& e : p.at("probs")) {
      const TokenId t = inner.intern(e.at(0).get<std::string>());
      probs[t] = e.at(1).get<double>();
      vocab = std::max(vocab, t + 1);
    }
    return TokenDistribution(std::move(probs), vocab, p.at("missing_mass").get<double>());
  }
  if (type == "token") return inner.intern(p.at("token").get<std::string>());
  if (type == "probability") return p.at("value").get<double>();
  throw Error(ErrorCode::kCacheCorrupt, "unknown cache payload type " + type);
}

}  // namespace

CachedModel::CachedModel(std::shared_ptr<Model> inner, std::filesystem::path cache_dir)
    : inner_(std::move(inner)), dir_(std::move(cache_dir)) {
  if (!inner_) throw Error(ErrorCode::kInvalidArgument, "cached() needs a backend");
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec || !std::filesystem::is_directory(dir_)) {
    throw Error(ErrorCode::kIo, "cache directory not writable: " + dir_.string());
  }
}

std::string CachedModel::key(const ModelRequest& request) const {
  return sha256_hex(key_material(*inner_, request).dump());
}

std::filesystem::path CachedModel::entry_path(const ModelRequest& request) const {
  return dir_ / (key(request) + ".json");
}

ModelReply CachedModel::invoke(const ModelRequest& request) {
  const json material = key_material(*inner_, request);
  const std::string digest = sha256_hex(material.dump());
  const auto path = dir_ / (digest + ".json");

  if (std::ifstream in(path); in) {
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      const json entry = json::parse(ss.str());
      const json& payload = entry.at("payload");
      if (entry.at("key") == material && entry.at("digest").get<std::string>() == sha256_hex(payload.dump())) {
        ++hits_;
        return decode(*inner_, payload);
      }
    } catch (const json::exception&) {
    } catch (const Error&) {
    }
    ++corrupt_;
  }

  ++misses_;
  ModelReply reply = inner_->invoke(request);
  json payload = encode(*inner_, reply);
  json entry;
  entry["key"] = material;
  entry["digest"] = sha256_hex(payload.dump());
  entry["payload"] = std::move(payload);

  // write-then-rename keeps readers from seeing a torn entry
  std::ostringstream tmp_name;
  tmp_name << digest << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id()) << '.'
           << std::random_device{}();
  const auto tmp = dir_ / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write cache entry " + tmp.string());
    out << entry.dump();
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot commit cache entry " + path.string());
  }
  return reply;
}

std::shared_ptr<Model> cached(std::shared_ptr<Model> backend, const std::filesystem::path& cache_dir) {
  return std::make_shared<CachedModel>(std::move(backend), cache_dir);
}

}  // namespace robustrag
