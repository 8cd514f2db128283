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

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "robustrag/aggregation.hpp"
#include "robustrag/core.hpp"
#include "robustrag/isolation.hpp"
#include "robustrag/metric.hpp"
#include "robustrag/model.hpp"
#include "robustrag/prompts.hpp"

namespace robustrag {

enum class CertificationStatus {
  kExact,
  kSubsampled,
  kFailedCase4,
  kFailedPowersetCap,
  kFailedNoBenignGroups,
  kFailedUnboundedKeywords,
};
std::string_view to_string(CertificationStatus s);
CertificationStatus parse_certification_status(std::string_view s);
bool is_failure(CertificationStatus s);

/// Responses keyed by text.
class ResponseSet {
 public:
  void insert(const Response& r) { items_.emplace(r.text, r); }
  void merge(const ResponseSet& other) { items_.insert(other.items_.begin(), other.items_.end()); }
  bool contains(const Response& r) const { return items_.count(r.text) != 0; }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }
  std::vector<Response> to_vector() const;

 private:
  std::map<std::string, Response> items_;
};

struct CertificationResult {
  QualityScore tau;
  ResponseSet responses;
  CertificationStatus status = CertificationStatus::kExact;
  int case_count = 1;

  static CertificationResult failed(CertificationStatus status);
};

/// How a benign top-2 gap behaves once m' corrupted groups each add up to
/// one unit of mass per token.
enum class GapCase {
  kAlwaysTop,          // gap > eta + m'
  kEither,             // eta + m' >= gap > |eta - m'|
  kAlwaysNoRetrieval,  // eta - m' >= gap > 0
  kUndecided,          // none of the above
};
GapCase classify_gap(double gap, double eta, int m_prime);

/// Keyword partition for one effective corruption count.
struct KeywordPartition {
  std::vector<std::string> always;       // count >= threshold
  std::vector<std::string> contestable;  // threshold > count >= threshold - k_eff
  double threshold = 0.0;
  int k_eff = 0;
};
KeywordPartition partition_keywords(const KeywordTally& tally, double alpha, int beta, int k_eff);

inline constexpr std::size_t kMaxContestableKeywords = 15;
inline constexpr std::size_t kSubsampleThreshold = 1000;
inline constexpr std::size_t kSubsampleSize = 100;
inline constexpr std::size_t kDefaultNodeBudget = 200'000;

/// Everything a single-case certifier needs besides the case itself.
struct CertifyContext {
  const Query& query;
  const ReferenceAnswer& answer;
  const DefenseConfig& config;
  Model& model;
  const Metric& metric;
  const InstructionSet& instructions;
};

CertificationResult certify_vote(const GroupCase& group_case, std::span<const std::string> choices,
                                 const CertifyContext& ctx);
CertificationResult certify_keyword(const GroupCase& group_case, const CertifyContext& ctx);
/// Depth-first search over partial responses; throws kBudgetExceeded after
/// `node_budget` expansions.
CertificationResult certify_decoding(const GroupCase& group_case, const CertifyContext& ctx,
                                     std::size_t node_budget = kDefaultNodeBudget);

struct CertifyRequest {
  AttackKind attack_kind = AttackKind::kInjection;
  int k_prime = 0;
  std::vector<std::string> choices;  // voting only
};

/// Runs the aggregator-specific certifier over every benign-group case and
/// keeps the smallest bound. Failures short-circuit with tau = 0.
CertificationResult certify(const Query& query, const RetrievalSet& retrieval, const CertifyRequest& request,
                            const ReferenceAnswer& answer, const DefenseConfig& config, Model& model,
                            const Metric& metric = metric_substring,
                            const InstructionRegistry& registry = InstructionRegistry::builtin());

}  // namespace robustrag
