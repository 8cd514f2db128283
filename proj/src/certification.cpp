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

#include "robustrag/certification.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <random>

namespace robustrag {

namespace {

constexpr std::pair<CertificationStatus, std::string_view> kStatusNames[] = {
    {CertificationStatus::kExact, "exact"},
    {CertificationStatus::kSubsampled, "subsampled"},
    {CertificationStatus::kFailedCase4, "failed-case4"},
    {CertificationStatus::kFailedPowersetCap, "failed-powerset-cap"},
    {CertificationStatus::kFailedNoBenignGroups, "failed-no-benign-groups"},
    {CertificationStatus::kFailedUnboundedKeywords, "failed-unbounded-keywords"},
};

QualityScore min_score(const std::vector<Response>& responses, const CertifyContext& ctx) {
  QualityScore lowest(1.0);
  for (const auto& r : responses) lowest = std::min(lowest, ctx.metric(r, ctx.answer));
  return lowest;
}

CertificationResult scored(ResponseSet responses, const CertifyContext& ctx) {
  CertificationResult out;
  out.tau = min_score(responses.to_vector(), ctx);
  out.responses = std::move(responses);
  return out;
}

}  // namespace

std::string_view to_string(CertificationStatus s) {
  for (const auto& [status, name] : kStatusNames) {
    if (status == s) return name;
  }
  return "unknown";
}

CertificationStatus parse_certification_status(std::string_view s) {
  for (const auto& [status, name] : kStatusNames) {
    if (name == s) return status;
  }
  throw Error(ErrorCode::kParse, "unknown certification status: " + std::string(s));
}

bool is_failure(CertificationStatus s) {
  return s != CertificationStatus::kExact && s != CertificationStatus::kSubsampled;
}

std::vector<Response> ResponseSet::to_vector() const {
  std::vector<Response> out;
  out.reserve(items_.size());
  for (const auto& kv : items_) out.push_back(kv.second);
  return out;
}

CertificationResult CertificationResult::failed(CertificationStatus status) {
  CertificationResult r;
  r.tau = QualityScore(0.0);
  r.status = status;
  return r;
}

GapCase classify_gap(double gap, double eta, int m_prime) {
  const double m = m_prime;
  if (gap > eta + m) return GapCase::kAlwaysTop;
  if (gap > std::abs(eta - m)) return GapCase::kEither;
  if (eta - m >= gap && gap > 0.0) return GapCase::kAlwaysNoRetrieval;
  return GapCase::kUndecided;
}

KeywordPartition partition_keywords(const KeywordTally& tally, double alpha, int beta, int k_eff) {
  KeywordPartition p;
  p.k_eff = k_eff;
  p.threshold = keyword_threshold(alpha, tally.n() + k_eff, beta);
  for (const auto& [w, c] : tally.counts()) {
    if (c >= p.threshold) {
      p.always.push_back(w);
    } else if (c >= p.threshold - k_eff) {
      p.contestable.push_back(w);
    }
  }
  return p;
}

CertificationResult certify_vote(const GroupCase& group_case, std::span<const std::string> choices,
                                 const CertifyContext& ctx) {
  const VoteCounts votes = vote_counts(ctx.query, group_case.benign_groups, choices, ctx.model, ctx.instructions);
  if (votes.total() == 0) return CertificationResult::failed(CertificationStatus::kFailedCase4);
  // without corruption the bound is the inference output, ties included
  if (group_case.m_prime > 0 && votes.gap() <= group_case.m_prime) {
    return CertificationResult::failed(CertificationStatus::kFailedCase4);
  }
  ResponseSet r;
  r.insert(Response::from_text(votes.winner()));
  return scored(std::move(r), ctx);
}

CertificationResult certify_keyword(const GroupCase& group_case, const CertifyContext& ctx) {
  const auto responses =
      group_responses(ctx.query, group_case.benign_groups, ctx.model, ctx.instructions, kMaxResponseTokens);
  const KeywordTally tally = tally_keywords(responses);

  ResponseSet r;
  for (int k_eff = 0; k_eff <= group_case.m_prime; ++k_eff) {
    if (tally.n() + k_eff == 0) {
      r.insert(Response::abstain());
      continue;
    }
    const KeywordPartition part = partition_keywords(tally, ctx.config.alpha, ctx.config.beta, k_eff);
    // a keyword unseen by benign groups can reach the threshold on attacker votes alone
    if (k_eff > 0 && part.threshold - k_eff <= 0.0) {
      return CertificationResult::failed(CertificationStatus::kFailedUnboundedKeywords);
    }
    if (part.contestable.size() > kMaxContestableKeywords) {
      return CertificationResult::failed(CertificationStatus::kFailedPowersetCap);
    }
    const std::size_t subsets = std::size_t{1} << part.contestable.size();
    for (std::size_t mask = 0; mask < subsets; ++mask) {
      std::vector<std::string> kws = part.always;
      for (std::size_t i = 0; i < part.contestable.size(); ++i) {
        if ((mask >> i) & 1U) kws.push_back(part.contestable[i]);
      }
      std::sort(kws.begin(), kws.end());
      r.insert(keyword_answer(ctx.query, kws, ctx.model, ctx.instructions, kMaxResponseTokens));
    }
  }
  return scored(std::move(r), ctx);
}

CertificationResult certify_decoding(const GroupCase& group_case, const CertifyContext& ctx,
                                     std::size_t node_budget) {
  if (!ctx.model.exact_distributions()) {
    throw Error(ErrorCode::kCapabilityUnsupported, "certification needs exact next-token distributions");
  }
  const int m_prime = group_case.m_prime;
  std::vector<PassageGroup> active;
  for (std::size_t j : abstain_filter(ctx.query, group_case.benign_groups, ctx.config, ctx.model,
                                      ctx.instructions)) {
    active.push_back(group_case.benign_groups[j]);
  }
  ResponseSet r;
  if (active.empty() && m_prime == 0) {
    r.insert(Response::abstain());
    return scored(std::move(r), ctx);
  }

  const TokenId eos = ctx.model.eos();
  auto complete = [&](const std::vector<TokenId>& partial) {
    r.insert(Response::from_tokens(ctx.model.detokenize(partial), partial));
  };

  std::vector<std::vector<TokenId>> stack{{}};
  std::size_t expanded = 0;
  while (!stack.empty()) {
    std::vector<TokenId> partial = std::move(stack.back());
    stack.pop_back();
    if (static_cast<int>(partial.size()) >= ctx.config.t_max) {
      complete(partial);
      continue;
    }
    if (++expanded > node_budget) {
      throw Error(ErrorCode::kBudgetExceeded, "decoding certification exceeded its node budget");
    }
    const auto [top, runner] = group_score_sum(ctx.query, active, partial, ctx.model, ctx.instructions).top2();
    auto nor = [&] { return no_retrieval_token(ctx.query, partial, ctx.model, ctx.instructions); };

    std::vector<TokenId> next;
    if (m_prime == 0) {
      next.push_back(decisive(top.score, runner.score, ctx.config.eta) ? top.token : nor());
    } else {
      switch (classify_gap(top.score - runner.score, ctx.config.eta, m_prime)) {
        case GapCase::kAlwaysTop:
          next.push_back(top.token);
          break;
        case GapCase::kEither: {
          const TokenId fallback = nor();
          next.push_back(fallback);
          if (fallback != top.token) next.push_back(top.token);  // top-1 explored first
          break;
        }
        case GapCase::kAlwaysNoRetrieval:
          next.push_back(nor());
          break;
        case GapCase::kUndecided:
          return CertificationResult::failed(CertificationStatus::kFailedCase4);
      }
    }
    for (TokenId t : next) {
      if (t == eos) {
        complete(partial);
        continue;
      }
      std::vector<TokenId> child = partial;
      child.push_back(t);
      stack.push_back(std::move(child));
    }
  }

  if (r.size() <= kSubsampleThreshold) return scored(std::move(r), ctx);

  const std::vector<Response> all = r.to_vector();
  std::vector<Response> sample;
  std::mt19937_64 rng(ctx.config.seed);
  std::sample(all.begin(), all.end(), std::back_inserter(sample), kSubsampleSize, rng);
  CertificationResult out;
  out.tau = min_score(sample, ctx);
  out.responses = std::move(r);
  out.status = CertificationStatus::kSubsampled;
  return out;
}

CertificationResult certify(const Query& query, const RetrievalSet& retrieval, const CertifyRequest& request,
                            const ReferenceAnswer& answer, const DefenseConfig& config, Model& model,
                            const Metric& metric, const InstructionRegistry& registry) {
  if (config.aggregator == Aggregator::kVanilla) {
    throw Error(ErrorCode::kInvalidArgument, "the vanilla baseline has no certification");
  }
  if (config.aggregator == Aggregator::kVoting && request.choices.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "voting certification needs at least two choices");
  }

  std::vector<GroupCase> cases;
  try {
    cases = benign_group_cases(retrieval, request.attack_kind, config.omega, request.k_prime);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNoBenignGroups) throw;
    return CertificationResult::failed(CertificationStatus::kFailedNoBenignGroups);
  }

  const CertifyContext ctx{query, answer, config, model, metric, registry.get(query.instruction_id)};
  CertificationResult merged;
  merged.tau = QualityScore(1.0);
  merged.case_count = static_cast<int>(cases.size());
  for (const auto& c : cases) {
    CertificationResult one;
    if (c.benign_groups.empty()) {
      one = CertificationResult::failed(CertificationStatus::kFailedNoBenignGroups);
    } else {
      switch (config.aggregator) {
        case Aggregator::kVoting: one = certify_vote(c, request.choices, ctx); break;
        case Aggregator::kKeyword: one = certify_keyword(c, ctx); break;
        case Aggregator::kDecoding: one = certify_decoding(c, ctx); break;
        case Aggregator::kVanilla: break;
      }
    }
    if (is_failure(one.status)) {
      one.case_count = merged.case_count;
      return one;
    }
    merged.tau = std::min(merged.tau, one.tau);
    merged.responses.merge(one.responses);
    if (one.status == CertificationStatus::kSubsampled) merged.status = CertificationStatus::kSubsampled;
  }
  return merged;
}

}  // namespace robustrag
