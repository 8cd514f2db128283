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

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "robustrag/core.hpp"

namespace robustrag {

/// Adjacent passages concatenated into one isolated model input.
struct PassageGroup {
  std::vector<int> members;  // original 1-based ranks, contiguous in the layout
  std::string text;

  friend bool operator==(const PassageGroup& a, const PassageGroup& b) { return a.members == b.members; }
};

struct Grouping {
  std::vector<PassageGroup> groups;
  int m = 0;
  int omega = 1;
};

/// Benign groups that survive one corruption layout; m_prime groups were
/// dropped for containing a malicious passage.
struct GroupCase {
  std::vector<PassageGroup> benign_groups;
  int m_prime = 0;
};

inline constexpr std::uint64_t kDefaultLayoutBudget = 1'000'000;

/// Group j covers ranks omega*(j-1)+1 .. min(j*omega, k); m = ceil(k/omega).
Grouping iso_group(const RetrievalSet& retrieval, int omega);

/// Every distinct set of surviving benign groups when k' passages are
/// injected at any C(k, k') rank combination (bottom k' benign ejected).
/// Cases with no surviving group are kept (their benign list is empty); the
/// call throws kNoBenignGroups only when every case is empty.
std::vector<GroupCase> benign_group_cases_injection(const RetrievalSet& retrieval, int omega, int k_prime,
                                                    std::uint64_t budget = kDefaultLayoutBudget);

/// Passage modification as removal of any k' originals followed by
/// injection at any k' ranks.
std::vector<GroupCase> benign_group_cases_modification(const RetrievalSet& retrieval, int omega,
                                                       int k_prime,
                                                       std::uint64_t budget = kDefaultLayoutBudget);

std::vector<GroupCase> benign_group_cases(const RetrievalSet& retrieval, AttackKind kind, int omega,
                                          int k_prime, std::uint64_t budget = kDefaultLayoutBudget);

/// C(n, r), saturating at UINT64_MAX.
std::uint64_t binomial(int n, int r);

/// Calls f with each sorted r-subset of {1..n}.
void for_each_combination(int n, int r, const std::function<void(std::span<const int>)>& f);

/// A corrupted ordering: entry i is the original rank at position i+1, or 0
/// for an attacker-controlled slot.
using Layout = std::vector<int>;

Layout injection_layout(int k, std::span<const int> positions);
/// `removed` originals are dropped before injecting at `positions`.
Layout modification_layout(int k, std::span<const int> removed, std::span<const int> positions);

/// Applies isolation to a layout and drops groups holding a 0 slot.
GroupCase surviving_groups(const RetrievalSet& retrieval, const Layout& layout, int omega);

}  // namespace robustrag
