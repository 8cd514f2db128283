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

#include "robustrag/isolation.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace robustrag {

namespace {

std::string group_text(const RetrievalSet& retrieval, const std::vector<int>& members) {
  std::vector<std::string> parts;
  parts.reserve(members.size());
  for (int r : members) parts.push_back(retrieval.at(r).text);
  return concat(parts);
}

void check_args(const RetrievalSet& retrieval, int omega, int k_prime) {
  if (omega < 1 || omega > retrieval.k()) throw Error(ErrorCode::kInvalidOmega, "omega must be in [1, k]");
  if (k_prime < 0 || k_prime > retrieval.k()) {
    throw Error(ErrorCode::kInvalidArgument, "k' must be in [0, k]");
  }
}

using CaseKey = std::vector<std::vector<int>>;

std::vector<GroupCase> collect(const RetrievalSet& retrieval, int omega,
                               const std::function<void(const std::function<void(const Layout&)>&)>& layouts) {
  std::set<CaseKey> seen;
  std::vector<GroupCase> cases;
  layouts([&](const Layout& layout) {
    GroupCase c = surviving_groups(retrieval, layout, omega);
    CaseKey key;
    for (const auto& g : c.benign_groups) key.push_back(g.members);
    if (seen.insert(std::move(key)).second) cases.push_back(std::move(c));
  });
  std::sort(cases.begin(), cases.end(), [](const GroupCase& a, const GroupCase& b) {
    CaseKey ka, kb;
    for (const auto& g : a.benign_groups) ka.push_back(g.members);
    for (const auto& g : b.benign_groups) kb.push_back(g.members);
    return ka < kb;
  });
  const bool any_benign = std::any_of(cases.begin(), cases.end(),
                                      [](const GroupCase& c) { return !c.benign_groups.empty(); });
  if (!any_benign) throw Error(ErrorCode::kNoBenignGroups, "every corruption case removes all groups");
  return cases;
}

}  // namespace

std::uint64_t binomial(int n, int r) {
  if (r < 0 || r > n) return 0;
  r = std::min(r, n - r);
  std::uint64_t result = 1;
  for (int i = 1; i <= r; ++i) {
    const std::uint64_t num = static_cast<std::uint64_t>(n - r + i);
    if (result > std::numeric_limits<std::uint64_t>::max() / num) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    result = result * num / static_cast<std::uint64_t>(i);
  }
  return result;
}

void for_each_combination(int n, int r, const std::function<void(std::span<const int>)>& f) {
  if (r < 0 || r > n) return;
  std::vector<int> idx(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) idx[static_cast<std::size_t>(i)] = i + 1;
  while (true) {
    f(idx);
    int i = r - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - r + i + 1) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < r; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

Grouping iso_group(const RetrievalSet& retrieval, int omega) {
  const int k = retrieval.k();
  if (omega < 1 || omega > k) throw Error(ErrorCode::kInvalidOmega, "omega must be in [1, k]");
  Grouping g;
  g.omega = omega;
  g.m = (k + omega - 1) / omega;
  for (int j = 1; j <= g.m; ++j) {
    PassageGroup pg;
    for (int pos = omega * (j - 1) + 1; pos <= std::min(j * omega, k); ++pos) {
      pg.members.push_back(pos);
    }
    std::vector<std::string> parts;
    for (int pos = omega * (j - 1) + 1; pos <= std::min(j * omega, k); ++pos) {
      parts.push_back(retrieval.at(pos).text);
    }
    pg.text = concat(parts);
    g.groups.push_back(std::move(pg));
  }
  return g;
}

Layout injection_layout(int k, std::span<const int> positions) {
  Layout layout(static_cast<std::size_t>(k), -1);
  for (int p : positions) layout[static_cast<std::size_t>(p - 1)] = 0;
  int next = 1;
  for (auto& slot : layout) {
    if (slot != 0) slot = next++;
  }
  return layout;
}

Layout modification_layout(int k, std::span<const int> removed, std::span<const int> positions) {
  std::vector<int> kept;
  for (int r = 1; r <= k; ++r) {
    if (std::find(removed.begin(), removed.end(), r) == removed.end()) kept.push_back(r);
  }
  Layout layout(static_cast<std::size_t>(k), -1);
  for (int p : positions) layout[static_cast<std::size_t>(p - 1)] = 0;
  std::size_t next = 0;
  for (auto& slot : layout) {
    if (slot != 0) slot = kept.at(next++);
  }
  return layout;
}

GroupCase surviving_groups(const RetrievalSet& retrieval, const Layout& layout, int omega) {
  const int k = static_cast<int>(layout.size());
  GroupCase c;
  for (int start = 0; start < k; start += omega) {
    const int end = std::min(start + omega, k);
    std::vector<int> members(layout.begin() + start, layout.begin() + end);
    if (std::find(members.begin(), members.end(), 0) != members.end()) {
      ++c.m_prime;
      continue;
    }
    c.benign_groups.push_back(PassageGroup{members, group_text(retrieval, members)});
  }
  return c;
}

std::vector<GroupCase> benign_group_cases_injection(const RetrievalSet& retrieval, int omega, int k_prime,
                                                    std::uint64_t budget) {
  check_args(retrieval, omega, k_prime);
  const int k = retrieval.k();
  if (binomial(k, k_prime) > budget) {
    throw Error(ErrorCode::kBudgetExceeded, "C(k, k') exceeds the enumeration budget");
  }
  return collect(retrieval, omega, [&](const std::function<void(const Layout&)>& emit) {
    for_each_combination(k, k_prime, [&](std::span<const int> pos) { emit(injection_layout(k, pos)); });
  });
}

std::vector<GroupCase> benign_group_cases_modification(const RetrievalSet& retrieval, int omega,
                                                       int k_prime, std::uint64_t budget) {
  check_args(retrieval, omega, k_prime);
  const int k = retrieval.k();
  const std::uint64_t c = binomial(k, k_prime);
  if (c > budget || (c != 0 && c > budget / c)) {
    throw Error(ErrorCode::kBudgetExceeded, "C(k, k')^2 exceeds the enumeration budget");
  }
  return collect(retrieval, omega, [&](const std::function<void(const Layout&)>& emit) {
    for_each_combination(k, k_prime, [&](std::span<const int> removed) {
      const std::vector<int> rem(removed.begin(), removed.end());
      for_each_combination(k, k_prime, [&](std::span<const int> pos) {
        emit(modification_layout(k, rem, pos));
      });
    });
  });
}

std::vector<GroupCase> benign_group_cases(const RetrievalSet& retrieval, AttackKind kind, int omega,
                                          int k_prime, std::uint64_t budget) {
  return kind == AttackKind::kInjection
             ? benign_group_cases_injection(retrieval, omega, k_prime, budget)
             : benign_group_cases_modification(retrieval, omega, k_prime, budget);
}

}  // namespace robustrag
