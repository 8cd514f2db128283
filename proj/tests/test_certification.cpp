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

#include <algorithm>

#include "doctest.h"
#include "robustrag/attack.hpp"
#include "robustrag/certification.hpp"
#include "robustrag/mock_model.hpp"

using namespace robustrag;

namespace {

const Query kQuery{"q1", "Which mountain is tallest?"};
const ReferenceAnswer kEverest({"Everest"});
const InstructionSet& qa() { return InstructionRegistry::builtin().get("qa"); }

GroupCase make_case(const std::vector<std::string>& texts, int m_prime) {
  GroupCase c;
  c.benign_groups = iso_group(RetrievalSet::from_texts(texts), 1).groups;
  c.m_prime = m_prime;
  return c;
}

}  // namespace

TEST_CASE("gap classification") {
  CHECK(classify_gap(1.5, 0.0, 1) == GapCase::kAlwaysTop);  // 1.5 > 0 + 1
  CHECK(classify_gap(1.5, 1.0, 1) == GapCase::kEither);     // 2 >= 1.5 > 0
  CHECK(classify_gap(1.0, 0.0, 2) == GapCase::kUndecided);  // 1 > 2, 2 >= 1 > 2 and -2 >= 1 all fail
  CHECK(classify_gap(0.5, 3.0, 1) == GapCase::kAlwaysNoRetrieval);  // 2 >= 0.5 > 0
  CHECK(classify_gap(0.0, 3.0, 1) == GapCase::kUndecided);
  CHECK(classify_gap(2.0, 1.0, 1) == GapCase::kEither);  // boundary eta + m' is inclusive
}

TEST_CASE("keyword partition around the threshold") {
  KeywordTally t;
  t.add({"everest", "mountain", "sagarmatha"});
  t.add({"everest", "mountain"});
  // n + k_eff = 3 with alpha = 1, beta = 2 gives a threshold of 2
  const auto p = partition_keywords(t, 1.0, 2, 1);
  CHECK(p.threshold == doctest::Approx(2.0));
  CHECK(p.always == std::vector<std::string>{"everest", "mountain"});
  CHECK(p.contestable == std::vector<std::string>{"sagarmatha"});

  // a word below threshold - k_eff is dropped from both lists
  KeywordTally u;
  for (int i = 0; i < 6; ++i) u.add({"everest"});
  u.add({"fuji"});
  const auto q = partition_keywords(u, 0.5, 3, 1);  // threshold 3, contestable needs >= 2
  CHECK(q.always == std::vector<std::string>{"everest"});
  CHECK(q.contestable.empty());
}

TEST_CASE("keyword certification enumerates contestable subsets") {
  MockTable t;
  t.on({"using provided keywords", "sagarmatha"}, "Everest also Sagarmatha")
      .on({"using provided keywords"}, "Everest")
      .on({"src-one"}, "Everest mountain Sagarmatha")
      .on({"src-two"}, "Everest mountain");
  MockModel m(t);
  DefenseConfig c;
  c.k = 3;
  c.alpha = 1.0;
  c.beta = 2;
  const CertifyContext ctx{kQuery, kEverest, c, m, metric_substring, qa()};
  const auto result = certify_keyword(make_case({"src-one", "src-two"}, 1), ctx);
  CHECK(result.status == CertificationStatus::kExact);
  CHECK(result.tau.value() == 1.0);
  CHECK(result.responses.contains(Response::from_text("Everest")));
  CHECK(result.responses.contains(Response::from_text("Everest also Sagarmatha")));
}

TEST_CASE("keyword certification without corruption equals inference") {
  MockModel m(MockTable().on({"using provided keywords"}, "Everest").on({"src"}, "Mount Everest"));
  DefenseConfig c;
  c.k = 3;
  const auto group_case = make_case({"src a", "src b", "src c"}, 0);
  const CertifyContext ctx{kQuery, kEverest, c, m, metric_substring, qa()};
  const auto result = certify_keyword(group_case, ctx);
  const auto inferred = keyword_aggregate(kQuery, group_case.benign_groups, c, m, qa());
  CHECK(result.responses.size() == 1);
  CHECK(result.responses.contains(inferred));
  CHECK(result.tau == metric_substring(inferred, kEverest));
}

TEST_CASE("keyword certification fails when attacker votes alone reach the threshold") {
  MockModel m(MockTable().on({"using provided keywords"}, "Everest").on({"src"}, "Mount Everest"));
  DefenseConfig c;
  c.k = 3;
  c.alpha = 0.2;
  c.beta = 3;
  const CertifyContext ctx{kQuery, kEverest, c, m, metric_substring, qa()};
  // n = 2, k_eff = 1: threshold 0.6 <= 1, so an unseen keyword could be kept
  const auto result = certify_keyword(make_case({"src a", "src b"}, 1), ctx);
  CHECK(result.status == CertificationStatus::kFailedUnboundedKeywords);
  CHECK(result.tau.value() == 0.0);
}

TEST_CASE("keyword certification with every group corrupted by abstains") {
  MockModel m(MockTable().on({"using provided keywords"}, "Everest").on({"src"}, "I don't know"));
  DefenseConfig c;
  c.k = 2;
  const CertifyContext ctx{kQuery, kEverest, c, m, metric_substring, qa()};
  const auto result = certify_keyword(make_case({"src a", "src b"}, 0), ctx);
  CHECK(result.responses.contains(Response::abstain()));
  CHECK(result.tau.value() == 0.0);
}

TEST_CASE("vote certification gap rule") {
  MockModel m(MockTable().on({"says-a"}, "A").on({"says-b"}, "B"));
  const std::vector<std::string> choices = {"A", "B"};
  const ReferenceAnswer answer_b({"B"});
  DefenseConfig c;
  c.k = 8;
  const CertifyContext ctx{kQuery, answer_b, c, m, metric_substring, qa()};

  std::vector<std::string> five_three(5, "says-b");
  five_three.insert(five_three.end(), 3, "says-a");
  const auto ok = certify_vote(make_case(five_three, 1), choices, ctx);
  CHECK(ok.status == CertificationStatus::kExact);
  CHECK(ok.tau.value() == 1.0);

  std::vector<std::string> four_three(4, "says-b");
  four_three.insert(four_three.end(), 3, "says-a");
  const auto fail = certify_vote(make_case(four_three, 1), choices, ctx);
  CHECK(fail.status == CertificationStatus::kFailedCase4);
  CHECK(fail.tau.value() == 0.0);

  const auto clean = certify_vote(make_case(four_three, 0), choices, ctx);
  CHECK(clean.tau.value() == 1.0);
  CHECK(clean.responses.contains(Response::from_text("B")));
}

namespace {

// One group always puts all mass on A; the retrieval-free prompt answers C.
MockTable branching_table(int steps) {
  std::vector<MockTable::StepDistribution> a(static_cast<std::size_t>(steps), {{"A", 1.0}});
  std::string c_out = "C";
  for (int i = 1; i < steps; ++i) c_out += " C";
  return MockTable().vocabulary({"A", "B", "C"}).on({"answer query"}, c_out).on_steps({"src-a"}, a);
}

}  // namespace

TEST_CASE("decoding certification branches in the undecided band") {
  MockModel m(branching_table(1));
  DefenseConfig c;
  c.k = 2;
  c.t_max = 1;
  c.eta = 1.0;
  const CertifyContext ctx{kQuery, kEverest, c, m, metric_substring, qa()};
  // gap 1 with eta = 1, m' = 1: 2 >= 1 > 0, both children
  const auto r = certify_decoding(make_case({"src-a"}, 1), ctx);
  CHECK(r.status == CertificationStatus::kExact);
  CHECK(r.responses.size() == 2);
  CHECK(r.responses.contains(Response::from_text("A")));
  CHECK(r.responses.contains(Response::from_text("C")));

  c.eta = 0.0;  // gap 1 is neither > 1 nor in (1, 1]: fails
  const auto failed = certify_decoding(make_case({"src-a"}, 1), ctx);
  CHECK(failed.status == CertificationStatus::kFailedCase4);
  CHECK(failed.tau.value() == 0.0);
}

TEST_CASE("decoding certification without corruption equals inference") {
  MockModel m(MockTable()
                  .vocabulary({"A", "B", "C", "Everest"})
                  .on({"answer query"}, "C C")
                  .on_steps({"src-x"}, {{{"Everest", 0.6}, {"A", 0.4}}, {{"B", 0.5}, {"C", 0.5}}})
                  .on_steps({"src-y"}, {{{"Everest", 0.7}, {"B", 0.3}}, {{"C", 0.5}, {"B", 0.5}}}));
  DefenseConfig c;
  c.k = 2;
  c.t_max = 4;
  const auto group_case = make_case({"src-x", "src-y"}, 0);
  const CertifyContext ctx{kQuery, kEverest, c, m, metric_substring, qa()};
  const auto r = certify_decoding(group_case, ctx);
  const auto inferred = decoding_aggregate(kQuery, group_case.benign_groups, c, m, qa());
  CHECK(r.responses.size() == 1);
  CHECK(r.responses.contains(inferred));
  CHECK(r.tau == metric_substring(inferred, kEverest));
  // step 2 ties B and C, so the retrieval-free token decides
  CHECK(inferred.text == "Everest C");
}

TEST_CASE("decoding certification subsamples large response sets reproducibly") {
  const int steps = 11;  // 2^11 paths
  MockModel m(branching_table(steps));
  DefenseConfig c;
  c.k = 2;
  c.t_max = steps;
  c.eta = 1.0;
  c.seed = 42;
  const CertifyContext ctx{kQuery, kEverest, c, m, metric_substring, qa()};
  const auto r = certify_decoding(make_case({"src-a"}, 1), ctx);
  CHECK(r.status == CertificationStatus::kSubsampled);
  CHECK(r.responses.size() == (std::size_t{1} << steps));
  const auto again = certify_decoding(make_case({"src-a"}, 1), ctx);
  CHECK(again.tau == r.tau);

  try {
    certify_decoding(make_case({"src-a"}, 1), ctx, 50);
    FAIL("expected budget-exceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kBudgetExceeded);
  }
}

TEST_CASE("orchestrated certification") {
  MockModel m(MockTable()
                  .on({"using provided keywords"}, "Everest")
                  .on({"says-a"}, "A")
                  .on({"src"}, "Mount Everest"));
  const auto r = RetrievalSet::from_texts({"src 1", "src 2", "src 3", "src 4"});
  DefenseConfig c;
  c.k = 4;
  c.alpha = 0.5;
  c.beta = 2;

  SUBCASE("single-passage injection has one case") {
    const auto whole = certify(kQuery, r, {AttackKind::kInjection, 1, {}}, kEverest, c, m);
    const CertifyContext ctx{kQuery, kEverest, c, m, metric_substring, qa()};
    const auto single = certify_keyword(benign_group_cases_injection(r, 1, 1).front(), ctx);
    CHECK(whole.case_count == 1);
    CHECK(whole.tau == single.tau);
    CHECK(whole.responses.size() == single.responses.size());
  }
  SUBCASE("corrupting everything fails without benign groups") {
    const auto all = certify(kQuery, r, {AttackKind::kInjection, 4, {}}, kEverest, c, m);
    CHECK(all.status == CertificationStatus::kFailedNoBenignGroups);
    CHECK(all.tau.value() == 0.0);
  }
  SUBCASE("vanilla cannot be certified") {
    c.aggregator = Aggregator::kVanilla;
    CHECK_THROWS_AS(certify(kQuery, r, {AttackKind::kInjection, 1, {}}, kEverest, c, m), Error);
  }
  SUBCASE("modification is never looser than injection") {
    c.omega = 2;
    const auto inj = certify(kQuery, r, {AttackKind::kInjection, 1, {}}, kEverest, c, m);
    const auto mod = certify(kQuery, r, {AttackKind::kModification, 1, {}}, kEverest, c, m);
    CHECK(mod.tau <= inj.tau);
    CHECK(mod.case_count >= inj.case_count);
  }
}

TEST_CASE("status names round-trip and failures carry zero") {
  for (auto s : {CertificationStatus::kExact, CertificationStatus::kSubsampled, CertificationStatus::kFailedCase4,
                 CertificationStatus::kFailedPowersetCap, CertificationStatus::kFailedNoBenignGroups,
                 CertificationStatus::kFailedUnboundedKeywords}) {
    CHECK(parse_certification_status(to_string(s)) == s);
    if (is_failure(s)) CHECK(CertificationResult::failed(s).tau.value() == 0.0);
  }
}
