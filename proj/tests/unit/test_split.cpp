#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "annoreg/error.hpp"
#include "annoreg/rng.hpp"
#include "annoreg/split.hpp"

using namespace annoreg;

namespace {

std::vector<CaseRecord> cohort(std::size_t n, double missing_prob, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<CaseRecord> cases;
  for (std::size_t i = 0; i < n; ++i) {
    CaseRecord c{"p" + std::to_string(i), "", "", std::nullopt};
    if (!rng.bernoulli(missing_prob)) c.ki67_score = std::round(rng.uniform(1, 80) * 10) / 10;
    cases.push_back(c);
  }
  return cases;
}

}  // namespace

TEST_CASE("272 cases split into 218 development and 54 test") {
  const auto cases = cohort(272, 0.05, 1);
  const auto s = stratified_split(cases, {}, 7);
  std::size_t test = 0;
  std::map<Stratum, std::size_t> total, in_test;
  std::map<int, std::map<Stratum, std::size_t>> per_fold;
  std::map<int, std::size_t> tune;
  for (const auto& a : s.cases) {
    total[a.stratum]++;
    if (a.test) {
      ++test;
      in_test[a.stratum]++;
      CHECK(a.fold == 0);
      CHECK_FALSE(a.tune);
    } else {
      CHECK(a.fold >= 1);
      CHECK(a.fold <= 5);
      per_fold[a.fold][a.stratum]++;
      tune[a.fold] += a.tune;
    }
  }
  CHECK(test == 54);
  CHECK(s.cases.size() - test == 218);
  // Test share of each stratum within one case of proportional.
  for (const auto st : {Stratum::Low, Stratum::High}) {
    const double expect = 54.0 * total[st] / 272.0;
    CHECK(std::abs(in_test[st] - expect) <= 1.0);
    std::size_t lo = 1000, hi = 0;
    for (auto& [fold, counts] : per_fold) {
      lo = std::min(lo, counts[st]);
      hi = std::max(hi, counts[st]);
    }
    CHECK(hi - lo <= 1);
  }
  for (auto& [fold, n] : tune) {
    const std::size_t size = per_fold[fold][Stratum::Low] + per_fold[fold][Stratum::High];
    CHECK(std::abs(static_cast<double>(n) - 0.15 * size) <= 2.0);
  }
}

TEST_CASE("split is deterministic, seed-sensitive and disjoint") {
  const auto cases = cohort(100, 0.1, 2);
  const SplitParams p{20, 4, 0.15};
  const auto a = stratified_split(cases, p, 11);
  CHECK(a.cases == stratified_split(cases, p, 11).cases);
  CHECK(serialize_split(a) == serialize_split(stratified_split(cases, p, 11)));
  CHECK_FALSE(a.cases == stratified_split(cases, p, 12).cases);
  std::set<std::string> ids;
  for (const auto& c : a.cases) ids.insert(c.case_id);
  CHECK(ids.size() == 100);
}

TEST_CASE("strata follow the median and missing scores are imputed") {
  std::vector<CaseRecord> cases;
  for (int i = 0; i < 10; ++i) cases.push_back({"c" + std::to_string(i), "", "", double(i)});
  cases.push_back({"m", "", "", std::nullopt});
  const auto s = stratified_split(cases, {2, 2, 0.0}, 3);
  CHECK(s.median_score == 4.5);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(s.cases[i].stratum == (i <= 4 ? Stratum::Low : Stratum::High));
    CHECK_FALSE(s.cases[i].stratum_imputed);
  }
  CHECK(s.cases[10].stratum_imputed);
}

TEST_CASE("split rejects impossible parameters and duplicates") {
  const auto cases = cohort(10, 0.0, 3);
  CHECK_THROWS_AS(stratified_split(cases, {11, 2, 0.1}, 0), ValidationError);
  CHECK_THROWS_AS(stratified_split(cases, {8, 5, 0.1}, 0), ValidationError);
  CHECK_THROWS_AS(stratified_split(cases, {2, 2, 1.0}, 0), ValidationError);
  auto dup = cases;
  dup.push_back(dup[0]);
  CHECK_THROWS_AS(stratified_split(dup, {2, 2, 0.1}, 0), ValidationError);
}

TEST_CASE("parse_cases reads scores and optional slide ids") {
  const auto c = parse_cases("case_id,ki67_score,he_slide_id\na,12.5,a-HE\nb,,b-HE\nc,NA,c-HE\n");
  REQUIRE(c.size() == 3);
  CHECK(c[0].ki67_score == 12.5);
  CHECK_FALSE(c[1].ki67_score.has_value());
  CHECK_FALSE(c[2].ki67_score.has_value());
  CHECK(c[2].he_slide_id == "c-HE");
  CHECK_THROWS_AS(parse_cases("case_id,ki67_score\na,abc\n"), ParseError);
  CHECK_THROWS_AS(parse_cases("id,score\na,1\n"), Error);
}

TEST_CASE("serialized split has one row per case") {
  const auto cases = cohort(30, 0.0, 4);
  const auto s = stratified_split(cases, {6, 3, 0.15}, 5);
  const std::string csv = serialize_split(s);
  CHECK(csv.rfind("case_id,assignment,fold,role,stratum\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 31);
}
