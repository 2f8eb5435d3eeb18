#include "annoreg/split.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "annoreg/error.hpp"
#include "annoreg/io.hpp"
#include "annoreg/rng.hpp"

namespace annoreg {

std::string_view stratum_name(Stratum s) { return s == Stratum::Low ? "low" : "high"; }

namespace {

// Largest-remainder apportionment of `total` over groups of the given sizes.
// Remainder ties go to the earlier group.
std::vector<std::size_t> apportion(std::span<const std::size_t> sizes, std::size_t total) {
  const std::size_t n = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  std::vector<std::size_t> quota(sizes.size(), 0);
  if (n == 0) return quota;
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    const double exact = static_cast<double>(total) * sizes[g] / static_cast<double>(n);
    quota[g] = static_cast<std::size_t>(std::floor(exact));
    assigned += quota[g];
    remainders.emplace_back(exact - quota[g], g);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < total && k < remainders.size(); ++k) {
    ++quota[remainders[k].second];
    ++assigned;
  }
  return quota;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

SplitAssignment stratified_split(std::span<const CaseRecord> cases,
                                 const SplitParams& params, std::uint64_t seed) {
  const std::size_t n = cases.size();
  if (params.n_folds < 1) throw ValidationError("n_folds must be >= 1");
  if (params.test_count >= n) {
    throw ValidationError("test_count (" + std::to_string(params.test_count) +
                          ") must be smaller than the number of cases (" +
                          std::to_string(n) + ")");
  }
  if (n - params.test_count < static_cast<std::size_t>(params.n_folds)) {
    throw ValidationError("fewer development cases than folds");
  }
  if (!(params.tune_fraction >= 0.0 && params.tune_fraction < 1.0)) {
    throw ValidationError("tune_fraction must lie in [0, 1)");
  }
  std::set<std::string> seen;
  std::vector<double> scores;
  for (const auto& c : cases) {
    validate_case(c);
    if (!seen.insert(c.case_id).second) {
      throw ValidationError("duplicate case_id " + c.case_id);
    }
    if (c.ki67_score) scores.push_back(*c.ki67_score);
  }

  SplitAssignment out;
  out.seed = seed;
  out.median_score =
      scores.empty() ? std::numeric_limits<double>::quiet_NaN() : median_of(scores);
  Rng rng(seed);

  out.cases.resize(n);
  std::vector<std::size_t> members[2];
  for (std::size_t i = 0; i < n; ++i) {
    auto& a = out.cases[i];
    a.case_id = cases[i].case_id;
    if (cases[i].ki67_score) {
      a.stratum = *cases[i].ki67_score <= out.median_score ? Stratum::Low : Stratum::High;
    } else {
      a.stratum = rng.bernoulli(0.5) ? Stratum::High : Stratum::Low;
      a.stratum_imputed = true;
    }
    members[a.stratum == Stratum::Low ? 0 : 1].push_back(i);
  }

  const std::size_t sizes[2] = {members[0].size(), members[1].size()};
  const auto test_quota = apportion(sizes, params.test_count);

  const auto folds = static_cast<std::size_t>(params.n_folds);
  std::vector<std::vector<std::size_t>> fold_members[2];
  std::size_t deal = 0;  // continues across strata to balance fold sizes
  for (int s = 0; s < 2; ++s) {
    auto& idx = members[s];
    rng.shuffle(std::span(idx));
    fold_members[s].assign(folds, {});
    for (std::size_t k = 0; k < idx.size(); ++k) {
      auto& a = out.cases[idx[k]];
      if (k < test_quota[s]) {
        a.test = true;
        continue;
      }
      const std::size_t f = deal++ % folds;
      a.fold = static_cast<int>(f) + 1;
      fold_members[s][f].push_back(idx[k]);
    }
  }

  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t per_stratum[2] = {fold_members[0][f].size(), fold_members[1][f].size()};
    const double fold_size = static_cast<double>(per_stratum[0] + per_stratum[1]);
    const auto tune_total = static_cast<std::size_t>(std::llround(params.tune_fraction * fold_size));
    const auto tune_quota = apportion(per_stratum, tune_total);
    for (int s = 0; s < 2; ++s) {
      for (std::size_t k = 0; k < tune_quota[s]; ++k) out.cases[fold_members[s][f][k]].tune = true;
    }
  }
  return out;
}

std::string serialize_split(const SplitAssignment& s) {
  std::string out = "case_id,assignment,fold,role,stratum\n";
  for (const auto& a : s.cases) {
    out += a.case_id;
    if (a.test) {
      out += ",test,,,";
    } else {
      out += ",dev," + std::to_string(a.fold) + (a.tune ? ",tune," : ",fit,");
    }
    out += stratum_name(a.stratum);
    out += '\n';
  }
  return out;
}

std::vector<CaseRecord> parse_cases(std::string_view csv) {
  const CsvTable table = parse_csv(csv, "case list");
  const auto c_id = table.column("case_id");
  const auto c_score = table.column("ki67_score");
  auto optional_column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < table.header.size(); ++i) {
      if (table.header[i] == name) return i;
    }
    return std::nullopt;
  };
  const auto c_he = optional_column("he_slide_id");
  const auto c_ihc = optional_column("ihc_slide_id");

  std::vector<CaseRecord> out;
  for (const auto& row : table.rows) {
    CaseRecord c;
    c.case_id = trim(row[c_id]);
    if (c_he) c.he_slide_id = trim(row[*c_he]);
    if (c_ihc) c.ihc_slide_id = trim(row[*c_ihc]);
    const std::string score = trim(row[c_score]);
    if (!score.empty() && score != "NA") c.ki67_score = parse_double(score, "ki67_score");
    validate_case(c);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace annoreg
