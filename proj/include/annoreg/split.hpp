#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "annoreg/types.hpp"

namespace annoreg {

enum class Stratum { Low, High };

std::string_view stratum_name(Stratum s);

struct CaseAssignment {
  std::string case_id;
  bool test = false;
  int fold = 0;       // 1..n_folds for development cases, 0 for test cases
  bool tune = false;  // development cases only
  Stratum stratum = Stratum::Low;
  bool stratum_imputed = false;  // score missing, stratum drawn at random

  friend bool operator==(const CaseAssignment&, const CaseAssignment&) = default;
};

struct SplitParams {
  std::size_t test_count = 54;
  int n_folds = 5;
  double tune_fraction = 0.15;
};

struct SplitAssignment {
  std::uint64_t seed = 0;
  double median_score = 0.0;  // NaN when no case has a score
  std::vector<CaseAssignment> cases;  // input order
};

/// Patient-level split stratified into KI67-low (score <= median) and
/// KI67-high groups. Cases without a score join a random group. The test set
/// takes a largest-remainder proportional share of each stratum; development
/// cases are dealt round-robin into folds per stratum, and each fold marks
/// round(tune_fraction * fold size) cases as tune, again per stratum.
SplitAssignment stratified_split(std::span<const CaseRecord> cases,
                                 const SplitParams& params, std::uint64_t seed);

/// CSV `case_id,assignment,fold,role,stratum`.
std::string serialize_split(const SplitAssignment& s);

/// Case list CSV with columns `case_id` and `ki67_score` (empty = missing);
/// `he_slide_id` / `ihc_slide_id` are read when present.
std::vector<CaseRecord> parse_cases(std::string_view csv);

}  // namespace annoreg
