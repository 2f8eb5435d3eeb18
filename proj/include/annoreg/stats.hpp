#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace annoreg {

struct MeanCi {
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Nearest-rank percentile of an ascending-sorted, non-empty sample:
/// the value at rank ceil(q * n), clamped to [1, n].
double nearest_rank(std::span<const double> sorted, double q);

/// Percentile bootstrap of an arbitrary statistic over index resamples.
///
/// Resample r draws n indices with replacement from Rng(seed, r), so every
/// resample is fixed by (seed, r) alone and the result does not depend on
/// `jobs`. `statistic` may return NaN to mark an undefined resample, which is
/// then skipped. Returns the sorted defined resample values.
std::vector<double> bootstrap_distribution(
    std::size_t n, int n_boot, std::uint64_t seed,
    const std::function<double(std::span<const std::size_t>)>& statistic,
    unsigned jobs = 1);

/// Mean with a percentile bootstrap CI (nearest-rank alpha/2, 1-alpha/2).
MeanCi bootstrap_mean_ci(std::span<const double> values, int n_boot = 10000,
                         double alpha = 0.05, std::uint64_t seed = 0, unsigned jobs = 1);

/// Average ranks (1-based); ties share the mean of their rank positions.
std::vector<double> average_ranks(std::span<const double> values);

struct PairedSample {
  std::vector<std::string> ids;
  std::vector<double> a;
  std::vector<double> b;
};

enum class WilcoxonMethod { Auto, Exact, Normal };

struct WilcoxonResult {
  double p_value = 1.0;
  WilcoxonMethod method = WilcoxonMethod::Exact;  // path actually taken
  std::size_t n_nonzero = 0;
  double w_plus = 0.0;  // rank sum of positive differences a - b
  bool ties = false;
};

/// Largest nonzero-difference count for which the exact null distribution
/// is used (tie-free samples only).
inline constexpr std::size_t kWilcoxonExactMaxN = 25;

/// Two-sided paired signed-rank test. Zero differences are dropped; tied
/// magnitudes get average ranks. Auto uses the exact distribution for
/// tie-free n <= 25 and the normal approximation (tie and continuity
/// corrected) otherwise. Exact on tied data is rejected. Throws
/// UndefinedError when every difference is zero.
WilcoxonResult wilcoxon_signed_rank(const PairedSample& s,
                                    WilcoxonMethod method = WilcoxonMethod::Auto);
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    WilcoxonMethod method = WilcoxonMethod::Auto);

/// P(W+ >= w) under the exact null for n tie-free ranks.
double wilcoxon_exact_upper_tail(std::size_t n, double w);

/// Benjamini-Hochberg step-up adjustment, returned in input order.
std::vector<double> bh_adjust(std::span<const double> p_values);

double pearson(std::span<const double> x, std::span<const double> y);

/// Spearman rank correlation. Throws ValidationError on length mismatch,
/// fewer than 3 pairs, or a constant input.
double spearman(std::span<const double> x, std::span<const double> y);

struct CorrelationCi {
  double rho = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int valid_resamples = 0;
};

/// Spearman's rho with a percentile bootstrap CI over resampled pairs;
/// resamples in which either side is constant are skipped.
CorrelationCi spearman_ci(std::span<const double> x, std::span<const double> y,
                          int n_boot = 10000, double alpha = 0.05,
                          std::uint64_t seed = 0, unsigned jobs = 1);

}  // namespace annoreg
