#include "annoreg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "annoreg/error.hpp"
#include "annoreg/parallel.hpp"
#include "annoreg/rng.hpp"

namespace annoreg {

double nearest_rank(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ValidationError("percentile of an empty sample");
  const double exact = q * static_cast<double>(sorted.size());
  auto rank = static_cast<long long>(std::ceil(exact - 1e-9 * std::max(1.0, exact)));
  rank = std::clamp<long long>(rank, 1, static_cast<long long>(sorted.size()));
  return sorted[static_cast<std::size_t>(rank - 1)];
}

namespace {

void check_boot_args(int n_boot, double alpha) {
  if (n_boot < 1) throw ValidationError("n_boot must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
}

}  // namespace

std::vector<double> bootstrap_distribution(
    std::size_t n, int n_boot, std::uint64_t seed,
    const std::function<double(std::span<const std::size_t>)>& statistic,
    unsigned jobs) {
  if (n == 0) throw ValidationError("bootstrap of an empty sample");
  if (n_boot < 1) throw ValidationError("n_boot must be >= 1");
  std::vector<double> stats(static_cast<std::size_t>(n_boot));
  parallel_for(stats.size(), jobs, [&](std::size_t r) {
    Rng rng(seed, r);
    std::vector<std::size_t> idx(n);
    for (auto& i : idx) i = static_cast<std::size_t>(rng.below(n));
    stats[r] = statistic(idx);
  });
  std::erase_if(stats, [](double v) { return std::isnan(v); });
  std::sort(stats.begin(), stats.end());
  return stats;
}

MeanCi bootstrap_mean_ci(std::span<const double> values, int n_boot, double alpha,
                         std::uint64_t seed, unsigned jobs) {
  if (values.empty()) throw ValidationError("bootstrap_mean_ci needs at least one value");
  check_boot_args(n_boot, alpha);
  for (double v : values) {
    if (!std::isfinite(v)) throw ValidationError("bootstrap_mean_ci needs finite values");
  }
  const std::size_t n = values.size();
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;

  // Same resample streams as bootstrap_distribution, without the index buffer.
  std::vector<double> means(static_cast<std::size_t>(n_boot));
  parallel_for(means.size(), jobs, [&](std::size_t r) {
    Rng rng(seed, r);
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) sum += values[rng.below(n)];
    means[r] = sum / n;
  });
  std::sort(means.begin(), means.end());
  return {mean, nearest_rank(means, alpha / 2), nearest_rank(means, 1.0 - alpha / 2)};
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 hold rank (i+1)..j; their mean is (i+1+j)/2.
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

// ---------------------------------------------------------------------------
// Wilcoxon signed-rank

namespace {

// Number of subsets of {1..n} for each rank sum; exact in double for n <= 25
// (at most 2^25 subsets).
std::vector<double> signed_rank_counts(std::size_t n) {
  const std::size_t max_sum = n * (n + 1) / 2;
  std::vector<double> counts(max_sum + 1, 0.0);
  counts[0] = 1.0;
  std::size_t reach = 0;
  for (std::size_t r = 1; r <= n; ++r) {
    reach += r;
    for (std::size_t s = reach; s >= r; --s) counts[s] += counts[s - r];
  }
  return counts;
}

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

double wilcoxon_exact_upper_tail(std::size_t n, double w) {
  const auto counts = signed_rank_counts(n);
  const double total = std::ldexp(1.0, static_cast<int>(n));
  double tail = 0.0;
  for (std::size_t s = 0; s < counts.size(); ++s) {
    if (static_cast<double>(s) >= w) tail += counts[s];
  }
  return tail / total;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    WilcoxonMethod method) {
  if (a.size() != b.size()) throw ValidationError("paired sample lengths differ");
  std::vector<double> diffs;
  diffs.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
      throw ValidationError("paired sample contains non-finite values");
    }
    const double d = a[i] - b[i];
    if (d != 0.0) diffs.push_back(d);
  }
  if (diffs.empty()) {
    throw UndefinedError("signed-rank test undefined: all paired differences are zero");
  }

  std::vector<double> magnitudes(diffs.size());
  std::transform(diffs.begin(), diffs.end(), magnitudes.begin(),
                 [](double d) { return std::abs(d); });
  const auto ranks = average_ranks(magnitudes);

  WilcoxonResult out;
  out.n_nonzero = diffs.size();
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    if (diffs[i] > 0) out.w_plus += ranks[i];
  }

  // Tie groups among magnitudes, for the variance correction.
  std::vector<double> sorted = magnitudes;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i + 1;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    if (j - i > 1) out.ties = true;
    tie_term += t * t * t - t;
    i = j;
  }

  const std::size_t n = out.n_nonzero;
  const bool exact_ok = !out.ties && n <= kWilcoxonExactMaxN;
  if (method == WilcoxonMethod::Exact && !exact_ok) {
    throw ValidationError("exact signed-rank distribution requires tie-free n <= 25");
  }
  const bool use_exact =
      method == WilcoxonMethod::Exact || (method == WilcoxonMethod::Auto && exact_ok);

  if (use_exact) {
    const double max_sum = static_cast<double>(n * (n + 1) / 2);
    const double upper = wilcoxon_exact_upper_tail(n, out.w_plus);
    // P(W+ <= w) = P(W+ >= max_sum - w) by symmetry of the null.
    const double lower = wilcoxon_exact_upper_tail(n, max_sum - out.w_plus);
    out.p_value = std::min(1.0, 2.0 * std::min(upper, lower));
    out.method = WilcoxonMethod::Exact;
  } else {
    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1) / 4.0;
    const double var = nn * (nn + 1) * (2 * nn + 1) / 24.0 - tie_term / 48.0;
    const double z = std::max(0.0, std::abs(out.w_plus - mean) - 0.5) / std::sqrt(var);
    out.p_value = std::min(1.0, 2.0 * normal_upper_tail(z));
    out.method = WilcoxonMethod::Normal;
  }
  return out;
}

WilcoxonResult wilcoxon_signed_rank(const PairedSample& s, WilcoxonMethod method) {
  if (!s.ids.empty() && s.ids.size() != s.a.size()) {
    throw ValidationError("paired sample ids do not match value count");
  }
  return wilcoxon_signed_rank(s.a, s.b, method);
}

// ---------------------------------------------------------------------------

std::vector<double> bh_adjust(std::span<const double> p_values) {
  const std::size_t m = p_values.size();
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError("p-value outside [0, 1]: " + std::to_string(p));
    }
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
  std::vector<double> adjusted(m);
  double running = 1.0;
  for (std::size_t k = m; k-- > 0;) {
    const double rank = static_cast<double>(k + 1);
    running = std::min(running, static_cast<double>(m) * p_values[order[k]] / rank);
    adjusted[order[k]] = std::min(1.0, running);
  }
  return adjusted;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("spearman: length mismatch");
  if (x.size() < 3) throw ValidationError("spearman: need at least 3 pairs");
  if (is_constant(x) || is_constant(y)) {
    throw ValidationError("spearman: constant input has no ranking");
  }
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

CorrelationCi spearman_ci(std::span<const double> x, std::span<const double> y, int n_boot,
                          double alpha, std::uint64_t seed, unsigned jobs) {
  check_boot_args(n_boot, alpha);
  CorrelationCi out;
  out.rho = spearman(x, y);
  const auto dist = bootstrap_distribution(
      x.size(), n_boot, seed,
      [&](std::span<const std::size_t> idx) {
        std::vector<double> xs(idx.size()), ys(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) {
          xs[k] = x[idx[k]];
          ys[k] = y[idx[k]];
        }
        if (is_constant(xs) || is_constant(ys)) {
          return std::numeric_limits<double>::quiet_NaN();
        }
        return pearson(average_ranks(xs), average_ranks(ys));
      },
      jobs);
  out.valid_resamples = static_cast<int>(dist.size());
  if (dist.empty()) {
    throw UndefinedError("spearman CI undefined: every resample was constant");
  }
  out.ci_low = nearest_rank(dist, alpha / 2);
  out.ci_high = nearest_rank(dist, 1.0 - alpha / 2);
  return out;
}

}  // namespace annoreg
