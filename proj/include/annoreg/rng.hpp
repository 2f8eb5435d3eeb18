#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace annoreg {

/// Pinned pseudorandom stream: std::mt19937_64 seeded with
/// splitmix64(seed, stream). Variates are derived here rather than through
/// <random> distributions, whose algorithms differ between standard
/// libraries, so every output is reproducible from the seed alone.
///
///   uniform()  top 53 bits of one draw, scaled to [0, 1)
///   below(n)   rejection sampling on the full 64-bit draw
///   normal()   Box-Muller, both variates of a pair used in order
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t below(std::uint64_t n);
  double normal();
  double normal(double mean, double sigma) { return mean + sigma * normal(); }
  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Independent seed for sub-stream `stream` of `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace annoreg
