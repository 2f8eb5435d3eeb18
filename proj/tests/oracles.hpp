#pragma once
// Brute-force reference implementations used by the unit and acceptance
// tests. None of these call into the library code they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

struct Pt {
  double x, y;
};

// Classic PNPOLY crossing test over every ring (even-odd).
inline bool inside(const std::vector<std::vector<Pt>>& rings, double x, double y) {
  bool in = false;
  for (const auto& r : rings) {
    const std::size_t n = r.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      if (((r[i].y > y) != (r[j].y > y)) &&
          (x < (r[j].x - r[i].x) * (y - r[i].y) / (r[j].y - r[i].y) + r[i].x)) {
        in = !in;
      }
    }
  }
  return in;
}

// 8-connected flood fill labelling in scan order; returns component sizes.
inline std::vector<int> flood_labels(const std::vector<int>& bits, int w, int h,
                                     std::vector<std::uint64_t>* areas) {
  std::vector<int> label(bits.size(), 0);
  int next = 0;
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!bits[y * w + x] || label[y * w + x]) continue;
      ++next;
      std::uint64_t area = 0;
      stack.push_back({x, y});
      label[y * w + x] = next;
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        ++area;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx, ny = cy + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            if (bits[ny * w + nx] && !label[ny * w + nx]) {
              label[ny * w + nx] = next;
              stack.push_back({nx, ny});
            }
          }
        }
      }
      if (areas) areas->push_back(area);
    }
  }
  return label;
}

// Pair counting: P(score_pos > score_neg) + 0.5 P(tie).
inline double auroc_pairs(const std::vector<int>& y, const std::vector<double>& s) {
  double wins = 0.0;
  std::uint64_t pairs = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[j] != 0) continue;
      ++pairs;
      if (s[i] > s[j]) wins += 1.0;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// Best Youden J over every threshold that changes the predicted set.
inline double best_youden(const std::vector<int>& y, const std::vector<double>& s) {
  std::vector<double> cuts(s.begin(), s.end());
  cuts.push_back(2.0);  // nothing positive
  double best = -2.0;
  double npos = 0, nneg = 0;
  for (int v : y) (v ? npos : nneg) += 1;
  for (double t : cuts) {
    double tp = 0, tn = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const bool p = s[i] >= t;
      if (p && y[i]) tp += 1;
      if (!p && !y[i]) tn += 1;
    }
    best = std::max(best, tp / npos + tn / nneg - 1.0);
  }
  return best;
}

// Two-sided exact signed-rank p by enumerating all 2^n sign patterns of the
// ranks of |d| (tie-free, no zeros).
inline double wilcoxon_enumerate(const std::vector<double>& d) {
  const std::size_t n = d.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });
  std::vector<int> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[order[r]] = static_cast<int>(r + 1);
  int w_obs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] > 0) w_obs += rank[i];
  }
  const int total = static_cast<int>(n * (n + 1) / 2);
  const int w = std::max(w_obs, total - w_obs);
  std::uint64_t ge = 0;
  const std::uint64_t patterns = 1ULL << n;
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    int s = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) s += static_cast<int>(i + 1);
    }
    if (s >= w) ++ge;
  }
  return std::min(1.0, 2.0 * static_cast<double>(ge) / static_cast<double>(patterns));
}

// Hand bilinear interpolation on a row-major grid with node clamping.
inline double bilinear(const std::vector<float>& plane, int w, int h, double u, double v) {
  u = std::clamp(u, 0.0, w - 1.0);
  v = std::clamp(v, 0.0, h - 1.0);
  int i0 = static_cast<int>(std::floor(u));
  int j0 = static_cast<int>(std::floor(v));
  i0 = std::min(i0, w - 2);
  j0 = std::min(j0, h - 2);
  const double fu = u - i0, fv = v - j0;
  const double f00 = plane[j0 * w + i0], f10 = plane[j0 * w + i0 + 1];
  const double f01 = plane[(j0 + 1) * w + i0], f11 = plane[(j0 + 1) * w + i0 + 1];
  return f00 * (1 - fu) * (1 - fv) + f10 * fu * (1 - fv) + f01 * (1 - fu) * fv + f11 * fu * fv;
}

inline std::filesystem::path scratch(const std::string& name) {
  const char* env = std::getenv("ANNOREG_TEST_TMP");
  const std::filesystem::path root =
      env ? std::filesystem::path(env) : std::filesystem::temp_directory_path() / "annoreg_tests";
  const auto p = root / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace oracle
