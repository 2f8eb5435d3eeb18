#include "annoreg/mask.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "annoreg/error.hpp"
#include "annoreg/geometry.hpp"

namespace annoreg {

BinaryMask::BinaryMask(int width, int height, double resolution_um)
    : width_(width), height_(height), resolution_um_(resolution_um) {
  if (width < 1 || height < 1) throw ValidationError("mask dimensions must be >= 1");
  if (!(resolution_um > 0.0) || !std::isfinite(resolution_um)) {
    throw ValidationError("mask resolution_um must be positive");
  }
  bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

std::uint64_t BinaryMask::count() const {
  return static_cast<std::uint64_t>(std::count(bits_.begin(), bits_.end(), 1));
}

// ---------------------------------------------------------------------------
// Rasterization

ClassRasterizer::ClassRasterizer(const AnnotationSet& a, ClassLabel cls,
                                 double resolution_um)
    : res_(resolution_um) {
  if (!(resolution_um > 0.0)) throw ValidationError("resolution_um must be positive");
  for (const auto& region : a.regions) {
    if (region.label != cls || region.polygon.outer.empty()) continue;
    Entry e{&region.polygon, std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};
    auto extend = [&](const Ring& ring) {
      for (const auto& pt : ring) {
        e.min_x = std::min(e.min_x, pt.x);
        e.max_x = std::max(e.max_x, pt.x);
        e.min_y = std::min(e.min_y, pt.y);
        e.max_y = std::max(e.max_y, pt.y);
      }
    };
    extend(region.polygon.outer);
    for (const auto& hole : region.polygon.holes) extend(hole);
    polygons_.push_back(e);
  }
}

template <typename Sink>
void ClassRasterizer::scan(long long x0, long long y0, int w, int h, Sink&& sink) const {
  if (polygons_.empty() || w <= 0 || h <= 0) return;
  const long long x_end = x0 + w;
  auto center = [this](long long i) { return (static_cast<double>(i) + 0.5) * res_; };
  const double first_center = center(x0);
  const double last_center = center(x_end - 1);

  // Smallest pixel index in [x0, x_end] whose center is >= a.
  auto first_at_or_after = [&](double a) -> long long {
    if (a <= first_center) return x0;
    if (a > last_center) return x_end;
    auto i = static_cast<long long>(std::ceil(a / res_ - 0.5));
    i = std::clamp(i, x0, x_end - 1);
    while (i < x_end && center(i) < a) ++i;
    while (i > x0 && center(i - 1) >= a) --i;
    return i;
  };

  std::vector<double> crossings;
  std::vector<std::pair<long long, long long>> spans;
  for (int r = 0; r < h; ++r) {
    const double yc = center(y0 + r);
    spans.clear();
    for (const auto& e : polygons_) {
      if (yc < e.min_y || yc >= e.max_y) continue;
      if (e.max_x < first_center || e.min_x > last_center) continue;
      crossings.clear();
      auto collect = [&](const Ring& ring) {
        const std::size_t n = ring.size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
          double x;
          if (edge_crossing(ring[j], ring[i], yc, x)) crossings.push_back(x);
        }
      };
      collect(e.polygon->outer);
      for (const auto& hole : e.polygon->holes) collect(hole);
      std::sort(crossings.begin(), crossings.end());
      // Centers in [crossings[2k], crossings[2k+1]) have an odd number of
      // crossings strictly to their right.
      for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
        const long long lo = first_at_or_after(crossings[k]);
        const long long hi = first_at_or_after(crossings[k + 1]);
        if (lo < hi) spans.emplace_back(lo, hi);
      }
    }
    if (spans.empty()) continue;
    std::sort(spans.begin(), spans.end());
    std::size_t out = 0;
    for (std::size_t k = 1; k < spans.size(); ++k) {
      if (spans[k].first <= spans[out].second) {
        spans[out].second = std::max(spans[out].second, spans[k].second);
      } else {
        spans[++out] = spans[k];
      }
    }
    spans.resize(out + 1);
    sink(r, spans);
  }
}

std::uint64_t ClassRasterizer::count(long long x0, long long y0, int w, int h) const {
  std::uint64_t total = 0;
  scan(x0, y0, w, h, [&](int, const auto& spans) {
    for (const auto& [lo, hi] : spans) total += static_cast<std::uint64_t>(hi - lo);
  });
  return total;
}

std::uint64_t ClassRasterizer::fill(long long x0, long long y0, BinaryMask& out) const {
  std::uint64_t total = 0;
  scan(x0, y0, out.width(), out.height(), [&](int r, const auto& spans) {
    auto* row = out.bits().data() + out.index(0, r);
    for (const auto& [lo, hi] : spans) {
      std::fill(row + (lo - x0), row + (hi - x0), std::uint8_t{1});
      total += static_cast<std::uint64_t>(hi - lo);
    }
  });
  return total;
}

BinaryMask rasterize_class(const AnnotationSet& a, ClassLabel cls, double resolution_um,
                           int width, int height) {
  BinaryMask mask(width, height, resolution_um);
  ClassRasterizer(a, cls, resolution_um).fill(0, 0, mask);
  return mask;
}

// ---------------------------------------------------------------------------
// Components

namespace {

// Union-find labeling of pixels whose value equals `value`, 8-connected.
ComponentLabeling label_pixels(const BinaryMask& m, std::uint8_t value) {
  const int w = m.width();
  const int h = m.height();
  const auto& bits = m.bits();
  std::vector<std::int32_t> parent(bits.size(), -1);

  auto find = [&](std::int32_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  };
  auto unite = [&](std::int32_t a, std::int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent[a] = b;
  };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto idx = static_cast<std::int32_t>(m.index(x, y));
      if (bits[idx] != value) continue;
      parent[idx] = idx;
      // Previously visited 8-neighbours: W, NW, N, NE.
      if (x > 0 && bits[idx - 1] == value) unite(idx, idx - 1);
      if (y > 0) {
        const auto up = static_cast<std::int32_t>(m.index(x, y - 1));
        if (bits[up] == value) unite(idx, up);
        if (x > 0 && bits[up - 1] == value) unite(idx, up - 1);
        if (x + 1 < w && bits[up + 1] == value) unite(idx, up + 1);
      }
    }
  }

  ComponentLabeling out;
  out.width = w;
  out.height = h;
  out.labels.assign(bits.size(), 0);
  // Roots are the smallest index of their set, so the first visit in scan
  // order always meets the root first.
  std::vector<std::int32_t> root_label(bits.size(), 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != value) continue;
    const auto root = find(static_cast<std::int32_t>(i));
    if (root_label[root] == 0) {
      out.areas.push_back(0);
      root_label[root] = static_cast<std::int32_t>(out.areas.size());
    }
    const auto label = root_label[root];
    out.labels[i] = label;
    ++out.areas[label - 1];
  }
  return out;
}

}  // namespace

ComponentLabeling connected_components(const BinaryMask& m) { return label_pixels(m, 1); }

ComponentLabeling background_components(const BinaryMask& m) {
  return label_pixels(m, 0);
}

BinaryMask remove_small_components(const BinaryMask& m, std::uint64_t min_area_px) {
  if (min_area_px == 0) return m;
  BinaryMask out = m;
  auto& bits = out.bits();

  const auto fg = connected_components(out);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const auto label = fg.labels[i];
    if (label > 0 && fg.areas[label - 1] < min_area_px) bits[i] = 0;
  }

  const auto bg = background_components(out);
  std::vector<bool> touches_border(bg.count() + 1, false);
  const int w = out.width();
  const int h = out.height();
  for (int x = 0; x < w; ++x) {
    touches_border[bg.labels[out.index(x, 0)]] = true;
    touches_border[bg.labels[out.index(x, h - 1)]] = true;
  }
  for (int y = 0; y < h; ++y) {
    touches_border[bg.labels[out.index(0, y)]] = true;
    touches_border[bg.labels[out.index(w - 1, y)]] = true;
  }
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const auto label = bg.labels[i];
    if (label > 0 && !touches_border[label] && bg.areas[label - 1] < min_area_px) {
      bits[i] = 1;
    }
  }
  return out;
}

int edge_band_width(double fraction, int size) {
  const double exact = fraction * static_cast<double>(size);
  return static_cast<int>(std::ceil(exact - 1e-9 * std::max(1.0, exact)));
}

BinaryMask remove_edge_components(const BinaryMask& m, double edge_fraction,
                                  double area_fraction) {
  if (!(edge_fraction > 0.0 && edge_fraction < 0.5)) {
    throw ValidationError("edge_fraction must lie in (0, 0.5)");
  }
  if (!(area_fraction >= 0.0 && area_fraction <= 1.0)) {
    throw ValidationError("area_fraction must lie in [0, 1]");
  }
  const int w = m.width();
  const int h = m.height();
  const int bx = edge_band_width(edge_fraction, w);
  const int by = edge_band_width(edge_fraction, h);
  auto in_band = [&](int x, int y) {
    return x < bx || x >= w - bx || y < by || y >= h - by;
  };

  const auto cc = connected_components(m);
  std::vector<std::uint64_t> band_count(cc.count(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto label = cc.labels[m.index(x, y)];
      if (label > 0 && in_band(x, y)) ++band_count[label - 1];
    }
  }
  std::vector<bool> remove(cc.count(), false);
  for (std::size_t k = 0; k < cc.count(); ++k) {
    remove[k] = static_cast<double>(band_count[k]) >
                area_fraction * static_cast<double>(cc.areas[k]);
  }
  BinaryMask out = m;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto label = cc.labels[i];
    if (label > 0 && remove[label - 1]) out.bits()[i] = 0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Agreement

namespace {

struct OverlapCounts {
  std::uint64_t a = 0, b = 0, both = 0;
};

OverlapCounts overlap(const BinaryMask& a, const BinaryMask& b) {
  if (!a.same_shape(b)) {
    throw ValidationError("mask shape mismatch: " + std::to_string(a.width()) + "x" +
                          std::to_string(a.height()) + " vs " +
                          std::to_string(b.width()) + "x" + std::to_string(b.height()));
  }
  OverlapCounts c;
  const auto& ab = a.bits();
  const auto& bb = b.bits();
  for (std::size_t i = 0; i < ab.size(); ++i) {
    c.a += ab[i];
    c.b += bb[i];
    c.both += ab[i] & bb[i];
  }
  return c;
}

}  // namespace

double mask_dice(const BinaryMask& a, const BinaryMask& b) {
  const auto c = overlap(a, b);
  if (c.a + c.b == 0) return 1.0;
  return 2.0 * static_cast<double>(c.both) / static_cast<double>(c.a + c.b);
}

double mask_jaccard(const BinaryMask& a, const BinaryMask& b) {
  const auto c = overlap(a, b);
  const auto uni = c.a + c.b - c.both;
  if (uni == 0) return 1.0;
  return static_cast<double>(c.both) / static_cast<double>(uni);
}

RgbImage overlay_rgb(const BinaryMask& a, const BinaryMask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw ValidationError("overlay requires masks of equal dimensions");
  }
  RgbImage img{a.width(), a.height(), {}};
  img.rgb.resize(a.size() * 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool in_a = a.bits()[i] != 0;
    const bool in_b = b.bits()[i] != 0;
    const std::uint8_t* color = in_a ? (in_b ? overlay_color::kBoth : overlay_color::kFirstOnly)
                                     : (in_b ? overlay_color::kSecondOnly
                                             : overlay_color::kNeither);
    std::copy(color, color + 3, img.rgb.begin() + static_cast<std::ptrdiff_t>(3 * i));
  }
  return img;
}

}  // namespace annoreg
