#include "annoreg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>
#include <unordered_map>

#include "annoreg/error.hpp"
#include "annoreg/rng.hpp"
#include "annoreg/stats.hpp"

namespace annoreg {

void validate_predictions(const PredictionTable& t) {
  std::set<std::tuple<std::string, long long, long long>> keys;
  const std::size_t k = t.n_models();
  for (const auto& row : t.rows) {
    if (row.scores.empty()) {
      throw ValidationError("prediction row " + row.slide_id + " (" +
                            std::to_string(row.tile_x) + ", " + std::to_string(row.tile_y) +
                            ") has no scores");
    }
    if (row.scores.size() != k) {
      throw ValidationError("prediction rows have differing numbers of scores");
    }
    for (double s : row.scores) {
      if (!(s >= 0.0 && s <= 1.0)) {
        throw ValidationError("prediction score outside [0, 1] for " + row.slide_id);
      }
    }
    if (!keys.emplace(row.slide_id, row.tile_x, row.tile_y).second) {
      throw ValidationError("duplicate prediction for " + row.slide_id + " (" +
                            std::to_string(row.tile_x) + ", " + std::to_string(row.tile_y) +
                            ")");
    }
  }
}

std::vector<TileScore> ensemble_average(const PredictionTable& t) {
  validate_predictions(t);
  std::vector<TileScore> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    const double sum = std::accumulate(row.scores.begin(), row.scores.end(), 0.0);
    out.push_back({row.slide_id, row.tile_x, row.tile_y,
                   sum / static_cast<double>(row.scores.size())});
  }
  return out;
}

namespace {

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ValidationError(std::string(what) + ": length mismatch (" + std::to_string(a) +
                          " vs " + std::to_string(b) + ")");
  }
  if (a == 0) throw ValidationError(std::string(what) + ": empty input");
}

void check_labels(std::span<const int> labels) {
  for (int l : labels) {
    if (l != 0 && l != 1) throw ValidationError("labels must be 0 or 1");
  }
}

}  // namespace

std::optional<double> auroc(std::span<const int> labels, std::span<const double> scores) {
  check_lengths(labels.size(), scores.size(), "auroc");
  check_labels(labels);
  const auto ranks = average_ranks(scores);
  double positive_rank_sum = 0.0;
  std::uint64_t n_pos = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      positive_rank_sum += ranks[i];
      ++n_pos;
    }
  }
  const std::uint64_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  // U counts positive-over-negative pairs, ties as 1/2; all terms are exact.
  const double u = positive_rank_sum - 0.5 * static_cast<double>(n_pos) * (n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

YoudenResult youden_threshold(std::span<const int> labels, std::span<const double> scores) {
  check_lengths(labels.size(), scores.size(), "youden_threshold");
  check_labels(labels);
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    (labels[i] == 1 ? pos : neg).push_back(scores[i]);
  }
  if (pos.empty() || neg.empty()) {
    throw ValidationError("youden_threshold needs both classes");
  }
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());

  std::vector<double> distinct(scores.begin(), scores.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<double> candidates{0.0};
  for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
    candidates.push_back(0.5 * (distinct[i] + distinct[i + 1]));
  }
  candidates.push_back(1.0);
  std::sort(candidates.begin(), candidates.end());

  const auto P = static_cast<std::uint64_t>(pos.size());
  const auto N = static_cast<std::uint64_t>(neg.size());
  YoudenResult best;
  // J * P * N + P * N = tp * N + tn * P, compared in integers.
  std::uint64_t best_key = 0;
  bool first = true;
  for (double t : candidates) {
    const auto tp = static_cast<std::uint64_t>(
        pos.end() - std::lower_bound(pos.begin(), pos.end(), t));
    const auto tn = static_cast<std::uint64_t>(
        std::lower_bound(neg.begin(), neg.end(), t) - neg.begin());
    const std::uint64_t key = tp * N + tn * P;
    if (first || key > best_key) {
      first = false;
      best_key = key;
      best.threshold = t;
      best.sensitivity = static_cast<double>(tp) / static_cast<double>(P);
      best.specificity = static_cast<double>(tn) / static_cast<double>(N);
      best.j = best.sensitivity + best.specificity - 1.0;
    }
  }
  return best;
}

ConfusionCounts confusion_counts(std::span<const int> labels, std::span<const int> predicted) {
  check_lengths(labels.size(), predicted.size(), "confusion_metrics");
  check_labels(labels);
  check_labels(predicted);
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      (predicted[i] == 1 ? c.tp : c.fn)++;
    } else {
      (predicted[i] == 1 ? c.fp : c.tn)++;
    }
  }
  return c;
}

ConfusionMetrics confusion_metrics(const ConfusionCounts& c) {
  auto ratio = [](std::uint64_t num, std::uint64_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  ConfusionMetrics m;
  m.counts = c;
  m.accuracy = ratio(c.tp + c.tn, c.tp + c.tn + c.fp + c.fn);
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.sensitivity = ratio(c.tp, c.tp + c.fn);
  m.specificity = ratio(c.tn, c.tn + c.fp);
  m.f1 = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn);
  return m;
}

ConfusionMetrics confusion_metrics(std::span<const int> labels, std::span<const int> predicted) {
  return confusion_metrics(confusion_counts(labels, predicted));
}

// ---------------------------------------------------------------------------
// Prediction masks

int mask_pixels_for_extent(double extent_um, double res) {
  const double exact = extent_um / res;
  return std::max(1, static_cast<int>(std::ceil(exact - 1e-9 * std::max(1.0, exact))));
}

namespace {

struct Rect {
  double x0, y0, x1, y1;
};

// Area of the union of rectangles (all already clipped to one pixel).
double union_area(std::span<const Rect> rects) {
  if (rects.size() == 1) {
    return (rects[0].x1 - rects[0].x0) * (rects[0].y1 - rects[0].y0);
  }
  std::vector<double> xs, ys;
  for (const auto& r : rects) {
    xs.insert(xs.end(), {r.x0, r.x1});
    ys.insert(ys.end(), {r.y0, r.y1});
  }
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
      const double cx = 0.5 * (xs[i] + xs[i + 1]);
      const double cy = 0.5 * (ys[j] + ys[j + 1]);
      const bool covered = std::any_of(rects.begin(), rects.end(), [&](const Rect& r) {
        return cx > r.x0 && cx < r.x1 && cy > r.y0 && cy < r.y1;
      });
      if (covered) area += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
    }
  }
  return area;
}

}  // namespace

BinaryMask paint_tiles(std::span<const TileCall> tiles, ExtentUm slide_extent,
                       const PredictionMaskParams& params) {
  const double res = params.mask_resolution_um;
  const int w = mask_pixels_for_extent(slide_extent.width, res);
  const int h = mask_pixels_for_extent(slide_extent.height, res);
  BinaryMask mask(w, h, res);
  const double tile_um = params.tile_size_px * params.tile_resolution_um;

  std::unordered_map<std::size_t, std::vector<Rect>> touched;
  for (const auto& t : tiles) {
    if (!t.positive) continue;
    const double x0 = static_cast<double>(t.tile_x) * params.tile_resolution_um;
    const double y0 = static_cast<double>(t.tile_y) * params.tile_resolution_um;
    const Rect tile{x0, y0, x0 + tile_um, y0 + tile_um};
    const int px0 = std::max(0, static_cast<int>(std::floor(tile.x0 / res)));
    const int py0 = std::max(0, static_cast<int>(std::floor(tile.y0 / res)));
    const int px1 = std::min(w, static_cast<int>(std::ceil(tile.x1 / res)));
    const int py1 = std::min(h, static_cast<int>(std::ceil(tile.y1 / res)));
    for (int py = py0; py < py1; ++py) {
      for (int px = px0; px < px1; ++px) {
        const Rect clipped{std::max(tile.x0, px * res), std::max(tile.y0, py * res),
                           std::min(tile.x1, (px + 1) * res), std::min(tile.y1, (py + 1) * res)};
        if (clipped.x1 > clipped.x0 && clipped.y1 > clipped.y0) {
          touched[mask.index(px, py)].push_back(clipped);
        }
      }
    }
  }
  const double half_pixel = 0.5 * res * res;
  for (const auto& [idx, rects] : touched) {
    if (union_area(rects) >= half_pixel * (1.0 - kFractionTolerance)) mask.bits()[idx] = 1;
  }
  return mask;
}

BinaryMask prediction_mask(std::span<const TileCall> tiles, ExtentUm slide_extent,
                           const PredictionMaskParams& params) {
  return remove_small_components(paint_tiles(tiles, slide_extent, params), params.min_area_px);
}

// ---------------------------------------------------------------------------
// Reports

std::string_view label_column_name(LabelColumn c) {
  return c == LabelColumn::Ihc ? "label_ihc" : "label_registered";
}

LabelColumn parse_label_column(std::string_view name) {
  if (name == "label_ihc" || name == "ihc") return LabelColumn::Ihc;
  if (name == "label_registered" || name == "registered") return LabelColumn::Registered;
  throw ValidationError("unknown ground-truth column \"" + std::string(name) +
                        "\" (expected label_ihc or label_registered)");
}

std::optional<double> SlideMetrics::metric(std::size_t k) const {
  return const_cast<SlideMetrics*>(this)->metric(k);
}

std::optional<double>& SlideMetrics::metric(std::size_t k) {
  switch (k) {
    case 0: return auroc;
    case 1: return dice;
    case 2: return jaccard;
    case 3: return accuracy;
    case 4: return f1;
    case 5: return specificity;
    case 6: return sensitivity;
    case 7: return precision;
  }
  throw ValidationError("metric index out of range");
}

namespace {

using TileKey = std::tuple<std::string, long long, long long>;

// Score lookup after checking the manifest/score join is 1:1.
std::map<TileKey, double> index_scores(const TileManifest& manifest,
                                       std::span<const TileScore> scores) {
  std::map<TileKey, double> by_key;
  for (const auto& s : scores) {
    if (!by_key.emplace(TileKey{s.slide_id, s.tile_x, s.tile_y}, s.score).second) {
      throw ValidationError("duplicate score for " + s.slide_id);
    }
  }

  std::vector<std::string> orphans;
  auto describe = [](const TileKey& k) {
    return std::get<0>(k) + " (" + std::to_string(std::get<1>(k)) + ", " +
           std::to_string(std::get<2>(k)) + ")";
  };
  std::set<TileKey> matched;
  for (const auto& r : manifest.records) {
    const TileKey key{r.slide_id, r.tile_x, r.tile_y};
    if (by_key.count(key)) {
      matched.insert(key);
    } else {
      orphans.push_back("manifest tile without prediction: " + describe(key));
    }
  }
  for (const auto& [key, score] : by_key) {
    if (!matched.count(key)) orphans.push_back("prediction without manifest tile: " + describe(key));
  }
  if (!orphans.empty()) {
    std::string msg = std::to_string(orphans.size()) + " orphan tile(s):";
    for (std::size_t i = 0; i < orphans.size() && i < 10; ++i) msg += "\n  " + orphans[i];
    throw ValidationError(msg);
  }
  return by_key;
}

}  // namespace

PooledTiles pool_tiles(const TileManifest& manifest, std::span<const TileScore> scores,
                       LabelColumn column) {
  const auto by_key = index_scores(manifest, scores);
  PooledTiles out;
  for (const auto& r : manifest.records) {
    const auto& label = column == LabelColumn::Ihc ? r.label_ihc : r.label_registered;
    if (!label) {
      throw ValidationError("slide " + r.slide_id + ": tile without " +
                            std::string(label_column_name(column)));
    }
    out.labels.push_back(*label);
    out.scores.push_back(by_key.at(TileKey{r.slide_id, r.tile_x, r.tile_y}));
  }
  return out;
}

std::vector<SlideMetrics> slide_report(const TileManifest& manifest,
                                       std::span<const TileScore> scores,
                                       const ReportParams& params,
                                       const std::map<std::string, BinaryMask>* ground_truth_masks,
                                       std::map<std::string, SlideArtifacts>* artifacts) {
  using Key = TileKey;
  const auto by_key = index_scores(manifest, scores);

  std::map<std::string, std::vector<const TileRecord*>> slides;
  for (const auto& r : manifest.records) slides[r.slide_id].push_back(&r);

  PredictionMaskParams mask_params = params.mask;
  mask_params.tile_size_px = manifest.tile_size_px;
  mask_params.tile_resolution_um = manifest.tile_resolution_um;
  const double tile_um = manifest.tile_size_px * manifest.tile_resolution_um;

  std::vector<SlideMetrics> out;
  for (const auto& [slide_id, records] : slides) {
    std::vector<int> labels;
    std::vector<double> slide_scores;
    std::vector<int> predicted;
    std::vector<TileCall> calls;
    ExtentUm tiles_extent{0.0, 0.0};
    for (const TileRecord* r : records) {
      const auto& label =
          params.ground_truth == LabelColumn::Ihc ? r->label_ihc : r->label_registered;
      if (!label) {
        throw ValidationError("slide " + slide_id + ": tile without " +
                              std::string(label_column_name(params.ground_truth)));
      }
      const double score = by_key.at(Key{r->slide_id, r->tile_x, r->tile_y});
      labels.push_back(*label);
      slide_scores.push_back(score);
      const bool positive = score >= params.threshold;
      predicted.push_back(positive ? 1 : 0);
      calls.push_back({r->tile_x, r->tile_y, positive});
      tiles_extent.width =
          std::max(tiles_extent.width, r->tile_x * manifest.tile_resolution_um + tile_um);
      tiles_extent.height =
          std::max(tiles_extent.height, r->tile_y * manifest.tile_resolution_um + tile_um);
    }

    SlideMetrics m;
    m.slide_id = slide_id;
    m.n_tiles = records.size();
    m.auroc = auroc(labels, slide_scores);
    const auto cm = confusion_metrics(labels, predicted);
    m.accuracy = cm.accuracy;
    m.f1 = cm.f1;
    m.specificity = cm.specificity;
    m.sensitivity = cm.sensitivity;
    m.precision = cm.precision;

    const BinaryMask* truth = nullptr;
    if (ground_truth_masks) {
      const auto it = ground_truth_masks->find(slide_id);
      if (it != ground_truth_masks->end()) truth = &it->second;
    }
    ExtentUm extent = tiles_extent;
    if (truth) {
      mask_params.mask_resolution_um = truth->resolution_um();
      extent = {truth->width() * truth->resolution_um(), truth->height() * truth->resolution_um()};
    }
    BinaryMask predicted_mask = prediction_mask(calls, extent, mask_params);
    if (truth) {
      m.dice = mask_dice(*truth, predicted_mask);
      m.jaccard = mask_jaccard(*truth, predicted_mask);
    }
    if (artifacts) {
      (*artifacts)[slide_id] = SlideArtifacts{
          std::move(predicted_mask), truth ? std::optional<BinaryMask>(*truth) : std::nullopt};
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<MetricSummary> aggregate_report(std::span<const SlideMetrics> slides, int n_boot,
                                            double alpha, std::uint64_t seed) {
  std::vector<MetricSummary> out;
  for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
    MetricSummary s;
    s.metric = std::string(kMetricNames[k]);
    std::vector<double> values;
    for (const auto& slide : slides) {
      if (const auto v = slide.metric(k)) values.push_back(*v);
    }
    s.n = values.size();
    if (!values.empty()) {
      const auto ci = bootstrap_mean_ci(values, n_boot, alpha, derive_seed(seed, k));
      s.mean = ci.mean;
      s.ci_low = ci.ci_low;
      s.ci_high = ci.ci_high;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<MetricComparison> compare_slide_metrics(std::span<const SlideMetrics> a,
                                                    std::span<const SlideMetrics> b) {
  std::map<std::string, const SlideMetrics*> by_a, by_b;
  for (const auto& s : a) {
    if (!by_a.emplace(s.slide_id, &s).second) throw ValidationError("duplicate slide " + s.slide_id);
  }
  for (const auto& s : b) {
    if (!by_b.emplace(s.slide_id, &s).second) throw ValidationError("duplicate slide " + s.slide_id);
  }
  std::vector<std::string> only_a, only_b;
  for (const auto& [id, _] : by_a) {
    if (!by_b.count(id)) only_a.push_back(id);
  }
  for (const auto& [id, _] : by_b) {
    if (!by_a.count(id)) only_b.push_back(id);
  }
  if (!only_a.empty() || !only_b.empty()) {
    std::string msg = "slide sets differ:";
    if (!only_a.empty()) msg += " " + std::to_string(only_a.size()) + " only in a (first " + only_a[0] + ")";
    if (!only_b.empty()) msg += " " + std::to_string(only_b.size()) + " only in b (first " + only_b[0] + ")";
    throw ValidationError(msg);
  }

  std::vector<MetricComparison> out;
  std::vector<double> defined_p;
  std::vector<std::size_t> defined_at;
  for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
    MetricComparison c;
    c.metric = std::string(kMetricNames[k]);
    std::vector<double> va, vb;
    for (const auto& [id, sa] : by_a) {
      const auto x = sa->metric(k);
      const auto y = by_b.at(id)->metric(k);
      if (x && y) {
        va.push_back(*x);
        vb.push_back(*y);
      }
    }
    c.n_pairs = va.size();
    if (!va.empty()) {
      c.mean_a = std::accumulate(va.begin(), va.end(), 0.0) / static_cast<double>(va.size());
      c.mean_b = std::accumulate(vb.begin(), vb.end(), 0.0) / static_cast<double>(vb.size());
      try {
        const auto w = wilcoxon_signed_rank(va, vb);
        c.p_raw = w.p_value;
        c.method = w.method == WilcoxonMethod::Exact ? "exact" : "normal";
        defined_p.push_back(w.p_value);
        defined_at.push_back(out.size());
      } catch (const UndefinedError&) {
        c.note = "undefined: all paired differences are zero";
      }
    } else {
      c.note = "undefined: no slide defines the metric on both sides";
    }
    out.push_back(std::move(c));
  }
  const auto adjusted = bh_adjust(defined_p);
  for (std::size_t i = 0; i < defined_at.size(); ++i) out[defined_at[i]].p_bh = adjusted[i];
  return out;
}

}  // namespace annoreg
