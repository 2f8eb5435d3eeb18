#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "annoreg/mask.hpp"
#include "annoreg/tissue.hpp"

namespace annoreg {

struct PredictionRow {
  std::string slide_id;
  long long tile_x = 0;
  long long tile_y = 0;
  std::vector<double> scores;  // one per base model

  friend bool operator==(const PredictionRow&, const PredictionRow&) = default;
};

struct PredictionTable {
  std::vector<PredictionRow> rows;

  std::size_t n_models() const { return rows.empty() ? 0 : rows.front().scores.size(); }
};

/// Unique keys, scores in [0, 1], equal score counts, at least one score.
void validate_predictions(const PredictionTable& t);

struct TileScore {
  std::string slide_id;
  long long tile_x = 0;
  long long tile_y = 0;
  double score = 0.0;

  friend bool operator==(const TileScore&, const TileScore&) = default;
};

/// Per-tile arithmetic mean of the base-model scores.
std::vector<TileScore> ensemble_average(const PredictionTable& t);

/// Mann-Whitney AUROC with ties counted as one half. nullopt when either
/// class is absent. Throws on length mismatch or empty input.
std::optional<double> auroc(std::span<const int> labels, std::span<const double> scores);

struct YoudenResult {
  double threshold = 0.5;
  double j = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
};

/// Threshold maximizing sensitivity + specificity - 1 for the rule
/// score >= threshold. Candidates are 0, 1 and the midpoints between
/// adjacent distinct sorted scores; ties go to the smallest candidate.
YoudenResult youden_threshold(std::span<const int> labels, std::span<const double> scores);

struct ConfusionCounts {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

ConfusionCounts confusion_counts(std::span<const int> labels, std::span<const int> predicted);

/// Undefined ratios (zero denominators) are nullopt.
struct ConfusionMetrics {
  ConfusionCounts counts;
  std::optional<double> accuracy, f1, specificity, sensitivity, precision;
};

ConfusionMetrics confusion_metrics(const ConfusionCounts& c);
ConfusionMetrics confusion_metrics(std::span<const int> labels, std::span<const int> predicted);

struct TileCall {
  long long tile_x = 0;
  long long tile_y = 0;
  bool positive = false;
};

struct PredictionMaskParams {
  int tile_size_px = 598;
  double tile_resolution_um = 0.454;
  double mask_resolution_um = 7.264;
  std::uint64_t min_area_px = 4;
};

/// Mask pixel count along one axis covering `extent_um` at `res`.
int mask_pixels_for_extent(double extent_um, double res);

/// Mask pixels whose area is at least half covered by the union of positive
/// tile footprints, followed by remove_small_components.
BinaryMask prediction_mask(std::span<const TileCall> tiles, ExtentUm slide_extent,
                           const PredictionMaskParams& params);

/// Same painting step without the small-component cleanup.
BinaryMask paint_tiles(std::span<const TileCall> tiles, ExtentUm slide_extent,
                       const PredictionMaskParams& params);

enum class LabelColumn { Ihc, Registered };

std::string_view label_column_name(LabelColumn c);
LabelColumn parse_label_column(std::string_view name);

inline constexpr std::array<std::string_view, 8> kMetricNames = {
    "auroc", "dice", "jaccard", "accuracy", "f1", "specificity", "sensitivity", "precision",
};

struct SlideMetrics {
  std::string slide_id;
  std::size_t n_tiles = 0;
  std::optional<double> auroc, dice, jaccard, accuracy, f1, specificity, sensitivity,
      precision;

  /// Metric by its kMetricNames index.
  std::optional<double> metric(std::size_t k) const;
  std::optional<double>& metric(std::size_t k);
};

struct ReportParams {
  double threshold = 0.5;
  LabelColumn ground_truth = LabelColumn::Ihc;
  PredictionMaskParams mask;
};

struct SlideArtifacts {
  BinaryMask prediction;
  std::optional<BinaryMask> ground_truth;
};

/// Joins scores to manifest tiles 1:1 and computes every per-slide metric.
/// AUROC uses raw scores; the rest use score >= threshold. Mask Dice and
/// Jaccard compare the prediction mask against `ground_truth_masks` (keyed
/// by slide id) and stay undefined for slides without one. Throws
/// ValidationError listing orphan tiles when the join is not 1:1.
std::vector<SlideMetrics> slide_report(
    const TileManifest& manifest, std::span<const TileScore> scores,
    const ReportParams& params,
    const std::map<std::string, BinaryMask>* ground_truth_masks = nullptr,
    std::map<std::string, SlideArtifacts>* artifacts = nullptr);

struct PooledTiles {
  std::vector<int> labels;
  std::vector<double> scores;
};

/// Labels and joined scores of every manifest tile, in manifest order.
/// Throws ValidationError on orphan tiles or missing labels.
PooledTiles pool_tiles(const TileManifest& manifest, std::span<const TileScore> scores,
                       LabelColumn column);

struct MetricSummary {
  std::string metric;
  std::size_t n = 0;  // slides with a defined value
  std::optional<double> mean, ci_low, ci_high;
};

/// Mean and bootstrap CI per metric over slides with defined values.
std::vector<MetricSummary> aggregate_report(std::span<const SlideMetrics> slides, int n_boot,
                                            double alpha, std::uint64_t seed);

struct MetricComparison {
  std::string metric;
  std::size_t n_pairs = 0;  // slides with the metric defined on both sides
  std::optional<double> mean_a, mean_b;
  std::optional<double> p_raw, p_bh;
  std::string method;  // "exact", "normal" or empty when untested
  std::string note;
};

/// Paired two-sided Wilcoxon signed-rank test per metric, then BH adjustment
/// across the metrics whose test is defined. Both inputs must cover the same
/// slide set (ValidationError otherwise).
std::vector<MetricComparison> compare_slide_metrics(std::span<const SlideMetrics> a,
                                                    std::span<const SlideMetrics> b);

}  // namespace annoreg
