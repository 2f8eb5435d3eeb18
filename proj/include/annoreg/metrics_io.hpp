#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "annoreg/metrics.hpp"

namespace annoreg {

/// `slide_id,tile_x,tile_y,score_1,...,score_k` (any header names after the
/// third column are accepted as model columns).
PredictionTable parse_predictions(std::string_view csv);
std::string serialize_predictions(const PredictionTable& t);

/// One row per slide: `slide_id,n_tiles,<metric...>` with `NA` for undefined.
std::string serialize_slide_metrics(std::span<const SlideMetrics> slides);
std::vector<SlideMetrics> parse_slide_metrics(std::string_view csv);

/// `metric,n,mean,ci_low,ci_high,formatted` where `formatted` reads like a
/// results-table cell, e.g. `0.974 [0.964; 0.982]` (semicolon keeps it one CSV field).
std::string serialize_aggregate(std::span<const MetricSummary> rows);

/// `metric,n_pairs,mean_a,mean_b,p_raw,p_bh,method,note`.
std::string serialize_comparison(std::span<const MetricComparison> rows);

/// Formats an optional value; undefined becomes `NA`.
std::string format_metric(const std::optional<double>& v);

}  // namespace annoreg
