#include "annoreg/metrics_io.hpp"

#include "annoreg/error.hpp"
#include "annoreg/io.hpp"

namespace annoreg {

std::string format_metric(const std::optional<double>& v) {
  return v ? format_shortest(*v) : std::string("NA");
}

PredictionTable parse_predictions(std::string_view csv) {
  const CsvTable table = parse_csv(csv, "predictions");
  if (table.header.size() < 4 || table.header[0] != "slide_id" ||
      table.header[1] != "tile_x" || table.header[2] != "tile_y") {
    throw ParseError(
        "predictions header must be slide_id,tile_x,tile_y followed by at least one score column");
  }
  PredictionTable t;
  t.rows.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    PredictionRow r;
    r.slide_id = trim(row[0]);
    r.tile_x = parse_int(row[1], "tile_x");
    r.tile_y = parse_int(row[2], "tile_y");
    for (std::size_t c = 3; c < row.size(); ++c) {
      r.scores.push_back(parse_double(row[c], table.header[c]));
    }
    t.rows.push_back(std::move(r));
  }
  validate_predictions(t);
  return t;
}

std::string serialize_predictions(const PredictionTable& t) {
  std::string out = "slide_id,tile_x,tile_y";
  for (std::size_t k = 0; k < t.n_models(); ++k) out += ",score_" + std::to_string(k + 1);
  out += '\n';
  for (const auto& r : t.rows) {
    out += r.slide_id + ',' + std::to_string(r.tile_x) + ',' + std::to_string(r.tile_y);
    for (double s : r.scores) out += ',' + format_shortest(s);
    out += '\n';
  }
  return out;
}

std::string serialize_slide_metrics(std::span<const SlideMetrics> slides) {
  std::string out = "slide_id,n_tiles";
  for (auto name : kMetricNames) {
    out += ',';
    out += name;
  }
  out += '\n';
  for (const auto& s : slides) {
    out += s.slide_id + ',' + std::to_string(s.n_tiles);
    for (std::size_t k = 0; k < kMetricNames.size(); ++k) out += ',' + format_metric(s.metric(k));
    out += '\n';
  }
  return out;
}

std::vector<SlideMetrics> parse_slide_metrics(std::string_view csv) {
  const CsvTable table = parse_csv(csv, "slide metrics");
  const auto c_id = table.column("slide_id");
  const auto c_n = table.column("n_tiles");
  std::vector<std::size_t> cols;
  for (auto name : kMetricNames) cols.push_back(table.column(name));
  std::vector<SlideMetrics> out;
  for (const auto& row : table.rows) {
    SlideMetrics s;
    s.slide_id = trim(row[c_id]);
    s.n_tiles = static_cast<std::size_t>(parse_int(row[c_n], "n_tiles"));
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const std::string cell = trim(row[cols[k]]);
      if (cell != "NA" && !cell.empty()) s.metric(k) = parse_double(cell, kMetricNames[k]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string serialize_aggregate(std::span<const MetricSummary> rows) {
  std::string out = "metric,n,mean,ci_low,ci_high,formatted\n";
  for (const auto& r : rows) {
    std::string formatted = "NA";
    if (r.mean) {
      formatted = format_fixed(*r.mean, 3) + " [" + format_fixed(*r.ci_low, 3) + "; " +
                  format_fixed(*r.ci_high, 3) + "]";
    }
    out += r.metric + ',' + std::to_string(r.n) + ',' + format_metric(r.mean) + ',' +
           format_metric(r.ci_low) + ',' + format_metric(r.ci_high) + ',' + formatted + '\n';
  }
  return out;
}

std::string serialize_comparison(std::span<const MetricComparison> rows) {
  std::string out = "metric,n_pairs,mean_a,mean_b,p_raw,p_bh,method,note\n";
  for (const auto& r : rows) {
    out += r.metric + ',' + std::to_string(r.n_pairs) + ',' + format_metric(r.mean_a) + ',' +
           format_metric(r.mean_b) + ',' + format_metric(r.p_raw) + ',' + format_metric(r.p_bh) +
           ',' + r.method + ',' + r.note + '\n';
  }
  return out;
}

}  // namespace annoreg
