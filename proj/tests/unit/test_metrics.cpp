#include <doctest.h>

#include <cmath>

#include "annoreg/error.hpp"
#include "annoreg/metrics.hpp"
#include "annoreg/metrics_io.hpp"
#include "annoreg/rng.hpp"
#include "annoreg/stats.hpp"
#include "oracles.hpp"

using namespace annoreg;

namespace {

PredictionTable table(std::vector<std::vector<double>> scores) {
  PredictionTable t;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    t.rows.push_back({"s", static_cast<long long>(i) * 598, 0, std::move(scores[i])});
  }
  return t;
}

// One slide, square grid of tiles labelled by a disc.
TileManifest disc_manifest(const std::string& slide, int n) {
  TileManifest m;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double dx = x - n / 2.0 + 0.5, dy = y - n / 2.0 + 0.5;
      const int label = dx * dx + dy * dy <= (n / 3.0) * (n / 3.0) ? 1 : 0;
      m.records.push_back({slide, x * 598LL, y * 598LL, 1.0, label, label});
    }
  }
  return m;
}

}  // namespace

TEST_CASE("ensemble_average: one model, symmetric pair, constant list") {
  CHECK(ensemble_average(table({{0.3}}))[0].score == 0.3);
  CHECK(ensemble_average(table({{0.2, 0.8}}))[0].score == 0.5);
  CHECK(ensemble_average(table({std::vector<double>(10, 0.7)}))[0].score == doctest::Approx(0.7).epsilon(1e-15));
  CHECK_THROWS_AS(ensemble_average(table({{0.2}, {0.2, 0.3}})), ValidationError);
  CHECK_THROWS_AS(ensemble_average(table({{1.2}})), ValidationError);
}

TEST_CASE("auroc examples") {
  CHECK(auroc(std::vector<int>{0, 1}, std::vector<double>{0.2, 0.7}) == 1.0);
  CHECK(auroc(std::vector<int>{0, 0, 1, 1}, std::vector<double>{0.4, 0.6, 0.5, 0.9}) == 0.75);
  CHECK_FALSE(auroc(std::vector<int>{1, 1}, std::vector<double>{0.2, 0.7}).has_value());
}

TEST_CASE("auroc equals pair counting with ties") {
  Rng rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(40));
    std::vector<int> y(n);
    std::vector<double> s(n);
    for (int i = 0; i < n; ++i) {
      y[i] = rng.bernoulli(0.4);
      s[i] = static_cast<double>(rng.below(6)) / 5.0;  // coarse grid forces ties
    }
    y[0] = 0;
    y[1] = 1;
    CHECK(*auroc(y, s) == oracle::auroc_pairs(y, s));
  }
}

TEST_CASE("youden_threshold examples") {
  const auto r = youden_threshold(std::vector<int>{0, 0, 1, 1}, std::vector<double>{0.1, 0.2, 0.6, 0.8});
  CHECK(r.threshold == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(r.j == 1.0);
  const auto inv = youden_threshold(std::vector<int>{1, 1, 0, 0}, std::vector<double>{0.1, 0.2, 0.6, 0.8});
  CHECK(inv.j == 0.0);
  CHECK((inv.threshold == 0.0 || inv.threshold == 1.0));
}

TEST_CASE("youden_threshold attains the exhaustive sweep maximum") {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(30));
    std::vector<int> y(n);
    std::vector<double> s(n);
    for (int i = 0; i < n; ++i) {
      y[i] = rng.bernoulli(0.5);
      s[i] = rng.bernoulli(0.3) ? 0.5 : rng.uniform();
    }
    y[0] = 0;
    y[1] = 1;
    const auto r = youden_threshold(y, s);
    CHECK(r.j == doctest::Approx(oracle::best_youden(y, s)).epsilon(1e-12));
  }
}

TEST_CASE("confusion metrics on TP=2 FP=1 TN=3 FN=2") {
  const auto m = confusion_metrics(ConfusionCounts{2, 1, 3, 2});
  CHECK(*m.accuracy == 5.0 / 8.0);
  CHECK(*m.precision == 2.0 / 3.0);
  CHECK(*m.sensitivity == 0.5);
  CHECK(*m.specificity == 0.75);
  CHECK(*m.f1 == doctest::Approx(4.0 / 7.0).epsilon(1e-15));
}

TEST_CASE("confusion metrics perfect, inverted and undefined") {
  const std::vector<int> y{0, 1, 0, 1};
  const auto perfect = confusion_metrics(y, y);
  CHECK(*perfect.accuracy == 1.0);
  CHECK(*perfect.f1 == 1.0);
  CHECK(*perfect.precision == 1.0);
  const auto wrong = confusion_metrics(y, std::vector<int>{1, 0, 1, 0});
  CHECK(*wrong.accuracy == 0.0);
  CHECK(*wrong.specificity == 0.0);
  CHECK(*wrong.sensitivity == 0.0);
  const auto no_pos = confusion_metrics(std::vector<int>{0, 0}, std::vector<int>{0, 0});
  CHECK_FALSE(no_pos.sensitivity.has_value());
  CHECK_FALSE(no_pos.precision.has_value());
  CHECK(*no_pos.specificity == 1.0);
}

TEST_CASE("prediction_mask: empty, single tile footprint, all tiles") {
  PredictionMaskParams p;  // 598 px at 0.454 um/px = 271.492 um tiles, 7.264 um/px mask
  const ExtentUm extent{3 * 271.492, 2 * 271.492};
  const std::vector<TileCall> none = {{0, 0, false}, {598, 0, false}};
  CHECK(prediction_mask(none, extent, p).count() == 0);

  const std::vector<TileCall> one = {{598, 598, true}};
  const auto m = paint_tiles(one, extent, p);
  const double tile_um = 598 * 0.454;
  const double x0 = 598 * 0.454, y0 = 598 * 0.454;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      const double ox = std::max(0.0, std::min(x0 + tile_um, (x + 1) * 7.264) - std::max(x0, x * 7.264));
      const double oy = std::max(0.0, std::min(y0 + tile_um, (y + 1) * 7.264) - std::max(y0, y * 7.264));
      CHECK(m.at(x, y) == (ox * oy >= 0.5 * 7.264 * 7.264));
    }
  }

  std::vector<TileCall> all;
  for (int ty = 0; ty < 2; ++ty) for (int tx = 0; tx < 3; ++tx) all.push_back({tx * 598LL, ty * 598LL, true});
  // 113 x 75 pixels; the last column is under half covered, the last row over.
  const auto full = prediction_mask(all, extent, p);
  CHECK(full.width() == 113);
  CHECK(full.height() == 75);
  CHECK(full.count() == 112u * 75u);
}

TEST_CASE("slide_report with oracle scores gives perfect metrics") {
  TileManifest m = disc_manifest("a", 6);
  const auto b = disc_manifest("b", 5);
  m.records.insert(m.records.end(), b.records.begin(), b.records.end());
  std::vector<TileScore> scores;
  for (const auto& r : m.records) scores.push_back({r.slide_id, r.tile_x, r.tile_y, double(*r.label_ihc)});

  ReportParams params;
  std::map<std::string, BinaryMask> truth;
  for (const std::string s : {"a", "b"}) {
    std::vector<TileCall> calls;
    for (const auto& r : m.records) {
      if (r.slide_id == s) calls.push_back({r.tile_x, r.tile_y, *r.label_ihc == 1});
    }
    const int n = s == "a" ? 6 : 5;
    truth.emplace(s, prediction_mask(calls, {n * 271.492, n * 271.492}, params.mask));
  }
  const auto report = slide_report(m, scores, params, &truth);
  REQUIRE(report.size() == 2);
  for (const auto& sm : report) {
    for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
      if (sm.metric(k)) CHECK(*sm.metric(k) == 1.0);
    }
    CHECK(sm.dice.has_value());
    // Identities between overlap metrics.
    CHECK(*sm.dice == doctest::Approx(2 * *sm.jaccard / (1 + *sm.jaccard)));
  }
  const auto no_masks = slide_report(m, scores, params);
  CHECK_FALSE(no_masks[0].dice.has_value());
}

TEST_CASE("slide_report lists orphan tiles") {
  const TileManifest m = disc_manifest("a", 4);
  std::vector<TileScore> scores;
  for (const auto& r : m.records) scores.push_back({r.slide_id, r.tile_x, r.tile_y, 0.5});
  scores.pop_back();
  scores.push_back({"zzz", 0, 0, 0.1});
  try {
    slide_report(m, scores, {});
    FAIL("expected orphan error");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("2 orphan") != std::string::npos);
    CHECK(msg.find("zzz") != std::string::npos);
  }
}

TEST_CASE("f1 equals dice of the confusion counts") {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> y(20), p(20);
    for (int i = 0; i < 20; ++i) {
      y[i] = rng.bernoulli(0.5);
      p[i] = rng.bernoulli(0.5);
    }
    const auto c = confusion_counts(y, p);
    const auto m = confusion_metrics(c);
    if (m.f1) CHECK(*m.f1 == doctest::Approx(2.0 * c.tp / (2.0 * c.tp + c.fp + c.fn)));
  }
}

TEST_CASE("aggregate_report and its CSV mirror the results-table layout") {
  std::vector<SlideMetrics> slides(20);
  for (int i = 0; i < 20; ++i) {
    slides[i].slide_id = "s" + std::to_string(i);
    slides[i].auroc = 0.9 + 0.005 * i;
    slides[i].accuracy = 0.5;
  }
  const auto agg = aggregate_report(slides, 2000, 0.05, 1);
  REQUIRE(agg.size() == 8);
  CHECK(agg[0].metric == "auroc");
  CHECK(agg[0].n == 20);
  CHECK(*agg[0].ci_low <= *agg[0].mean);
  CHECK(*agg[0].mean <= *agg[0].ci_high);
  CHECK(*agg[3].ci_low == 0.5);
  CHECK_FALSE(agg[1].mean.has_value());
  const std::string csv = serialize_aggregate(agg);
  CHECK(csv.rfind("metric,n,mean,ci_low,ci_high,formatted\n", 0) == 0);
  CHECK(csv.find("accuracy,20,0.5,0.5,0.5,0.500 [0.500; 0.500]\n") != std::string::npos);
  CHECK(csv.find("dice,0,NA,NA,NA,NA\n") != std::string::npos);
}

TEST_CASE("slide metrics CSV round trips") {
  SlideMetrics a;
  a.slide_id = "x";
  a.n_tiles = 12;
  a.auroc = 0.91;
  a.sensitivity = 2.0 / 3.0;
  const std::vector<SlideMetrics> v{a};
  const std::string csv = serialize_slide_metrics(v);
  const auto back = parse_slide_metrics(csv);
  REQUIRE(back.size() == 1);
  CHECK(back[0].auroc == a.auroc);
  CHECK(back[0].sensitivity == a.sensitivity);
  CHECK_FALSE(back[0].dice.has_value());
  CHECK(serialize_slide_metrics(back) == csv);
}

TEST_CASE("compare_slide_metrics: identical inputs are undefined, mismatch rejected") {
  std::vector<SlideMetrics> a(6);
  for (int i = 0; i < 6; ++i) {
    a[i].slide_id = "s" + std::to_string(i);
    a[i].auroc = 0.8 + 0.01 * i;
    a[i].sensitivity = 0.9 - 0.02 * i;
  }
  const auto same = compare_slide_metrics(a, a);
  REQUIRE(same.size() == 8);
  for (const auto& c : same) {
    CHECK_FALSE(c.p_raw.has_value());
    CHECK(c.note.rfind("undefined", 0) == 0);
  }
  auto b = a;
  for (int i = 0; i < 6; ++i) *b[i].sensitivity -= 0.01 * (i + 1);
  for (int i = 0; i < 6; ++i) *b[i].auroc += (i % 2 ? 0.01 : -0.01) * (i + 1);
  const auto cmp = compare_slide_metrics(a, b);
  CHECK(*cmp[6].p_raw == doctest::Approx(2.0 / 64.0));
  CHECK(cmp[6].method == "exact");
  // BH over the two defined tests.
  const std::vector<double> raw{*cmp[0].p_raw, *cmp[6].p_raw};
  CHECK(*cmp[6].p_bh == doctest::Approx(bh_adjust(raw)[1]));
  CHECK_FALSE(cmp[1].p_raw.has_value());
  CHECK(*cmp[6].p_bh >= *cmp[6].p_raw);
  b.pop_back();
  CHECK_THROWS_AS(compare_slide_metrics(a, b), ValidationError);
}

TEST_CASE("predictions CSV round trips") {
  const auto t = table({{0.1, 0.25}, {1.0, 0.0}});
  const std::string csv = serialize_predictions(t);
  CHECK(csv.rfind("slide_id,tile_x,tile_y,score_1,score_2\n", 0) == 0);
  CHECK(parse_predictions(csv).rows == t.rows);
  CHECK_THROWS_AS(parse_predictions("slide_id,tile_x,tile_y\ns,0,0\n"), ParseError);
}
