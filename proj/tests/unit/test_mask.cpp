#include <doctest.h>

#include <cmath>
#include <numbers>

#include "annoreg/error.hpp"
#include "annoreg/geometry.hpp"
#include "annoreg/io.hpp"
#include "annoreg/mask.hpp"
#include "annoreg/mask_io.hpp"
#include "annoreg/rng.hpp"
#include "oracles.hpp"

using namespace annoreg;

namespace {

BinaryMask from_rows(const std::vector<std::string>& rows, double res = 1.0) {
  BinaryMask m(static_cast<int>(rows[0].size()), static_cast<int>(rows.size()), res);
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) m.set(x, y, rows[y][x] == '#');
  }
  return m;
}

AnnotationSet one_region(Polygon p, ClassLabel c = ClassLabel::InvasiveCancer) {
  return AnnotationSet{"s", {{c, std::move(p)}}};
}

std::vector<std::vector<oracle::Pt>> oracle_rings(const Polygon& p) {
  std::vector<std::vector<oracle::Pt>> rings;
  auto conv = [](const Ring& r) {
    std::vector<oracle::Pt> out;
    for (const auto& v : r) out.push_back({v.x, v.y});
    return out;
  };
  rings.push_back(conv(p.outer));
  for (const auto& h : p.holes) rings.push_back(conv(h));
  return rings;
}

Polygon random_polygon(Rng& rng, double extent) {
  const int n = 3 + static_cast<int>(rng.below(10));
  Polygon p;
  for (int k = 0; k < n; ++k) p.outer.push_back({rng.uniform(0, extent), rng.uniform(0, extent)});
  return p;
}

}  // namespace

TEST_CASE("square (0,0)-(10,10) at 1 um/px fills a 10x10 canvas") {
  const auto m = rasterize_class(one_region({{{0, 0}, {10, 0}, {10, 10}, {0, 10}}, {}}),
                                 ClassLabel::InvasiveCancer, 1.0, 10, 10);
  CHECK(m.count() == 100);
}

TEST_CASE("rasterize_class with no polygons of the class is empty") {
  const auto m = rasterize_class(one_region({{{0, 0}, {10, 0}, {10, 10}, {0, 10}}, {}}, ClassLabel::DCIS),
                                 ClassLabel::InvasiveCancer, 1.0, 10, 10);
  CHECK(m.count() == 0);
}

TEST_CASE("square with hole rasterizes to a ring matching the oracle") {
  const Polygon p{{{0, 0}, {10, 0}, {10, 10}, {0, 10}}, {{{3, 3}, {7, 3}, {7, 7}, {3, 7}}}};
  const auto m = rasterize_class(one_region(p), ClassLabel::InvasiveCancer, 1.0, 10, 10);
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 10; ++x) {
      CHECK(m.at(x, y) == oracle::inside(oracle_rings(p), x + 0.5, y + 0.5));
    }
  }
  CHECK(m.count() == 84);
}

TEST_CASE("rasterize_class agrees with independent PNPOLY on random polygons") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const Polygon p = random_polygon(rng, 30.0);
    const auto m = rasterize_class(one_region(p), ClassLabel::InvasiveCancer, 0.75, 40, 40);
    int mismatches = 0;
    for (int y = 0; y < 40; ++y) {
      for (int x = 0; x < 40; ++x) {
        mismatches += m.at(x, y) != oracle::inside(oracle_rings(p), (x + 0.5) * 0.75, (y + 0.5) * 0.75);
      }
    }
    CHECK(mismatches == 0);
  }
}

TEST_CASE("overlapping polygons of one class form a union") {
  AnnotationSet a{"s",
                  {{ClassLabel::InvasiveCancer, {{{0, 0}, {6, 0}, {6, 6}, {0, 6}}, {}}},
                   {ClassLabel::InvasiveCancer, {{{3, 3}, {9, 3}, {9, 9}, {3, 9}}, {}}}}};
  const auto m = rasterize_class(a, ClassLabel::InvasiveCancer, 1.0, 10, 10);
  CHECK(m.count() == 36 + 36 - 9);
}

TEST_CASE("ClassRasterizer windows agree with the full raster") {
  Rng rng(4);
  AnnotationSet a{"s", {}};
  for (int k = 0; k < 5; ++k) a.regions.push_back({ClassLabel::InvasiveCancer, random_polygon(rng, 50)});
  const auto full = rasterize_class(a, ClassLabel::InvasiveCancer, 1.0, 60, 60);
  const ClassRasterizer r(a, ClassLabel::InvasiveCancer, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int x0 = static_cast<int>(rng.below(50)), y0 = static_cast<int>(rng.below(50));
    std::uint64_t expect = 0;
    for (int y = y0; y < y0 + 10; ++y) {
      for (int x = x0; x < x0 + 10; ++x) expect += full.at(x, y);
    }
    CHECK(r.count(x0, y0, 10, 10) == expect);
  }
}

TEST_CASE("connected_components: empty and diagonal neighbours") {
  CHECK(connected_components(BinaryMask(5, 5, 1.0)).count() == 0);
  const auto diag = connected_components(from_rows({"#.", ".#"}));
  CHECK(diag.count() == 1);
  CHECK(diag.areas[0] == 2);
}

TEST_CASE("connected_components equals flood fill on random masks") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const int w = 1 + static_cast<int>(rng.below(30)), h = 1 + static_cast<int>(rng.below(30));
    BinaryMask m(w, h, 1.0);
    std::vector<int> bits(static_cast<std::size_t>(w * h));
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const bool v = rng.bernoulli(0.4);
        m.set(x, y, v);
        bits[y * w + x] = v;
      }
    }
    std::vector<std::uint64_t> areas;
    const auto labels = oracle::flood_labels(bits, w, h, &areas);
    const auto got = connected_components(m);
    CHECK(got.areas == areas);
    CHECK(got.labels == std::vector<std::int32_t>(labels.begin(), labels.end()));
  }
}

TEST_CASE("remove_small_components thresholds and hole filling") {
  CHECK(remove_small_components(from_rows({"...", ".#.", "..."}), 2).count() == 0);
  const auto m = from_rows({"#..#", "....", "##.."});
  CHECK(remove_small_components(m, 0) == m);
  const auto holed = from_rows({".....", ".###.", ".#.#.", ".###.", "....."});
  const auto filled = remove_small_components(holed, 2);
  CHECK(filled.at(2, 2));
  CHECK(filled.count() == 9);
}

TEST_CASE("remove_edge_components honours the strict majority rule") {
  // 20x20 canvas: band width 2.
  BinaryMask m(20, 20, 1.0);
  for (int y = 0; y < 2; ++y) for (int x = 5; x < 10; ++x) m.set(x, y);        // all in band
  for (int y = 8; y < 12; ++y) for (int x = 8; x < 12; ++x) m.set(x, y);      // centre
  for (int y = 4; y < 8; ++y) for (int x = 0; x < 4; ++x) m.set(x, y);        // half in band
  const auto out = remove_edge_components(m, 0.10, 0.50);
  CHECK_FALSE(out.at(6, 0));
  CHECK(out.at(9, 9));
  CHECK(out.at(0, 5));
  CHECK(out.at(3, 5));
  CHECK(edge_band_width(0.10, 20) == 2);
  CHECK(edge_band_width(0.10, 25) == 3);
}

TEST_CASE("mask_dice and mask_jaccard") {
  const auto a = from_rows({"##..", "##.."});
  CHECK(mask_dice(a, a) == 1.0);
  CHECK(mask_jaccard(a, a) == 1.0);
  CHECK(mask_dice(a, from_rows({"..##", "..##"})) == 0.0);
  const auto b = from_rows({".##.", ".##."});
  CHECK(mask_dice(a, b) == 0.5);
  CHECK(mask_jaccard(a, b) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(mask_dice(BinaryMask(2, 2, 1.0), BinaryMask(2, 2, 1.0)) == 1.0);
  CHECK_THROWS_AS(mask_dice(a, BinaryMask(3, 2, 1.0)), ValidationError);
}

TEST_CASE("overlay_rgb colours follow the truth table") {
  namespace oc = overlay_color;
  const auto a = from_rows({"#.#.", ".#.#"});
  const auto same = overlay_rgb(a, a);
  for (std::size_t i = 0; i < same.rgb.size(); i += 3) {
    const bool green = same.rgb[i] == oc::kBoth[0] && same.rgb[i + 1] == oc::kBoth[1];
    const bool white = same.rgb[i] == 255 && same.rgb[i + 1] == 255 && same.rgb[i + 2] == 255;
    CHECK((green || white));
  }
  const auto full = from_rows({"####"});
  const auto red = overlay_rgb(full, BinaryMask(4, 1, 1.0));
  for (std::size_t i = 0; i < red.rgb.size(); i += 3) {
    CHECK(red.rgb[i] == oc::kFirstOnly[0]);
    CHECK(red.rgb[i + 1] == oc::kFirstOnly[1]);
    CHECK(red.rgb[i + 2] == oc::kFirstOnly[2]);
  }
  const auto inv = from_rows({".#.#", "#.#."});
  const auto none = overlay_rgb(a, inv);
  for (std::size_t i = 0; i < none.rgb.size(); i += 3) {
    const std::uint8_t* c = &none.rgb[i];
    const bool is_green = c[0] == oc::kBoth[0] && c[1] == oc::kBoth[1] && c[2] == oc::kBoth[2];
    CHECK_FALSE(is_green);
  }
}

TEST_CASE("mask PNG and sidecar round trip byte-identically") {
  Rng rng(2);
  BinaryMask m(37, 23, 7.264);
  for (int y = 0; y < 23; ++y) for (int x = 0; x < 37; ++x) m.set(x, y, rng.bernoulli(0.3));
  CHECK(decode_mask_png(encode_mask_png(m), 7.264) == m);
  const auto dir = oracle::scratch("mask_io");
  save_mask(m, dir / "m.png");
  CHECK(mask_sidecar_path(dir / "m.png") == dir / "m.txt");
  const auto back = load_mask(dir / "m.png");
  CHECK(back == m);
  save_mask(back, dir / "m2.png");
  CHECK(read_file(dir / "m.png") == read_file(dir / "m2.png"));
  CHECK(parse_mask_sidecar(format_mask_sidecar(7.264)) == 7.264);
  CHECK_THROWS_AS(decode_mask_png("not a png", 1.0), Error);
}
