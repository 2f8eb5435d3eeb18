#include <doctest.h>

#include <cmath>

#include "annoreg/error.hpp"
#include "annoreg/geometry.hpp"
#include "annoreg/types.hpp"

using namespace annoreg;

namespace {

Polygon unit_square() { return Polygon{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {}}; }

Polygon square_with_hole() {
  Polygon p = unit_square();
  p.holes.push_back({{0.25, 0.25}, {0.75, 0.25}, {0.75, 0.75}, {0.25, 0.75}});
  return p;
}

}  // namespace

TEST_CASE("polygon_area of unit square is 1") { CHECK(polygon_area(unit_square()) == 1.0); }

TEST_CASE("polygon_area subtracts holes") { CHECK(polygon_area(square_with_hole()) == 0.75); }

TEST_CASE("polygon_area of collinear ring is 0") {
  CHECK(polygon_area(Polygon{{{0, 0}, {1, 1}, {2, 2}}, {}}) == 0.0);
}

TEST_CASE("polygon_area ignores orientation") {
  Polygon cw{{{0, 0}, {0, 1}, {1, 1}, {1, 0}}, {}};
  CHECK(polygon_area(cw) == 1.0);
  CHECK(ring_signed_area(cw.outer) == -ring_signed_area(unit_square().outer));
}

TEST_CASE("point_in_polygon interior, exterior and hole") {
  CHECK(point_in_polygon({0.5, 0.5}, unit_square()));
  CHECK_FALSE(point_in_polygon({2, 2}, unit_square()));
  CHECK_FALSE(point_in_polygon({0.5, 0.5}, square_with_hole()));
  CHECK(point_in_polygon({0.1, 0.5}, square_with_hole()));
}

TEST_CASE("point_in_polygon boundary is half-open") {
  // Left and top edges belong to the square, right and bottom do not.
  const Polygon sq{{{0, 0}, {2, 0}, {2, 2}, {0, 2}}, {}};
  CHECK(point_in_polygon({0, 1}, sq));
  CHECK_FALSE(point_in_polygon({2, 1}, sq));
  CHECK(point_in_polygon({1, 0}, sq));
  CHECK_FALSE(point_in_polygon({1, 2}, sq));
}

TEST_CASE("validate_polygon rejects short and non-finite rings") {
  CHECK_THROWS_AS(validate_polygon(Polygon{{{0, 0}, {1, 0}}, {}}), ValidationError);
  CHECK_THROWS_AS(validate_polygon(Polygon{{{0, 0}, {1, 0}, {NAN, 1}}, {}}), ValidationError);
  CHECK_NOTHROW(validate_polygon(unit_square()));
}

TEST_CASE("class names round trip and aliases fold") {
  for (ClassLabel c : kAllClassLabels) {
    const auto back = class_from_name(class_name(c));
    REQUIRE(back.has_value());
    CHECK(*back == c);
  }
  CHECK(class_from_name("invasive_cancer") == ClassLabel::InvasiveCancer);
  CHECK(class_from_name("IC") == ClassLabel::InvasiveCancer);
  CHECK_FALSE(class_from_name("Stroma").has_value());
}

TEST_CASE("validate_case checks ids and score range") {
  CaseRecord c{"c1", "c1-HE", "c1-KI67", 42.0};
  CHECK_NOTHROW(validate_case(c));
  c.ki67_score = 101.0;
  CHECK_THROWS_AS(validate_case(c), ValidationError);
  c.ki67_score.reset();
  c.case_id.clear();
  CHECK_THROWS_AS(validate_case(c), ValidationError);
}
