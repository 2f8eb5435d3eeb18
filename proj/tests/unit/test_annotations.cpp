#include <doctest.h>

#include <string>

#include "annoreg/annotations.hpp"
#include "annoreg/error.hpp"
#include "annoreg/io.hpp"
#include "oracles.hpp"

using namespace annoreg;

namespace {

const char* kSquareIc = R"({
  "type": "FeatureCollection",
  "features": [{
    "type": "Feature",
    "geometry": {"type": "Polygon",
                 "coordinates": [[[0,0],[10,0],[10,10],[0,10],[0,0]]]},
    "properties": {"classification": {"name": "Invasive cancer"}}
  }]
})";

std::string with_class(const std::string& name) {
  return R"({"type":"FeatureCollection","features":[{"type":"Feature",
    "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]},
    "properties":{"classification":{"name":")" +
         name + R"("}}}]})";
}

}  // namespace

TEST_CASE("parse_annotations reads one square IC polygon") {
  const auto a = parse_annotations(kSquareIc, "slide-a");
  CHECK(a.slide_id == "slide-a");
  REQUIRE(a.regions.size() == 1);
  CHECK(a.regions[0].label == ClassLabel::InvasiveCancer);
  CHECK(a.regions[0].polygon.outer.size() == 4);  // closing vertex dropped
}

TEST_CASE("parse_annotations expands MultiPolygon into regions") {
  const char* doc = R"({"type":"FeatureCollection","slide_id":"s","features":[{"type":"Feature",
    "geometry":{"type":"MultiPolygon","coordinates":[
      [[[0,0],[1,0],[1,1],[0,1]]],
      [[[5,5],[6,5],[6,6],[5,6]]]]},
    "properties":{"classification":{"name":"DCIS"}}}]})";
  const auto a = parse_annotations(doc);
  REQUIRE(a.regions.size() == 2);
  CHECK(a.regions[1].label == ClassLabel::DCIS);
  CHECK(a.slide_id == "s");
}

TEST_CASE("parse_annotations rejects an unknown class and names it") {
  try {
    parse_annotations(with_class("Stroma"), "s");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("Stroma") != std::string::npos);
  }
}

TEST_CASE("parse_annotations reports byte offset of malformed JSON") {
  try {
    parse_annotations(R"({"type": "FeatureCollection", "features": [ }")", "s");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.byte_offset() > 0);
  }
}

TEST_CASE("parse_annotations scales pixel coordinates by mpp") {
  const char* doc = R"({"type":"FeatureCollection","unit":"pixel","mpp":0.5,"features":[{
    "type":"Feature","geometry":{"type":"Polygon","coordinates":[[[0,0],[4,0],[4,4],[0,4]]]},
    "properties":{"classification":{"name":"IC"}}}]})";
  const auto a = parse_annotations(doc, "s");
  CHECK(a.regions[0].polygon.outer[2].x == 2.0);
}

TEST_CASE("parse_annotations rejects wrong member types") {
  CHECK_THROWS_AS(parse_annotations(R"({"type":"FeatureCollection","features":{}})", "s"),
                  ValidationError);
  CHECK_THROWS_AS(parse_annotations(R"([1,2,3])", "s"), ValidationError);
  CHECK_THROWS_AS(parse_annotations(kSquareIc), ValidationError);  // no slide id anywhere
}

TEST_CASE("serialize_annotations is a fixed point of parse") {
  AnnotationSet a;
  a.slide_id = "slide-x";
  Polygon p{{{0.1, 0.2}, {10.3, 0.25}, {7.0 / 3.0, 9.9}}, {}};
  a.regions.push_back({ClassLabel::InvasiveCancer, p});
  a.regions.push_back({ClassLabel::LymphovascularInvasion, Polygon{{{1, 1}, {2, 1}, {2, 2}}, {{{1.2, 1.1}, {1.9, 1.1}, {1.9, 1.8}}}}});
  const std::string once = serialize_annotations(a);
  const AnnotationSet back = parse_annotations(once);
  CHECK(back == a);
  CHECK(serialize_annotations(back) == once);
}

TEST_CASE("save and load annotations use the file stem as fallback slide id") {
  const auto dir = oracle::scratch("annotations");
  write_file(dir / "slide-7.geojson", kSquareIc);
  const auto a = load_annotations(dir / "slide-7.geojson");
  CHECK(a.slide_id == "slide-7");
  save_annotations(a, dir / "copy.geojson");
  CHECK(load_annotations(dir / "copy.geojson") == a);
}
