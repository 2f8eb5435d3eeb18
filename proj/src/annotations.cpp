#include "annoreg/annotations.hpp"

#include <cmath>
#include <json.hpp>

#include "annoreg/error.hpp"
#include "annoreg/io.hpp"

namespace annoreg {

using nlohmann::json;

namespace {

std::string feature_label(std::size_t index) {
  return "feature " + std::to_string(index);
}

Ring parse_ring(const json& coords, double scale, const std::string& where) {
  if (!coords.is_array()) throw ValidationError(where + ": ring is not an array");
  Ring ring;
  ring.reserve(coords.size());
  for (const auto& pos : coords) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() ||
        !pos[1].is_number()) {
      throw ValidationError(where + ": malformed position");
    }
    ring.push_back({pos[0].get<double>() * scale, pos[1].get<double>() * scale});
  }
  if (ring.size() >= 2 && ring.front() == ring.back()) ring.pop_back();
  return ring;
}

Polygon parse_polygon(const json& rings, double scale, const std::string& where) {
  if (!rings.is_array() || rings.empty()) {
    throw ValidationError(where + ": polygon without rings");
  }
  Polygon p;
  p.outer = parse_ring(rings[0], scale, where);
  for (std::size_t i = 1; i < rings.size(); ++i) {
    p.holes.push_back(parse_ring(rings[i], scale, where));
  }
  validate_polygon(p, where);
  return p;
}

json ring_to_json(const Ring& ring) {
  json out = json::array();
  for (const auto& pt : ring) out.push_back({pt.x, pt.y});
  if (!ring.empty()) out.push_back({ring.front().x, ring.front().y});
  return out;
}

AnnotationSet parse_document(std::string_view bytes,
                             std::string_view default_slide_id) {
  json doc;
  try {
    doc = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw ParseError("malformed annotation JSON at byte " +
                         std::to_string(e.byte) + ": " + e.what(),
                     e.byte);
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection") {
    throw ValidationError("annotation file is not a GeoJSON FeatureCollection");
  }

  double scale = 1.0;
  if (doc.contains("unit")) {
    if (!doc["unit"].is_string()) throw ValidationError("\"unit\" must be a string");
    const auto unit = doc["unit"].get<std::string>();
    if (unit == "pixel") {
      if (!doc.contains("mpp") || !doc["mpp"].is_number()) {
        throw ValidationError("\"unit\": \"pixel\" requires a numeric \"mpp\"");
      }
      scale = doc["mpp"].get<double>();
      if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw ValidationError("mpp must be positive and finite");
      }
    } else if (unit != "micrometre" && unit != "micrometer" && unit != "um") {
      throw ValidationError("unsupported coordinate unit \"" + unit + "\"");
    }
  }

  AnnotationSet out;
  if (doc.contains("slide_id") && doc["slide_id"].is_string()) {
    out.slide_id = doc["slide_id"].get<std::string>();
  } else {
    out.slide_id = std::string(default_slide_id);
  }
  if (out.slide_id.empty()) throw ValidationError("annotation set without slide_id");

  const auto features = doc.find("features");
  if (features == doc.end() || !features->is_array()) {
    throw ValidationError("FeatureCollection without a features array");
  }
  for (std::size_t i = 0; i < features->size(); ++i) {
    const json& f = (*features)[i];
    const std::string where = feature_label(i);
    const json* name = nullptr;
    if (f.contains("properties") && f["properties"].is_object() &&
        f["properties"].contains("classification") &&
        f["properties"]["classification"].is_object() &&
        f["properties"]["classification"].contains("name")) {
      name = &f["properties"]["classification"]["name"];
    }
    if (name == nullptr || !name->is_string()) {
      throw ValidationError(where + ": missing properties.classification.name");
    }
    const auto label = class_from_name(name->get<std::string>());
    if (!label) {
      throw ValidationError(where + ": unknown class \"" +
                            name->get<std::string>() + "\"");
    }
    if (!f.contains("geometry") || !f["geometry"].is_object()) {
      throw ValidationError(where + ": missing geometry");
    }
    const json& geom = f["geometry"];
    const auto type = geom.value("type", "");
    if (!geom.contains("coordinates")) {
      throw ValidationError(where + ": geometry without coordinates");
    }
    const json& coords = geom["coordinates"];
    if (type == "Polygon") {
      out.regions.push_back({*label, parse_polygon(coords, scale, where)});
    } else if (type == "MultiPolygon") {
      if (!coords.is_array()) throw ValidationError(where + ": bad MultiPolygon");
      for (const auto& poly : coords) {
        out.regions.push_back({*label, parse_polygon(poly, scale, where)});
      }
    } else {
      throw ValidationError(where + ": unsupported geometry type \"" + type + "\"");
    }
  }
  return out;
}

}  // namespace

AnnotationSet parse_annotations(std::string_view bytes,
                                std::string_view default_slide_id) {
  try {
    return parse_document(bytes, default_slide_id);
  } catch (const json::exception& e) {
    // Wrong JSON types in otherwise well-formed input.
    throw ValidationError(std::string("invalid annotation file: ") + e.what());
  }
}

std::string serialize_annotations(const AnnotationSet& a) {
  json features = json::array();
  for (const auto& region : a.regions) {
    json rings = json::array();
    rings.push_back(ring_to_json(region.polygon.outer));
    for (const auto& hole : region.polygon.holes) rings.push_back(ring_to_json(hole));
    features.push_back({
        {"type", "Feature"},
        {"geometry", {{"type", "Polygon"}, {"coordinates", std::move(rings)}}},
        {"properties",
         {{"classification", {{"name", std::string(class_name(region.label))}}}}},
    });
  }
  json doc = {
      {"type", "FeatureCollection"},
      {"slide_id", a.slide_id},
      {"features", std::move(features)},
  };
  return doc.dump(1) + "\n";
}

AnnotationSet load_annotations(const std::filesystem::path& path) {
  return parse_annotations(read_file(path), path.stem().string());
}

void save_annotations(const AnnotationSet& a, const std::filesystem::path& path) {
  write_file(path, serialize_annotations(a));
}

}  // namespace annoreg
