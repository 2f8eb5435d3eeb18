#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "annoreg/types.hpp"

namespace annoreg {

/// Parse a GeoJSON FeatureCollection of Polygon / MultiPolygon features.
///
/// Each feature needs `properties.classification.name`. Coordinates are
/// micrometres unless the collection carries `"unit": "pixel"` together with
/// `"mpp"`, in which case they are scaled by mpp. The slide id is read from
/// the collection's `slide_id` member, falling back to `default_slide_id`.
/// A closing vertex equal to the first one is dropped.
AnnotationSet parse_annotations(std::string_view bytes,
                                std::string_view default_slide_id = {});

/// Canonical serialization (micrometres, closed rings, canonical class names).
std::string serialize_annotations(const AnnotationSet& a);

AnnotationSet load_annotations(const std::filesystem::path& path);
void save_annotations(const AnnotationSet& a, const std::filesystem::path& path);

}  // namespace annoreg
