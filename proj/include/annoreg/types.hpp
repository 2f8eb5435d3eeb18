#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace annoreg {

/// A point in a slide's physical frame, in micrometres.
struct PointUm {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const PointUm&, const PointUm&) = default;
};

using Ring = std::vector<PointUm>;

/// Simple polygon with optional holes. Rings are implicitly closed.
struct Polygon {
  Ring outer;
  std::vector<Ring> holes;

  friend bool operator==(const Polygon&, const Polygon&) = default;
};

enum class ClassLabel {
  InvasiveCancer,
  DCIS,
  LCIS,
  NonMalignant,
  Artefact,
  LymphovascularInvasion,
  Tissue,
};

inline constexpr std::array<ClassLabel, 7> kAllClassLabels = {
    ClassLabel::InvasiveCancer, ClassLabel::DCIS,
    ClassLabel::LCIS,           ClassLabel::NonMalignant,
    ClassLabel::Artefact,       ClassLabel::LymphovascularInvasion,
    ClassLabel::Tissue,
};

/// Canonical name written to annotation files.
std::string_view class_name(ClassLabel c);

/// Case-insensitive lookup through the alias table ("IC", "invasive cancer",
/// ...). Returns nullopt for names outside the closed set.
std::optional<ClassLabel> class_from_name(std::string_view name);

struct Region {
  ClassLabel label;
  Polygon polygon;

  friend bool operator==(const Region&, const Region&) = default;
};

/// Annotation polygons of one slide. Regions may overlap.
struct AnnotationSet {
  std::string slide_id;
  std::vector<Region> regions;

  friend bool operator==(const AnnotationSet&, const AnnotationSet&) = default;
};

struct CaseRecord {
  std::string case_id;
  std::string he_slide_id;
  std::string ihc_slide_id;
  std::optional<double> ki67_score;

  friend bool operator==(const CaseRecord&, const CaseRecord&) = default;
};

/// Slide extent in micrometres.
struct ExtentUm {
  double width = 0.0;
  double height = 0.0;
};

/// Throws ValidationError when a ring has fewer than 3 vertices or a
/// non-finite coordinate. `context` is prepended to the message.
void validate_polygon(const Polygon& p, std::string_view context = {});
void validate_case(const CaseRecord& c);

}  // namespace annoreg
