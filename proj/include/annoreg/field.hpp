#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "annoreg/types.hpp"

namespace annoreg {

/// Dense forward (source -> target) displacement field.
///
/// Node (i, j) sits at (i * spacing_um, j * spacing_um) in the source frame.
/// Displacements are in field pixels; multiply by spacing_um for micrometres.
/// Planes are row-major, index j * grid_w + i.
struct DeformationField {
  std::uint32_t grid_w = 0;
  std::uint32_t grid_h = 0;
  double spacing_um = 1.0;
  std::vector<float> dx;
  std::vector<float> dy;

  static DeformationField zeros(std::uint32_t w, std::uint32_t h, double spacing_um);
  static DeformationField constant(std::uint32_t w, std::uint32_t h,
                                   double spacing_um, float dx, float dy);

  std::size_t index(std::uint32_t i, std::uint32_t j) const {
    return static_cast<std::size_t>(j) * grid_w + i;
  }

  friend bool operator==(const DeformationField&, const DeformationField&) = default;
};

/// Throws ValidationError on a broken invariant (size, spacing, finiteness).
void validate_field(const DeformationField& f);

// WDF1: "WDF1", u32 grid_w, u32 grid_h, f64 spacing_um, dx plane, dy plane;
// all little-endian, planes row-major f32.
inline constexpr std::string_view kFieldMagic = "WDF1";

DeformationField load_field(std::string_view bytes);
std::string save_field(const DeformationField& f);

/// Plain-text variant: `grid_w grid_h spacing_um` on the first line, then
/// all dx values, then all dy values, whitespace separated.
DeformationField parse_text_field(std::string_view text);

/// Reads a file, dispatching on the WDF1 magic.
DeformationField load_field_file(const std::filesystem::path& path);
void save_field_file(const DeformationField& f, const std::filesystem::path& path);

/// Bilinearly interpolated displacement in field pixels at a point given in
/// field-pixel coordinates; positions outside the grid clamp to the border.
PointUm interpolate_displacement(const DeformationField& f, double u, double v);

PointUm displace_point(const DeformationField& f, PointUm pt);

/// Vertex-wise warp; rings keep their vertex count and order.
Polygon warp_polygon(const DeformationField& f, const Polygon& p);

AnnotationSet warp_annotation_set(const DeformationField& f, const AnnotationSet& a,
                                  std::string_view target_slide_id);

}  // namespace annoreg
