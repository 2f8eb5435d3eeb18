#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "annoreg/mask.hpp"
#include "annoreg/types.hpp"

namespace annoreg {

struct TileRecord {
  std::string slide_id;
  long long tile_x = 0;  // top-left corner, pixels at tile resolution
  long long tile_y = 0;
  double tissue_fraction = 0.0;
  std::optional<int> label_ihc;
  std::optional<int> label_registered;

  friend bool operator==(const TileRecord&, const TileRecord&) = default;
};

struct TileManifest {
  int tile_size_px = 598;
  int stride_px = 598;
  double tile_resolution_um = 0.454;
  std::vector<TileRecord> records;

  friend bool operator==(const TileManifest&, const TileManifest&) = default;
};

struct TilingParams {
  int tile_size_px = 598;
  int stride_px = 598;
  double tile_resolution_um = 0.454;
  double min_tissue_fraction = 0.5;
  double min_cancer_fraction = 0.5;
  ClassLabel cancer_class = ClassLabel::InvasiveCancer;
};

/// Tolerance for inclusive fraction thresholds computed from fractional areas.
inline constexpr double kFractionTolerance = 1e-9;

/// remove_small_components followed by remove_edge_components.
BinaryMask clean_tissue_mask(const BinaryMask& raw, std::uint64_t min_area_px,
                             double edge_fraction = 0.10, double area_fraction = 0.50);

/// Keeps the N largest components of `ihc_clean`, N being the component
/// count of `he_clean`. Equal areas rank by scan-order label. Throws
/// ValidationError when `he_clean` has no components.
BinaryMask exclude_control_tissue(const BinaryMask& he_clean, const BinaryMask& ihc_clean);

struct TileCandidate {
  long long tile_x = 0;
  long long tile_y = 0;
  double tissue_fraction = 0.0;

  friend bool operator==(const TileCandidate&, const TileCandidate&) = default;
};

/// Area-weighted foreground fraction of the axis-aligned rectangle
/// [x0, x1) x [y0, y1) (micrometres); area outside the mask is background.
double mask_coverage(const BinaryMask& mask, double x0, double y0, double x1, double y1);

/// Grid anchored at (0, 0) with the given stride; only tiles fully inside
/// the slide extent are considered. Row-major (tile_y, then tile_x) order.
std::vector<TileCandidate> tile_grid(ExtentUm slide_extent, const BinaryMask& tissue,
                                     const TilingParams& params);

/// 1 iff at least `min_cancer_fraction` of the tile's pixel centers fall
/// inside the class union, rasterized at tile resolution.
int assign_tile_label(long long tile_x, long long tile_y, const AnnotationSet& source,
                      const TilingParams& params);

/// Same rule, reusing a prepared rasterizer for many tiles.
int assign_tile_label(long long tile_x, long long tile_y, const ClassRasterizer& source,
                      const TilingParams& params);

/// Tiles with tissue and both labels. Either annotation source may be absent,
/// leaving its label column empty. Annotation slide ids must match the
/// case's IHC slide id.
TileManifest build_manifest(const CaseRecord& pair, const AnnotationSet* ihc_annotations,
                            const AnnotationSet* registered_annotations,
                            const BinaryMask& tissue, ExtentUm slide_extent,
                            const TilingParams& params);

/// Sorts by (slide_id, tile_y, tile_x) and rejects duplicate keys.
void sort_and_check_manifest(TileManifest& m);

}  // namespace annoreg
