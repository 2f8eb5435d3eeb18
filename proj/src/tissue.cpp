#include "annoreg/tissue.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "annoreg/error.hpp"

namespace annoreg {

BinaryMask clean_tissue_mask(const BinaryMask& raw, std::uint64_t min_area_px,
                             double edge_fraction, double area_fraction) {
  return remove_edge_components(remove_small_components(raw, min_area_px), edge_fraction,
                                area_fraction);
}

BinaryMask exclude_control_tissue(const BinaryMask& he_clean, const BinaryMask& ihc_clean) {
  const std::size_t n = connected_components(he_clean).count();
  if (n == 0) {
    throw ValidationError(
        "H&E tissue mask has no components after cleaning; cannot select IHC tissue");
  }
  const auto cc = connected_components(ihc_clean);
  if (cc.count() <= n) return ihc_clean;

  std::vector<std::size_t> order(cc.count());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cc.areas[a] > cc.areas[b]; });
  std::vector<bool> keep(cc.count(), false);
  for (std::size_t k = 0; k < n; ++k) keep[order[k]] = true;

  BinaryMask out = ihc_clean;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto label = cc.labels[i];
    if (label > 0 && !keep[label - 1]) out.bits()[i] = 0;
  }
  return out;
}

namespace {

// Overlap lengths of [a, b) with each mask pixel column/row it touches.
struct AxisOverlap {
  int first = 0;
  std::vector<double> lengths;
};

AxisOverlap axis_overlap(double a, double b, double res, int size) {
  AxisOverlap out;
  if (!(b > a)) return out;
  const int lo = std::max(0, static_cast<int>(std::floor(a / res)));
  const int hi = std::min(size, static_cast<int>(std::ceil(b / res)));
  out.first = lo;
  for (int p = lo; p < hi; ++p) {
    const double p0 = p * res;
    const double p1 = (p + 1) * res;
    out.lengths.push_back(std::max(0.0, std::min(b, p1) - std::max(a, p0)));
  }
  return out;
}

}  // namespace

double mask_coverage(const BinaryMask& mask, double x0, double y0, double x1, double y1) {
  const double area = (x1 - x0) * (y1 - y0);
  if (!(area > 0.0)) return 0.0;
  const double res = mask.resolution_um();
  const auto ox = axis_overlap(x0, x1, res, mask.width());
  const auto oy = axis_overlap(y0, y1, res, mask.height());
  double covered = 0.0;
  for (std::size_t j = 0; j < oy.lengths.size(); ++j) {
    const int py = oy.first + static_cast<int>(j);
    double row = 0.0;
    for (std::size_t i = 0; i < ox.lengths.size(); ++i) {
      if (mask.at(ox.first + static_cast<int>(i), py)) row += ox.lengths[i];
    }
    covered += row * oy.lengths[j];
  }
  return covered / area;
}

std::vector<TileCandidate> tile_grid(ExtentUm slide_extent, const BinaryMask& tissue,
                                     const TilingParams& params) {
  if (params.tile_size_px <= 0 || params.stride_px <= 0 ||
      !(params.tile_resolution_um > 0.0)) {
    throw ValidationError("tile size, stride and resolution must be positive");
  }
  const double res = params.tile_resolution_um;
  const double tile_um = params.tile_size_px * res;
  auto fits = [&](long long start, double extent) {
    const double end = static_cast<double>(start + params.tile_size_px) * res;
    return end <= extent * (1.0 + kFractionTolerance);
  };

  std::vector<TileCandidate> out;
  for (long long ty = 0; fits(ty, slide_extent.height); ty += params.stride_px) {
    for (long long tx = 0; fits(tx, slide_extent.width); tx += params.stride_px) {
      const double x0 = static_cast<double>(tx) * res;
      const double y0 = static_cast<double>(ty) * res;
      const double fraction = mask_coverage(tissue, x0, y0, x0 + tile_um, y0 + tile_um);
      if (fraction >= params.min_tissue_fraction - kFractionTolerance) {
        out.push_back({tx, ty, fraction});
      }
    }
  }
  return out;
}

int assign_tile_label(long long tile_x, long long tile_y, const ClassRasterizer& source,
                      const TilingParams& params) {
  const auto n = static_cast<double>(params.tile_size_px) * params.tile_size_px;
  const auto covered =
      source.count(tile_x, tile_y, params.tile_size_px, params.tile_size_px);
  return static_cast<double>(covered) >= params.min_cancer_fraction * n ? 1 : 0;
}

int assign_tile_label(long long tile_x, long long tile_y, const AnnotationSet& source,
                      const TilingParams& params) {
  return assign_tile_label(tile_x, tile_y,
                           ClassRasterizer(source, params.cancer_class,
                                           params.tile_resolution_um),
                           params);
}

void sort_and_check_manifest(TileManifest& m) {
  auto key = [](const TileRecord& r) { return std::tie(r.slide_id, r.tile_y, r.tile_x); };
  std::stable_sort(m.records.begin(), m.records.end(),
                   [&](const TileRecord& a, const TileRecord& b) { return key(a) < key(b); });
  for (std::size_t i = 1; i < m.records.size(); ++i) {
    if (key(m.records[i - 1]) == key(m.records[i])) {
      const auto& r = m.records[i];
      throw ValidationError("duplicate tile " + r.slide_id + " (" + std::to_string(r.tile_x) +
                            ", " + std::to_string(r.tile_y) + ")");
    }
  }
}

TileManifest build_manifest(const CaseRecord& pair, const AnnotationSet* ihc_annotations,
                            const AnnotationSet* registered_annotations,
                            const BinaryMask& tissue, ExtentUm slide_extent,
                            const TilingParams& params) {
  for (const AnnotationSet* a : {ihc_annotations, registered_annotations}) {
    if (a != nullptr && a->slide_id != pair.ihc_slide_id) {
      throw ValidationError("annotation slide_id \"" + a->slide_id +
                            "\" does not match IHC slide \"" + pair.ihc_slide_id + "\"");
    }
  }
  std::optional<ClassRasterizer> ihc;
  std::optional<ClassRasterizer> registered;
  if (ihc_annotations) {
    ihc.emplace(*ihc_annotations, params.cancer_class, params.tile_resolution_um);
  }
  if (registered_annotations) {
    registered.emplace(*registered_annotations, params.cancer_class,
                       params.tile_resolution_um);
  }

  TileManifest manifest;
  manifest.tile_size_px = params.tile_size_px;
  manifest.stride_px = params.stride_px;
  manifest.tile_resolution_um = params.tile_resolution_um;
  for (const auto& tile : tile_grid(slide_extent, tissue, params)) {
    TileRecord r;
    r.slide_id = pair.ihc_slide_id;
    r.tile_x = tile.tile_x;
    r.tile_y = tile.tile_y;
    r.tissue_fraction = tile.tissue_fraction;
    if (ihc) r.label_ihc = assign_tile_label(tile.tile_x, tile.tile_y, *ihc, params);
    if (registered) {
      r.label_registered = assign_tile_label(tile.tile_x, tile.tile_y, *registered, params);
    }
    manifest.records.push_back(std::move(r));
  }
  sort_and_check_manifest(manifest);
  return manifest;
}

}  // namespace annoreg
