#pragma once

#include <cstdint>
#include <vector>

#include "annoreg/types.hpp"

namespace annoreg {

/// Resolution-tagged binary raster, row-major, one byte (0/1) per pixel.
/// Pixel (x, y) covers [x*res, (x+1)*res) x [y*res, (y+1)*res) micrometres.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height, double resolution_um);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double resolution_um() const noexcept { return resolution_um_; }

  bool at(int x, int y) const { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool value = true) { bits_[index(x, y)] = value ? 1 : 0; }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }
  std::size_t size() const noexcept { return bits_.size(); }
  std::uint64_t count() const;

  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
  std::vector<std::uint8_t>& bits() noexcept { return bits_; }

  bool same_shape(const BinaryMask& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           resolution_um_ == other.resolution_um_;
  }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  double resolution_um_ = 1.0;
  std::vector<std::uint8_t> bits_;
};

/// Label image with labels 1..K in scan order of each component's first
/// pixel; 0 is background.
struct ComponentLabeling {
  int width = 0;
  int height = 0;
  std::vector<std::int32_t> labels;
  std::vector<std::uint64_t> areas;  // areas[k - 1] is the area of label k

  std::size_t count() const noexcept { return areas.size(); }
};

/// Rasterizes the union of all `cls` polygons: pixel (i, j) is set iff its
/// center ((i+0.5)*res, (j+0.5)*res) is inside some polygon by the even-odd
/// rule of point_in_polygon.
BinaryMask rasterize_class(const AnnotationSet& a, ClassLabel cls, double resolution_um,
                           int width, int height);

/// Scanline rasterizer for one class, reusable over many windows of the same
/// global pixel grid (e.g. per-tile label counting).
class ClassRasterizer {
 public:
  ClassRasterizer(const AnnotationSet& a, ClassLabel cls, double resolution_um);

  /// Pixels of the window [x0, x0+w) x [y0, y0+h) whose centers are covered.
  std::uint64_t count(long long x0, long long y0, int w, int h) const;

  /// Writes the window into `out` (must be w x h); returns the covered count.
  std::uint64_t fill(long long x0, long long y0, BinaryMask& out) const;

  bool empty() const noexcept { return polygons_.empty(); }

 private:
  struct Entry {
    const Polygon* polygon;
    double min_x, max_x, min_y, max_y;
  };

  template <typename Sink>
  void scan(long long x0, long long y0, int w, int h, Sink&& sink) const;

  double res_;
  std::vector<Entry> polygons_;
};

/// 8-connected labeling of foreground pixels.
ComponentLabeling connected_components(const BinaryMask& m);

/// 8-connected labeling of background pixels (used for hole detection).
ComponentLabeling background_components(const BinaryMask& m);

/// Clears foreground components smaller than `min_area_px`, then fills
/// background components that do not touch the border and are smaller than
/// `min_area_px`. Idempotent.
BinaryMask remove_small_components(const BinaryMask& m, std::uint64_t min_area_px);

/// Removes components with strictly more than `area_fraction` of their
/// pixels inside the outer edge band of width ceil(edge_fraction * size).
BinaryMask remove_edge_components(const BinaryMask& m, double edge_fraction = 0.10,
                                  double area_fraction = 0.50);

/// Both empty -> 1; exactly one empty -> 0. Throws on shape mismatch.
double mask_dice(const BinaryMask& a, const BinaryMask& b);
double mask_jaccard(const BinaryMask& a, const BinaryMask& b);

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // 3 bytes per pixel, row-major

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

namespace overlay_color {
inline constexpr std::uint8_t kBoth[3] = {0, 255, 0};
inline constexpr std::uint8_t kFirstOnly[3] = {255, 0, 0};
inline constexpr std::uint8_t kSecondOnly[3] = {0, 0, 255};
inline constexpr std::uint8_t kNeither[3] = {255, 255, 255};
}  // namespace overlay_color

/// Agreement overlay: green = both, red = only `a`, blue = only `b`,
/// white = neither.
RgbImage overlay_rgb(const BinaryMask& a, const BinaryMask& b);

/// Number of band pixels along one axis: ceil(fraction * size), tolerant of
/// representation error in the product (0.1 * 30 is 3, not 4).
int edge_band_width(double fraction, int size);

}  // namespace annoreg
