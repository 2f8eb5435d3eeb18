#pragma once

#include "annoreg/types.hpp"

namespace annoreg {

/// Signed shoelace area; positive for counter-clockwise rings in a y-up frame.
double ring_signed_area(const Ring& ring);

/// Outer area minus hole areas, clamped at zero. Orientation-insensitive.
double polygon_area(const Polygon& p);

/// Even-odd test over all rings of `p`.
///
/// Edge ownership follows the crossing rule shared with the rasterizer: an
/// edge crosses the horizontal line through `pt` iff exactly one endpoint
/// has y strictly greater than pt.y, and `pt` is inside iff an odd number of
/// such crossings lie strictly to its right. Points on a left edge are
/// therefore inside, points on a right edge outside.
bool point_in_polygon(PointUm pt, const Polygon& p);

/// X coordinate where the edge a-b crosses the line at `y`, when it does
/// under the half-open rule above. Every raster path goes through this
/// function so that pixel-center decisions agree bit-for-bit with
/// point_in_polygon.
inline bool edge_crossing(PointUm a, PointUm b, double y, double& x) {
  if ((a.y > y) == (b.y > y)) return false;
  x = a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
  return true;
}

}  // namespace annoreg
