#include "annoreg/geometry.hpp"

#include <cmath>

namespace annoreg {

double ring_signed_area(const Ring& ring) {
  const std::size_t n = ring.size();
  if (n < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    twice += ring[j].x * ring[i].y - ring[i].x * ring[j].y;
  }
  return 0.5 * twice;
}

double polygon_area(const Polygon& p) {
  double area = std::abs(ring_signed_area(p.outer));
  for (const auto& hole : p.holes) area -= std::abs(ring_signed_area(hole));
  return area > 0.0 ? area : 0.0;
}

namespace {

int crossings_right_of(PointUm pt, const Ring& ring) {
  int count = 0;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    double x;
    if (edge_crossing(ring[j], ring[i], pt.y, x) && pt.x < x) ++count;
  }
  return count;
}

}  // namespace

bool point_in_polygon(PointUm pt, const Polygon& p) {
  int count = crossings_right_of(pt, p.outer);
  for (const auto& hole : p.holes) count += crossings_right_of(pt, hole);
  return (count & 1) != 0;
}

}  // namespace annoreg
