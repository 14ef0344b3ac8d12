#pragma once

#include <optional>
#include <vector>

namespace radt {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2& a, const Point2& b) {
    return a.x == b.x && a.y == b.y;
  }
};

/// Convex hull (Andrew monotone chain), counter-clockwise ring without the
/// closing repeat. Collinear edge-interior points are dropped. Degenerate
/// inputs (all collinear) yield the 2-point chain.
std::vector<Point2> convex_hull(std::vector<Point2> points);

/// k-nearest-neighbour concave hull. Starts at k = max(k_start, 3) and
/// escalates k until the walk closes into a simple polygon containing every
/// input point; falls back to the convex hull when k reaches the point count.
std::vector<Point2> concave_hull_knn(const std::vector<Point2>& points,
                                     int k_start = 3);

double polygon_area(const std::vector<Point2>& ring);

/// Boundary counts as inside.
bool point_in_polygon(const Point2& p, const std::vector<Point2>& ring);

struct Nook {
  Point2 border_a;  // flanking convex-boundary points, adjacent along
  Point2 border_b;  // the concave ring
  std::vector<Point2> members;
};

struct HullDecomposition {
  std::vector<Point2> convex_points;
  std::vector<Point2> concave_points;
  std::vector<Nook> nooks;
};

/// Concave/convex hull pair plus the "nooks": maximal runs of concave-hull
/// vertices that lie strictly inside the convex hull, each with its two
/// flanking convex-boundary ring points. Fewer than 4 distinct points or a
/// collinear input give an empty nook list.
HullDecomposition hull_decompose(const std::vector<Point2>& points);

}  // namespace radt
