#include "radt/hull.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace radt {

namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double dist2(const Point2& a, const Point2& b) {
  double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

std::vector<Point2> dedupe(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

double scale_of(const std::vector<Point2>& pts) {
  double lo_x = std::numeric_limits<double>::max(), hi_x = -lo_x;
  double lo_y = lo_x, hi_y = hi_x;
  for (const auto& p : pts) {
    lo_x = std::min(lo_x, p.x);
    hi_x = std::max(hi_x, p.x);
    lo_y = std::min(lo_y, p.y);
    hi_y = std::max(hi_y, p.y);
  }
  return std::max({hi_x - lo_x, hi_y - lo_y, 1e-12});
}

// Proper intersection of open segments; shared endpoints do not count.
bool segments_intersect(const Point2& a, const Point2& b, const Point2& c,
                        const Point2& d) {
  if (a == c || a == d || b == c || b == d) return false;
  double d1 = cross(c, d, a);
  double d2 = cross(c, d, b);
  double d3 = cross(a, b, c);
  double d4 = cross(a, b, d);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

double segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  double vx = b.x - a.x, vy = b.y - a.y;
  double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  double dx = p.x - (a.x + t * vx), dy = p.y - (a.y + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

std::vector<Point2> convex_hull(std::vector<Point2> points) {
  points = dedupe(std::move(points));
  const std::size_t n = points.size();
  if (n <= 2) return points;
  std::vector<Point2> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {  // lower
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], points[i]) <= 0) --k;
    hull[k++] = points[i];
  }
  for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {  // upper
    while (k >= t && cross(hull[k - 2], hull[k - 1], points[i]) <= 0) --k;
    hull[k++] = points[i];
  }
  hull.resize(k - 1);
  return hull;
}

double polygon_area(const std::vector<Point2>& ring) {
  double a = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Point2& p = ring[i];
    const Point2& q = ring[(i + 1) % ring.size()];
    a += p.x * q.y - q.x * p.y;
  }
  return std::abs(a) / 2.0;
}

bool point_in_polygon(const Point2& p, const std::vector<Point2>& ring) {
  if (ring.size() < 3) return false;
  const double eps = 1e-9 * scale_of(ring);
  bool inside = false;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    if (segment_distance(p, ring[j], ring[i]) <= eps) return true;
    if ((ring[i].y > p.y) != (ring[j].y > p.y)) {
      double xint = ring[j].x + (p.y - ring[j].y) * (ring[i].x - ring[j].x) /
                                    (ring[i].y - ring[j].y);
      if (p.x < xint) inside = !inside;
    }
  }
  return inside;
}

namespace {

// One attempt of the k-nearest-neighbour hull walk; empty result = failure.
std::vector<Point2> knn_hull_attempt(const std::vector<Point2>& points, int kk) {
  const std::size_t n = points.size();
  std::vector<Point2> dataset = points;

  auto lowest = std::min_element(
      dataset.begin(), dataset.end(), [](const Point2& a, const Point2& b) {
        return a.y < b.y || (a.y == b.y && a.x < b.x);
      });
  Point2 first = *lowest;
  std::vector<Point2> hull{first};
  Point2 current = first;
  dataset.erase(lowest);
  double previous_angle = 0.0;
  int step = 2;

  while ((!(current == first) || step == 2) && !dataset.empty()) {
    if (step == 5) dataset.push_back(first);  // allow the walk to close

    // k nearest candidates, sorted by descending clockwise turn from the
    // previous heading.
    std::vector<std::size_t> idx(dataset.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::size_t take = std::min<std::size_t>(kk, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + take, idx.end(),
                      [&](std::size_t a, std::size_t b) {
                        return dist2(dataset[a], current) <
                               dist2(dataset[b], current);
                      });
    idx.resize(take);
    // Clockwise rotation from the back-pointing reference, in (0, 2*pi]: a
    // candidate dead ahead of the previous heading sorts first.
    auto turn = [&](std::size_t i) {
      double ang = std::atan2(dataset[i].y - current.y, dataset[i].x - current.x);
      double d = previous_angle - ang;
      while (d <= 0) d += 2.0 * M_PI;
      while (d > 2.0 * M_PI) d -= 2.0 * M_PI;
      return d;
    };
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return turn(a) > turn(b); });

    bool found = false;
    std::size_t chosen = 0;
    for (std::size_t c : idx) {
      bool hits = false;
      std::size_t last = (dataset[c] == first) ? 1 : 0;
      // Skip the edge adjacent to the current point; test all earlier edges.
      for (std::size_t j = 2; j + last < hull.size() && !hits; ++j) {
        hits = segments_intersect(hull[hull.size() - 1], dataset[c],
                                  hull[hull.size() - 1 - j],
                                  hull[hull.size() - j]);
      }
      if (!hits) {
        chosen = c;
        found = true;
        break;
      }
    }
    if (!found) return {};  // every candidate self-intersects

    current = dataset[chosen];
    hull.push_back(current);
    previous_angle = std::atan2(hull[hull.size() - 2].y - current.y,
                                hull[hull.size() - 2].x - current.x);
    dataset.erase(dataset.begin() + chosen);
    ++step;
    if (hull.size() > 4 * n + 8) return {};  // walk ran away; escalate k
  }

  if (!(current == first)) return {};
  hull.pop_back();  // drop the closing repeat

  for (const auto& p : points)
    if (!point_in_polygon(p, hull)) return {};
  return hull;
}

}  // namespace

std::vector<Point2> concave_hull_knn(const std::vector<Point2>& points,
                                     int k_start) {
  std::vector<Point2> pts = dedupe(points);
  if (pts.size() <= 3) return pts;
  for (int k = std::max(k_start, 3); k < static_cast<int>(pts.size()); ++k) {
    std::vector<Point2> hull = knn_hull_attempt(pts, k);
    if (!hull.empty()) return hull;
  }
  return convex_hull(pts);
}

HullDecomposition hull_decompose(const std::vector<Point2>& points) {
  HullDecomposition out;
  std::vector<Point2> pts = dedupe(points);
  out.convex_points = convex_hull(pts);
  if (pts.size() < 4 || out.convex_points.size() < 3) {
    out.concave_points = pts;
    return out;
  }
  out.concave_points = concave_hull_knn(pts, 3);
  const std::size_t m = out.concave_points.size();
  if (m < 3) return out;

  // A concave vertex counts as convex-boundary when it lies on the convex
  // polygon outline (edge-interior points included, not just vertices).
  const double eps = 1e-9 * scale_of(pts);
  std::vector<bool> on_convex(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < out.convex_points.size(); ++j) {
      const Point2& a = out.convex_points[j];
      const Point2& b = out.convex_points[(j + 1) % out.convex_points.size()];
      if (segment_distance(out.concave_points[i], a, b) <= eps) {
        on_convex[i] = true;
        break;
      }
    }
  }
  if (std::all_of(on_convex.begin(), on_convex.end(), [](bool b) { return b; }))
    return out;
  if (std::none_of(on_convex.begin(), on_convex.end(), [](bool b) { return b; }))
    return out;  // degenerate; no flanking border points exist

  // Maximal circular runs of interior vertices, each flanked by its adjacent
  // boundary vertices along the concave ring.
  std::size_t start = 0;
  while (!on_convex[start]) ++start;  // begin on a boundary vertex
  std::size_t i = start;
  do {
    std::size_t next = (i + 1) % m;
    if (on_convex[i] && !on_convex[next]) {
      Nook nook;
      nook.border_a = out.concave_points[i];
      std::size_t j = next;
      while (!on_convex[j]) {
        nook.members.push_back(out.concave_points[j]);
        j = (j + 1) % m;
      }
      nook.border_b = out.concave_points[j];
      out.nooks.push_back(std::move(nook));
      i = j;
    } else {
      i = next;
    }
  } while (i != start);
  return out;
}

}  // namespace radt
