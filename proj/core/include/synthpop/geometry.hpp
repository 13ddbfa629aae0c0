#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace synthpop {

/// Planar coordinate in meters.
struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

inline double squared_distance(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}
inline double distance(Point a, Point b) { return std::sqrt(squared_distance(a, b)); }

struct BBox {
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();

  void extend(Point p);
  void extend(const BBox& b);
  bool contains(Point p) const {
    return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
  }
  bool empty() const { return min_x > max_x; }
};

using Ring = std::vector<Point>;

/// Polygon with any number of rings (outer boundaries and holes alike); the
/// inside test is even-odd over all rings, so MultiPolygons flatten into one.
struct Polygon {
  std::vector<Ring> rings;

  BBox bounds() const;
  /// Signed-area weighted centroid; falls back to the vertex mean for
  /// degenerate (zero-area) input.
  Point centroid() const;
  double area() const;
};

/// Even-odd ray casting with a half-open convention: an edge counts when
/// exactly one endpoint lies strictly above the test point's y, and the
/// crossing lies strictly to the right of it. Points on the left/bottom
/// boundary are inside, points on the right/top boundary are not, so two
/// polygons sharing an edge never both claim a point on it.
bool point_in_polygon(const Polygon& polygon, Point p);

/// Uniform bucket grid over a point set for nearest-neighbour queries.
class PointGrid {
 public:
  PointGrid() = default;
  PointGrid(std::span<const Point> points, double cell_size = 0.0);

  /// Index of the nearest point (ties broken by lowest index), or nullopt if
  /// the grid is empty. `accept` filters eligible indices.
  template <typename Accept>
  std::optional<std::size_t> nearest(Point q, Accept&& accept) const;
  std::optional<std::size_t> nearest(Point q) const {
    return nearest(q, [](std::size_t) { return true; });
  }

  /// Indices within `radius` of q, unordered.
  std::vector<std::size_t> within(Point q, double radius) const;

  std::size_t size() const { return points_.size(); }

 private:
  long cell_x(double x) const;
  long cell_y(double y) const;
  const std::vector<std::size_t>& cell(long cx, long cy) const;

  std::vector<Point> points_;
  std::vector<std::vector<std::size_t>> cells_;
  BBox bounds_;
  double cell_size_ = 1.0;
  long nx_ = 0;
  long ny_ = 0;
};

template <typename Accept>
std::optional<std::size_t> PointGrid::nearest(Point q, Accept&& accept) const {
  if (points_.empty()) return std::nullopt;
  const long qx = std::clamp(cell_x(q.x), 0L, nx_ - 1);
  const long qy = std::clamp(cell_y(q.y), 0L, ny_ - 1);
  std::optional<std::size_t> best;
  double best_d2 = std::numeric_limits<double>::infinity();
  const long max_ring = std::max(nx_, ny_);
  for (long ring = 0; ring <= max_ring; ++ring) {
    for (long cy = qy - ring; cy <= qy + ring; ++cy) {
      for (long cx = qx - ring; cx <= qx + ring; ++cx) {
        if (std::max(std::abs(cx - qx), std::abs(cy - qy)) != ring) continue;
        if (cx < 0 || cy < 0 || cx >= nx_ || cy >= ny_) continue;
        for (std::size_t idx : cell(cx, cy)) {
          if (!accept(idx)) continue;
          const double d2 = squared_distance(points_[idx], q);
          if (d2 < best_d2 || (d2 == best_d2 && best && idx < *best)) {
            best_d2 = d2;
            best = idx;
          }
        }
      }
    }
    // Every unvisited cell is at least `ring * cell_size_` away from q's cell
    // boundary, so once the best hit is closer than that we can stop.
    if (best) {
      const double reach = static_cast<double>(ring) * cell_size_;
      if (best_d2 <= reach * reach) break;
    }
  }
  return best;
}

}  // namespace synthpop
