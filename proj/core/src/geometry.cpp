#include "synthpop/geometry.hpp"

#include <algorithm>

namespace synthpop {

void BBox::extend(Point p) {
  min_x = std::min(min_x, p.x);
  min_y = std::min(min_y, p.y);
  max_x = std::max(max_x, p.x);
  max_y = std::max(max_y, p.y);
}

void BBox::extend(const BBox& b) {
  if (b.empty()) return;
  extend(Point{b.min_x, b.min_y});
  extend(Point{b.max_x, b.max_y});
}

BBox Polygon::bounds() const {
  BBox b;
  for (const auto& ring : rings) {
    for (Point p : ring) b.extend(p);
  }
  return b;
}

double Polygon::area() const {
  double total = 0.0;
  for (const auto& ring : rings) {
    double a = 0.0;
    for (std::size_t i = 0, n = ring.size(); i < n; ++i) {
      const Point p = ring[i];
      const Point q = ring[(i + 1) % n];
      a += p.x * q.y - q.x * p.y;
    }
    total += 0.5 * a;
  }
  return total;
}

Point Polygon::centroid() const {
  double a_sum = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  double mx = 0.0;
  double my = 0.0;
  std::size_t count = 0;
  for (const auto& ring : rings) {
    for (std::size_t i = 0, n = ring.size(); i < n; ++i) {
      const Point p = ring[i];
      const Point q = ring[(i + 1) % n];
      const double cross = p.x * q.y - q.x * p.y;
      a_sum += cross;
      cx += (p.x + q.x) * cross;
      cy += (p.y + q.y) * cross;
      mx += p.x;
      my += p.y;
      ++count;
    }
  }
  if (std::abs(a_sum) < 1e-12) {
    if (count == 0) return {};
    return {mx / static_cast<double>(count), my / static_cast<double>(count)};
  }
  return {cx / (3.0 * a_sum), cy / (3.0 * a_sum)};
}

bool point_in_polygon(const Polygon& polygon, Point p) {
  bool inside = false;
  for (const auto& ring : polygon.rings) {
    const std::size_t n = ring.size();
    if (n < 3) continue;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Point a = ring[i];
      const Point b = ring[j];
      if ((a.y > p.y) != (b.y > p.y)) {
        const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
        if (p.x < x_cross) inside = !inside;
      }
    }
  }
  return inside;
}

PointGrid::PointGrid(std::span<const Point> points, double cell_size)
    : points_(points.begin(), points.end()) {
  if (points_.empty()) return;
  for (Point p : points_) bounds_.extend(p);
  const double w = std::max(bounds_.max_x - bounds_.min_x, 1.0);
  const double h = std::max(bounds_.max_y - bounds_.min_y, 1.0);
  if (cell_size <= 0.0) {
    // Aim for roughly two points per cell.
    cell_size = std::sqrt(w * h / std::max<double>(1.0, points_.size() / 2.0));
  }
  cell_size_ = std::max(cell_size, 1e-6);
  nx_ = std::max(1L, static_cast<long>(std::ceil(w / cell_size_)) + 1);
  ny_ = std::max(1L, static_cast<long>(std::ceil(h / cell_size_)) + 1);
  cells_.assign(static_cast<std::size_t>(nx_ * ny_), {});
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const long cx = std::clamp(cell_x(points_[i].x), 0L, nx_ - 1);
    const long cy = std::clamp(cell_y(points_[i].y), 0L, ny_ - 1);
    cells_[static_cast<std::size_t>(cy * nx_ + cx)].push_back(i);
  }
}

long PointGrid::cell_x(double x) const {
  return static_cast<long>(std::floor((x - bounds_.min_x) / cell_size_));
}

long PointGrid::cell_y(double y) const {
  return static_cast<long>(std::floor((y - bounds_.min_y) / cell_size_));
}

const std::vector<std::size_t>& PointGrid::cell(long cx, long cy) const {
  return cells_[static_cast<std::size_t>(cy * nx_ + cx)];
}

std::vector<std::size_t> PointGrid::within(Point q, double radius) const {
  std::vector<std::size_t> out;
  if (points_.empty()) return out;
  const long x0 = std::max(0L, cell_x(q.x - radius));
  const long x1 = std::min(nx_ - 1, cell_x(q.x + radius));
  const long y0 = std::max(0L, cell_y(q.y - radius));
  const long y1 = std::min(ny_ - 1, cell_y(q.y + radius));
  const double r2 = radius * radius;
  for (long cy = y0; cy <= y1; ++cy) {
    for (long cx = x0; cx <= x1; ++cx) {
      for (std::size_t idx : cell(cx, cy)) {
        if (squared_distance(points_[idx], q) <= r2) out.push_back(idx);
      }
    }
  }
  return out;
}

}  // namespace synthpop
