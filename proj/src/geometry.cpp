#include "fabricnet/geometry.hpp"

#include <algorithm>

namespace fabricnet::geom {

double orientation(const Vec2& a, const Vec2& b, const Vec2& c) {
  return cross(b - a, c - a);
}

bool point_on_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  if (orientation(a, b, p) != 0.0) return false;
  return p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) &&
         p.y >= std::min(a.y, b.y) && p.y <= std::max(a.y, b.y);
}

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const double d1 = orientation(q1, q2, p1);
  const double d2 = orientation(q1, q2, p2);
  const double d3 = orientation(p1, p2, q1);
  const double d4 = orientation(p1, p2, q2);

  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  if (d1 == 0.0 && point_on_segment(p1, q1, q2)) return true;
  if (d2 == 0.0 && point_on_segment(p2, q1, q2)) return true;
  if (d3 == 0.0 && point_on_segment(q1, p1, p2)) return true;
  if (d4 == 0.0 && point_on_segment(q2, p1, p2)) return true;
  return false;
}

namespace {

// Overlap length of two collinear segments.
double collinear_overlap_length(const Vec2& a, const Vec2& b, const Vec2& w1, const Vec2& w2) {
  const Vec2 dir = b - a;
  const double len2 = dot(dir, dir);
  if (len2 == 0.0) return 0.0;
  double t1 = dot(w1 - a, dir) / len2;
  double t2 = dot(w2 - a, dir) / len2;
  if (t1 > t2) std::swap(t1, t2);
  const double lo = std::max(0.0, t1);
  const double hi = std::min(1.0, t2);
  return hi > lo ? (hi - lo) * std::sqrt(len2) : 0.0;
}

}  // namespace

bool segment_crosses_wall(const Vec2& a, const Vec2& b, const Vec2& w1, const Vec2& w2) {
  const bool a_on_wall = point_on_segment(a, w1, w2);
  const bool b_on_wall = point_on_segment(b, w1, w2);
  if (a_on_wall || b_on_wall) {
    // Path endpoint sits on the wall: open-segment rule, except a collinear
    // run along the wall with positive overlap, which counts once.
    if (orientation(a, b, w1) == 0.0 && orientation(a, b, w2) == 0.0) {
      return collinear_overlap_length(a, b, w1, w2) > 0.0;
    }
    return false;
  }
  return segments_intersect(a, b, w1, w2);
}

}  // namespace fabricnet::geom
