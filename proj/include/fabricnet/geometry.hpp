#pragma once

#include <cmath>
#include <vector>

namespace fabricnet::geom {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::sqrt(a.x * a.x + a.y * a.y); }
inline double distance(const Vec2& a, const Vec2& b) { return norm(a - b); }

// Axis-aligned rectangle, lo <= hi on both axes.
struct Rect {
  Vec2 lo;
  Vec2 hi;

  double width() const { return hi.x - lo.x; }
  double height() const { return hi.y - lo.y; }
  double diagonal() const { return norm(hi - lo); }
  bool contains(const Vec2& p) const {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
  }
  Vec2 clamp(const Vec2& p) const {
    return {std::fmin(std::fmax(p.x, lo.x), hi.x), std::fmin(std::fmax(p.y, lo.y), hi.y)};
  }
};

double orientation(const Vec2& a, const Vec2& b, const Vec2& c);
bool point_on_segment(const Vec2& p, const Vec2& a, const Vec2& b);
bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2);

// Crossing test used for wall attenuation. The path (a, b) is treated as an
// open segment: a path endpoint lying exactly on the wall does not count,
// unless the path runs collinearly along the wall with positive overlap.
// Touching a wall endpoint with the path interior counts as one crossing.
bool segment_crosses_wall(const Vec2& a, const Vec2& b, const Vec2& w1, const Vec2& w2);

}  // namespace fabricnet::geom
