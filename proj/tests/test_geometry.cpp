#include "doctest.h"
#include "fabricnet/geometry.hpp"

using namespace fabricnet::geom;

TEST_CASE("vector algebra basics") {
  const Vec2 a{3.0, 4.0};
  const Vec2 b{1.0, -2.0};
  CHECK((a + b) == Vec2{4.0, 2.0});
  CHECK((a - b) == Vec2{2.0, 6.0});
  CHECK((a * 2.0) == Vec2{6.0, 8.0});
  CHECK(dot(a, b) == -5.0);
  CHECK(cross(a, b) == -10.0);
  CHECK(norm(a) == doctest::Approx(5.0));
  CHECK(distance(a, b) == doctest::Approx(std::sqrt(4.0 + 36.0)));
}

TEST_CASE("rect contains, clamp and extents") {
  const Rect r{{0.0, 0.0}, {4.0, 3.0}};
  CHECK(r.width() == 4.0);
  CHECK(r.height() == 3.0);
  CHECK(r.diagonal() == doctest::Approx(5.0));
  CHECK(r.contains({2.0, 1.0}));
  CHECK(r.contains({0.0, 0.0}));
  CHECK(r.contains({4.0, 3.0}));
  CHECK_FALSE(r.contains({4.1, 1.0}));
  CHECK(r.clamp({5.0, -1.0}) == Vec2{4.0, 0.0});
  CHECK(r.clamp({2.0, 1.0}) == Vec2{2.0, 1.0});
}

TEST_CASE("orientation sign convention") {
  CHECK(orientation({0, 0}, {1, 0}, {0, 1}) > 0.0);
  CHECK(orientation({0, 0}, {0, 1}, {1, 0}) < 0.0);
  CHECK(orientation({0, 0}, {1, 1}, {2, 2}) == 0.0);
}

TEST_CASE("point on segment") {
  CHECK(point_on_segment({1, 1}, {0, 0}, {2, 2}));
  CHECK(point_on_segment({0, 0}, {0, 0}, {2, 2}));
  CHECK_FALSE(point_on_segment({3, 3}, {0, 0}, {2, 2}));
  CHECK_FALSE(point_on_segment({1, 0}, {0, 0}, {2, 2}));
}

TEST_CASE("segment intersection basics") {
  CHECK(segments_intersect({0, 0}, {2, 2}, {0, 2}, {2, 0}));
  CHECK_FALSE(segments_intersect({0, 0}, {1, 0}, {0, 1}, {1, 1}));
  CHECK(segments_intersect({0, 0}, {2, 0}, {1, 0}, {3, 0}));
}

TEST_CASE("path crossing a wall proper counts") {
  CHECK(segment_crosses_wall({0, -1}, {0, 1}, {-1, 0}, {1, 0}));
  CHECK(segment_crosses_wall({0, 1}, {0, -1}, {-1, 0}, {1, 0}));
}

TEST_CASE("path endpoint resting on the wall does not count") {
  CHECK_FALSE(segment_crosses_wall({0, 0}, {0, 1}, {-1, 0}, {1, 0}));
  CHECK_FALSE(segment_crosses_wall({0, 1}, {0, 0}, {-1, 0}, {1, 0}));
}

TEST_CASE("path interior touching a wall endpoint counts once") {
  CHECK(segment_crosses_wall({0, -1}, {0, 1}, {0, 0}, {1, 0}));
}

TEST_CASE("collinear overlap counts, collinear disjoint does not") {
  CHECK(segment_crosses_wall({0, 0}, {3, 0}, {1, 0}, {2, 0}));
  CHECK_FALSE(segment_crosses_wall({0, 0}, {1, 0}, {2, 0}, {3, 0}));
}

TEST_CASE("parallel disjoint segments never cross") {
  CHECK_FALSE(segment_crosses_wall({0, 1}, {5, 1}, {0, 0}, {5, 0}));
}

TEST_CASE("wall crossing is symmetric in the wall ends") {
  CHECK(segment_crosses_wall({0, -1}, {0, 1}, {1, 0}, {-1, 0}));
}
