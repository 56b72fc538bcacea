#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "chop/geom.hpp"
#include "support.hpp"

using namespace chop;

namespace {

Polygon unit_square() { return rect_polygon({0, 0, 1, 1}); }

Polygon square_with_hole() {
  return make_polygon(Ring{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}},
                      {Ring{{{0.25, 0.25}, {0.75, 0.25}, {0.75, 0.75}, {0.25, 0.75}}}});
}

}  // namespace

TEST(BBox, OfPointIsDegenerate) {
  const BBox b = bbox_of(Geometry{Point{2, 3}});
  EXPECT_EQ(b, (BBox{2, 3, 2, 3}));
}

TEST(BBox, OfUnitSquare) { EXPECT_EQ(bbox_of(Geometry{unit_square()}), (BBox{0, 0, 1, 1})); }

TEST(BBox, OfPolyline) { EXPECT_EQ(bbox_of(Geometry{Polyline{{{0, 0}, {5, -1}}}}), (BBox{0, -1, 5, 0})); }

TEST(BBox, ExpandedAndUnited) {
  const BBox b{0, 0, 1, 1};
  EXPECT_EQ(b.expanded(2), (BBox{-2, -2, 3, 3}));
  EXPECT_EQ(b.united({2, -1, 3, 0.5}), (BBox{0, -1, 3, 1}));
  EXPECT_TRUE(b.intersects({1, 1, 2, 2}));
  EXPECT_FALSE(b.intersects({1.5, 0, 2, 1}));
}

TEST(PointInPolygon, Basic) {
  EXPECT_TRUE(point_in_polygon({0.5, 0.5}, unit_square()));
  EXPECT_FALSE(point_in_polygon({2, 2}, unit_square()));
}

TEST(PointInPolygon, HoleExcludes) {
  EXPECT_FALSE(point_in_polygon({0.5, 0.5}, square_with_hole()));
  EXPECT_TRUE(point_in_polygon({0.1, 0.5}, square_with_hole()));
}

TEST(PointInPolygon, BoundaryCountsAsInside) {
  EXPECT_TRUE(point_in_polygon({0, 0.5}, unit_square()));
  EXPECT_TRUE(point_in_polygon({1, 1}, unit_square()));
}

TEST(ClipRing, Identity) {
  auto r = clip_ring_to_rect(unit_square().outer, {0, 0, 1, 1});
  ASSERT_TRUE(r);
  EXPECT_DOUBLE_EQ(signed_area(*r), 1.0);
}

TEST(ClipRing, HalfOverlap) {
  auto r = clip_ring_to_rect(unit_square().outer, {0.5, 0, 1.5, 1});
  ASSERT_TRUE(r);
  EXPECT_DOUBLE_EQ(signed_area(*r), 0.5);
}

TEST(ClipRing, Outside) { EXPECT_FALSE(clip_ring_to_rect(unit_square().outer, {2, 2, 3, 3})); }

TEST(ClipRing, ConcaveRing) {
  // L-shaped ring clipped to a window through its notch.
  const Polygon l = make_polygon(Ring{{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}});
  auto r = clip_ring_to_rect(l.outer, {0.5, 0.5, 1.5, 1.5});
  ASSERT_TRUE(r);
  EXPECT_DOUBLE_EQ(signed_area(*r), 0.75);
}

TEST(Area, Examples) {
  EXPECT_DOUBLE_EQ(polygon_area(unit_square()), 1.0);
  EXPECT_DOUBLE_EQ(polygon_area(make_polygon(Ring{{{0, 0}, {1, 0}, {0, 1}}})), 0.5);
  EXPECT_DOUBLE_EQ(polygon_area(square_with_hole()), 0.75);
}

TEST(Area, OrientationIndependent) {
  const Polygon cw = make_polygon(Ring{{{0, 0}, {0, 1}, {1, 1}, {1, 0}}});
  EXPECT_GT(signed_area(cw.outer), 0);
  EXPECT_DOUBLE_EQ(polygon_area(cw), 1.0);
}

TEST(MakeRing, RejectsDegenerate) {
  EXPECT_THROW(make_ring({{0, 0}, {1, 1}}), InvalidInput);
  EXPECT_THROW(make_ring({{0, 0}, {1, 1}, {2, 2}}), InvalidInput);
  EXPECT_THROW(make_ring({{0, 0}, {1, 0}, {0, NAN}}), InvalidInput);
}

TEST(MakeRing, DropsClosingVertex) {
  const Ring r = make_ring({{0, 0}, {1, 0}, {1, 1}, {0, 0}});
  EXPECT_EQ(r.vertices.size(), 3u);
}

TEST(Buffer, FourSegmentsSquare) {
  const Polygon b = buffer_point({0, 0}, 1, 4);
  ASSERT_EQ(b.outer.vertices.size(), 4u);
  const Point expect[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(b.outer.vertices[k].x, expect[k].x, 1e-15);
    EXPECT_NEAR(b.outer.vertices[k].y, expect[k].y, 1e-15);
  }
}

TEST(Buffer, InscribedPolygonArea) {
  const int n = 64;
  const double closed_form = 0.5 * n * std::sin(2 * std::numbers::pi / n);
  EXPECT_NEAR(closed_form, 3.136548490545939, 1e-15);
  EXPECT_NEAR(polygon_area(buffer_point({0, 0}, 1, n)), closed_form, 1e-12);
  EXPECT_NEAR(polygon_area(buffer_point({123.5, -7}, 2.5, n)), closed_form * 6.25, 1e-9);
}

TEST(Buffer, ConvergesToCircle) {
  double prev = 0;
  for (int n : {8, 16, 32, 64, 128, 256}) {
    const double a = polygon_area(buffer_point({0, 0}, 1, n));
    EXPECT_GT(a, prev);
    EXPECT_LT(a, std::numbers::pi);
    prev = a;
  }
  EXPECT_NEAR(prev, std::numbers::pi, 1e-3);
}

TEST(Buffer, RejectsBadRadius) {
  EXPECT_THROW(buffer_point({0, 0}, 0), InvalidParameter);
  EXPECT_THROW(buffer_point({0, 0}, -1), InvalidParameter);
  EXPECT_THROW(buffer_point({0, 0}, 1, 2), InvalidParameter);
}

TEST(SegmentDistance, Examples) {
  EXPECT_DOUBLE_EQ(point_segment_distance({0, 1}, {-1, 0}, {1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(point_segment_distance({2, 0}, {-1, 0}, {1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(point_segment_distance({3, 4}, {0, 0}, {0, 0}), 5.0);
}

TEST(SegmentDistance, MatchesDenseSampling) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int t = 0; t < 200; ++t) {
    const Point p{u(rng), u(rng)}, a{u(rng), u(rng)}, b{u(rng), u(rng)};
    double best = INFINITY;
    for (int k = 0; k <= 20000; ++k) {
      const double s = k / 20000.0;
      best = std::min(best, std::hypot(p.x - (a.x + s * (b.x - a.x)), p.y - (a.y + s * (b.y - a.y))));
    }
    const double d = point_segment_distance(p, a, b);
    EXPECT_LE(d, best + 1e-12);
    EXPECT_NEAR(d, best, 2e-3);
  }
}

TEST(FeatureDistance, Polyline) {
  const Geometry line = Polyline{{{-10, 0}, {10, 0}, {10, 10}}};
  EXPECT_DOUBLE_EQ(point_feature_distance({0, 5}, line), 5.0);
  EXPECT_DOUBLE_EQ(point_feature_distance({12, 5}, line), 2.0);
  EXPECT_DOUBLE_EQ(point_feature_distance({10, 10}, line), 0.0);
}

TEST(RepresentativePoint, FirstVertex) {
  EXPECT_EQ(representative_point(Geometry{Point{1, 2}}), (Point{1, 2}));
  EXPECT_EQ(representative_point(Geometry{Polyline{{{3, 4}, {5, 6}}}}), (Point{3, 4}));
  EXPECT_EQ(representative_point(Geometry{unit_square()}), (Point{0, 0}));
}

TEST(ClipToConvex, RandomMatchesSupersample) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    const Polygon star = testing_support::random_polygon(rng, {0, 0}, 0.3, 1.0, false);
    const Polygon convex = testing_support::random_polygon(rng, {0.2, 0.1}, 0.5, 0.9, true);
    std::vector<Point> out, tmp;
    detail::clip_to_convex(star.outer.vertices, convex.outer.vertices, out, tmp);
    const double a = out.size() >= 3 ? signed_area(std::span<const Point>(out)) : 0.0;
    long hits = 0;
    const int s = 400;
    for (int j = 0; j < s; ++j) {
      for (int i = 0; i < s; ++i) {
        const Point p{-1 + 2.0 * (i + 0.5) / s, -1 + 2.0 * (j + 0.5) / s};
        if (point_in_polygon(p, star) && point_in_polygon(p, convex)) ++hits;
      }
    }
    EXPECT_NEAR(a, 4.0 * hits / (s * s), 2e-2);
  }
}
