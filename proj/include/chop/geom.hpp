#pragma once
#ifndef CHOP_GEOM_HPP
#define CHOP_GEOM_HPP

// Planar geometry primitives: boxes, rings, polygons, clipping and distances.
// Coordinates are plain Euclidean CRS units; nothing here knows about geodesy.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "chop/error.hpp"

namespace chop {

struct Point {
  double x = 0;
  double y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct BBox {
  double xmin = 0;
  double ymin = 0;
  double xmax = 0;
  double ymax = 0;

  friend bool operator==(const BBox&, const BBox&) = default;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  Point center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }

  BBox expanded(double d) const { return {xmin - d, ymin - d, xmax + d, ymax + d}; }

  // Closed-interval tests: touching boxes intersect.
  bool intersects(const BBox& o) const {
    return xmin <= o.xmax && o.xmin <= xmax && ymin <= o.ymax && o.ymin <= ymax;
  }
  bool contains(const BBox& o) const {
    return xmin <= o.xmin && o.xmax <= xmax && ymin <= o.ymin && o.ymax <= ymax;
  }
  bool contains(const Point& p) const { return xmin <= p.x && p.x <= xmax && ymin <= p.y && p.y <= ymax; }

  BBox united(const BBox& o) const {
    return {std::min(xmin, o.xmin), std::min(ymin, o.ymin), std::max(xmax, o.xmax), std::max(ymax, o.ymax)};
  }

  bool valid() const {
    return std::isfinite(xmin) && std::isfinite(ymin) && std::isfinite(xmax) && std::isfinite(ymax) &&
           xmin <= xmax && ymin <= ymax;
  }
};

// Implicitly closed: the first vertex is not repeated at the end.
struct Ring {
  std::vector<Point> vertices;
  friend bool operator==(const Ring&, const Ring&) = default;
};

// Outer ring counterclockwise, holes clockwise.
struct Polygon {
  Ring outer;
  std::vector<Ring> holes;
  friend bool operator==(const Polygon&, const Polygon&) = default;
};

struct Polyline {
  std::vector<Point> vertices;
  friend bool operator==(const Polyline&, const Polyline&) = default;
};

using Geometry = std::variant<Point, Polyline, Polygon>;

inline const char* geometry_name(const Geometry& g) {
  switch (g.index()) {
    case 0: return "Point";
    case 1: return "LineString";
    default: return "Polygon";
  }
}

// ---------------------------------------------------------------------------
// Areas and orientation

// Shoelace, evaluated relative to the first vertex to limit cancellation.
inline double signed_area(std::span<const Point> pts) {
  if (pts.size() < 3) return 0.0;
  const double ox = pts[0].x;
  const double oy = pts[0].y;
  double acc = 0.0;
  for (std::size_t i = 0, n = pts.size(); i < n; ++i) {
    const Point& a = pts[i];
    const Point& b = pts[(i + 1) % n];
    acc += (a.x - ox) * (b.y - oy) - (b.x - ox) * (a.y - oy);
  }
  return 0.5 * acc;
}

inline double signed_area(const Ring& r) { return signed_area(std::span<const Point>(r.vertices)); }

inline double polygon_area(const Polygon& poly) {
  double a = std::abs(signed_area(poly.outer));
  for (const Ring& h : poly.holes) a -= std::abs(signed_area(h));
  return a;
}

// ---------------------------------------------------------------------------
// Construction and validation

inline bool finite(const Point& p) { return std::isfinite(p.x) && std::isfinite(p.y); }

inline void drop_consecutive_duplicates(std::vector<Point>& v, bool closed) {
  v.erase(std::unique(v.begin(), v.end()), v.end());
  if (closed) {
    while (v.size() > 1 && v.front() == v.back()) v.pop_back();
  }
}

// Drops a repeated closing vertex and consecutive duplicates, then checks the ring invariants.
inline Ring make_ring(std::vector<Point> pts) {
  for (const Point& p : pts) {
    if (!finite(p)) throw InvalidInput("ring has a non-finite coordinate");
  }
  drop_consecutive_duplicates(pts, true);
  if (pts.size() < 3) throw InvalidInput("ring needs at least 3 distinct vertices");
  Ring r{std::move(pts)};
  if (signed_area(r) == 0.0) throw InvalidInput("ring has zero area");
  return r;
}

// Reorients rings so the outer ring is counterclockwise and holes clockwise.
inline Polygon make_polygon(Ring outer, std::vector<Ring> holes = {}) {
  if (signed_area(outer) < 0) std::reverse(outer.vertices.begin(), outer.vertices.end());
  for (Ring& h : holes) {
    if (signed_area(h) > 0) std::reverse(h.vertices.begin(), h.vertices.end());
  }
  Polygon p{std::move(outer), std::move(holes)};
  if (!(polygon_area(p) > 0)) throw InvalidInput("polygon holes cover the outer ring");
  return p;
}

inline Polyline make_polyline(std::vector<Point> pts) {
  for (const Point& p : pts) {
    if (!finite(p)) throw InvalidInput("line has a non-finite coordinate");
  }
  drop_consecutive_duplicates(pts, false);
  if (pts.size() < 2) throw InvalidInput("line needs at least 2 distinct vertices");
  return Polyline{std::move(pts)};
}

inline Polygon rect_polygon(const BBox& b) {
  return Polygon{Ring{{{b.xmin, b.ymin}, {b.xmax, b.ymin}, {b.xmax, b.ymax}, {b.xmin, b.ymax}}}, {}};
}

// ---------------------------------------------------------------------------
// Bounding boxes

inline BBox bbox_of(std::span<const Point> pts) {
  BBox b{pts[0].x, pts[0].y, pts[0].x, pts[0].y};
  for (const Point& p : pts.subspan(1)) {
    b.xmin = std::min(b.xmin, p.x);
    b.ymin = std::min(b.ymin, p.y);
    b.xmax = std::max(b.xmax, p.x);
    b.ymax = std::max(b.ymax, p.y);
  }
  return b;
}

inline BBox bbox_of(const Point& p) { return {p.x, p.y, p.x, p.y}; }
inline BBox bbox_of(const Polyline& l) { return bbox_of(std::span<const Point>(l.vertices)); }
inline BBox bbox_of(const Ring& r) { return bbox_of(std::span<const Point>(r.vertices)); }
inline BBox bbox_of(const Polygon& p) { return bbox_of(p.outer); }
inline BBox bbox_of(const Geometry& g) {
  return std::visit([](const auto& v) { return bbox_of(v); }, g);
}

// Point used for unique chunk ownership: the point itself, else the first vertex.
inline Point representative_point(const Geometry& g) {
  if (const auto* p = std::get_if<Point>(&g)) return *p;
  if (const auto* l = std::get_if<Polyline>(&g)) return l->vertices.front();
  return std::get<Polygon>(g).outer.vertices.front();
}

// ---------------------------------------------------------------------------
// Predicates and distances

namespace detail {

inline bool on_segment(const Point& p, const Point& a, const Point& b) {
  const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
  if (cross != 0.0) return false;
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

// Flips `inside` for every edge crossed by the rightward ray from p; returns true if p is on an edge.
inline bool ring_crossings(const Point& p, const Ring& r, bool& inside) {
  const auto& v = r.vertices;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    const Point& a = v[i];
    const Point& b = v[j];
    if (on_segment(p, a, b)) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xcross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < xcross) inside = !inside;
    }
  }
  return false;
}

}  // namespace detail

// Even-odd rule over all rings; points on any ring boundary count as inside.
inline bool point_in_polygon(const Point& p, const Polygon& poly) {
  bool inside = false;
  if (detail::ring_crossings(p, poly.outer, inside)) return true;
  for (const Ring& h : poly.holes) {
    if (detail::ring_crossings(p, h, inside)) return true;
  }
  return inside;
}

inline double point_segment_distance(const Point& p, const Point& a, const Point& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
  const double ex = a.x + t * dx - p.x;
  const double ey = a.y + t * dy - p.y;
  return std::sqrt(ex * ex + ey * ey);
}

inline double point_distance(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

// Distance from p to the nearest part of a point or polyline.
inline double point_feature_distance(const Point& p, const Geometry& g) {
  if (const auto* q = std::get_if<Point>(&g)) return point_distance(p, *q);
  if (const auto* l = std::get_if<Polyline>(&g)) {
    double best = point_segment_distance(p, l->vertices[0], l->vertices[1]);
    for (std::size_t i = 2; i < l->vertices.size(); ++i) {
      best = std::min(best, point_segment_distance(p, l->vertices[i - 1], l->vertices[i]));
    }
    return best;
  }
  throw UnsupportedGeometry("distance to polygon features is not supported");
}

// ---------------------------------------------------------------------------
// Buffers

// Regular polygon inscribed in the circle; first vertex at angle 0.
inline Polygon buffer_point(const Point& p, double radius, int segments = 64) {
  if (!(radius > 0) || !std::isfinite(radius)) throw InvalidParameter("buffer radius must be > 0");
  if (segments < 3) throw InvalidParameter("buffer needs at least 3 segments");
  std::vector<Point> v;
  v.reserve(static_cast<std::size_t>(segments));
  for (int k = 0; k < segments; ++k) {
    const double a = 2.0 * std::numbers::pi * k / segments;
    v.push_back({p.x + radius * std::cos(a), p.y + radius * std::sin(a)});
  }
  return Polygon{Ring{std::move(v)}, {}};
}

// ---------------------------------------------------------------------------
// Half-plane clipping (Sutherland-Hodgman passes)

namespace detail {

enum class Side { left, right, bottom, top };

// Keeps the part of `in` on the inner side of one axis-aligned line. Boundary points are inside.
inline void clip_axis(std::span<const Point> in, Side side, double c, std::vector<Point>& out) {
  out.clear();
  if (in.empty()) return;
  auto inside = [&](const Point& p) {
    switch (side) {
      case Side::left: return p.x >= c;
      case Side::right: return p.x <= c;
      case Side::bottom: return p.y >= c;
      default: return p.y <= c;
    }
  };
  auto cross = [&](const Point& a, const Point& b) -> Point {
    if (side == Side::left || side == Side::right) {
      const double t = (c - a.x) / (b.x - a.x);
      return {c, a.y + t * (b.y - a.y)};
    }
    const double t = (c - a.y) / (b.y - a.y);
    return {a.x + t * (b.x - a.x), c};
  };
  const Point* prev = &in.back();
  bool prev_in = inside(*prev);
  for (const Point& cur : in) {
    const bool cur_in = inside(cur);
    if (cur_in) {
      if (!prev_in) out.push_back(cross(*prev, cur));
      out.push_back(cur);
    } else if (prev_in) {
      out.push_back(cross(*prev, cur));
    }
    prev = &cur;
    prev_in = cur_in;
  }
}

// Keeps the part of `in` left of the directed line a->b (counterclockwise interior).
inline void clip_line(std::span<const Point> in, const Point& a, const Point& b, std::vector<Point>& out) {
  out.clear();
  if (in.empty()) return;
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  auto side = [&](const Point& p) { return dx * (p.y - a.y) - dy * (p.x - a.x); };
  // Crossings on axis-parallel lines take the line's coordinate exactly.
  auto cross = [&](const Point& p, const Point& q, double sp, double sc) {
    const double t = sp / (sp - sc);
    Point x{p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)};
    if (dy == 0) x.y = a.y;
    if (dx == 0) x.x = a.x;
    return x;
  };
  const Point* prev = &in.back();
  double sp = side(*prev);
  for (const Point& cur : in) {
    const double sc = side(cur);
    if (sc >= 0) {
      if (sp < 0) out.push_back(cross(*prev, cur, sp, sc));
      out.push_back(cur);
    } else if (sp >= 0) {
      out.push_back(cross(*prev, cur, sp, sc));
    }
    prev = &cur;
    sp = sc;
  }
}

inline void clip_to_rect(std::span<const Point> in, const BBox& r, std::vector<Point>& out, std::vector<Point>& tmp) {
  clip_axis(in, Side::left, r.xmin, tmp);
  clip_axis(tmp, Side::right, r.xmax, out);
  clip_axis(out, Side::bottom, r.ymin, tmp);
  clip_axis(tmp, Side::top, r.ymax, out);
}

// `convex` must be counterclockwise.
inline void clip_to_convex(std::span<const Point> in, std::span<const Point> convex, std::vector<Point>& out,
                           std::vector<Point>& tmp) {
  out.assign(in.begin(), in.end());
  for (std::size_t i = 0; i < convex.size() && !out.empty(); ++i) {
    clip_line(out, convex[i], convex[(i + 1) % convex.size()], tmp);
    out.swap(tmp);
  }
}

}  // namespace detail

// Clip against a convex rectangle. Orientation is preserved; nullopt when the overlap has no area.
inline std::optional<Ring> clip_ring_to_rect(const Ring& ring, const BBox& rect) {
  if (!(rect.width() > 0 && rect.height() > 0)) throw InvalidParameter("clip rectangle is degenerate");
  std::vector<Point> out;
  std::vector<Point> tmp;
  detail::clip_to_rect(ring.vertices, rect, out, tmp);
  drop_consecutive_duplicates(out, true);
  if (out.size() < 3 || signed_area(out) == 0.0) return std::nullopt;
  return Ring{std::move(out)};
}

}  // namespace chop

#endif  // CHOP_GEOM_HPP
