#pragma once
#ifndef CHOP_GEOOPS_HPP
#define CHOP_GEOOPS_HPP

// The four summarizers that the executor parallelizes. Each takes the anchor
// dataset (one output row per feature, in input order) and a context dataset.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "chop/error.hpp"
#include "chop/features.hpp"
#include "chop/geom.hpp"
#include "chop/raster.hpp"
#include "chop/table.hpp"

namespace chop {

inline constexpr int kBufferSegments = 64;

// ---------------------------------------------------------------------------
// extract_at

struct ExtractParams {
  double radius = 0;
  StatKind stat = StatKind::mean;
  int segments = kBufferSegments;
};

inline void check_extract_inputs(const FeatureSet& y, const ExtractParams& p) {
  if (!(p.radius >= 0) || !std::isfinite(p.radius)) throw InvalidParameter("radius must be finite and >= 0");
  for (const auto& f : y.features) {
    if (std::holds_alternative<Polyline>(f.geometry))
      throw UnsupportedGeometry("extract_at does not support line features ('" + f.id + "')");
    if (std::holds_alternative<Polygon>(f.geometry) && p.radius > 0)
      throw UnsupportedGeometry("extract_at does not buffer polygons; use radius 0 ('" + f.id + "')");
  }
}

inline std::string frequency_column(double category) { return "freq_" + format_double(category); }

// Zone of one feature: its buffer (points, radius > 0), the containing cell
// (points, radius 0) or the polygon itself.
inline std::vector<CoverageCell> feature_coverage(const Raster& r, const Geometry& g, const ExtractParams& p,
                                                  std::optional<CellWindow> limit) {
  if (const auto* pt = std::get_if<Point>(&g)) {
    if (p.radius == 0) {
      auto c = cell_at_point(r, *pt);
      if (!c) return {};
      if (limit && (c->row < limit->row0 || c->row >= limit->row_end() || c->col < limit->col0 ||
                    c->col >= limit->col_end()))
        return {};
      return {*c};
    }
    return coverage_fractions(r, buffer_point(*pt, p.radius, p.segments), limit);
  }
  return coverage_fractions(r, std::get<Polygon>(g), limit);
}

// Raster summary per feature. Columns: the statistic (unless frequency), `count`
// (weighted valid cells), and one `freq_<category>` column per observed category.
// `limit` restricts reads to a window of the raster; cells outside it are treated as absent.
inline ResultTable extract_at(const Raster& x, const FeatureSet& y, const ExtractParams& p,
                              std::optional<CellWindow> limit = std::nullopt) {
  check_extract_inputs(y, p);
  if (p.stat == StatKind::frequency && x.kind != RasterKind::categorical)
    throw InvalidParameter("frequency requires a categorical raster");
  std::vector<Column> cols;
  if (p.stat != StatKind::frequency) cols.push_back({stat_name(p.stat)});
  if (p.stat != StatKind::count) cols.push_back({"count", 0.0});
  ResultTable t(std::move(cols));
  const auto stat_col = t.column_index(stat_name(p.stat));
  const auto count_col = t.column_index("count");
  for (const auto& f : y.features) {
    const auto cells = feature_coverage(x, f.geometry, p, limit);
    const StatResult s = zonal_stat(x, cells, p.stat);
    std::vector<std::pair<std::size_t, double>> freq;
    for (const auto& [cat, w] : s.frequency) freq.emplace_back(t.add_column({frequency_column(cat), 0.0, cat}), w);
    ResultRow& row = t.add_row(f.id);
    if (stat_col && s.value) row.values[*stat_col] = *s.value;
    if (count_col) row.values[*count_col] = s.count;
    for (const auto& [i, w] : freq) row.values[i] = w;
  }
  return t.canonical();
}

// ---------------------------------------------------------------------------
// Area-weighted polygon summary

namespace detail {

struct Trapezoid {
  Point v[4];  // counterclockwise; may repeat a vertex when it degenerates to a triangle
};

// Decomposes a polygon (with holes) into convex slab trapezoids between consecutive vertex ordinates.
inline std::vector<Trapezoid> trapezoids(const Polygon& poly) {
  struct Edge {
    Point a, b;  // a.y < b.y
  };
  std::vector<Edge> edges;
  std::vector<double> ys;
  auto add_ring = [&](const Ring& r) {
    const auto& v = r.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Point& p = v[i];
      const Point& q = v[(i + 1) % v.size()];
      ys.push_back(p.y);
      if (p.y == q.y) continue;
      edges.push_back(p.y < q.y ? Edge{p, q} : Edge{q, p});
    }
  };
  add_ring(poly.outer);
  for (const Ring& h : poly.holes) add_ring(h);
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  auto x_at = [](const Edge& e, double y) {
    if (y == e.a.y) return e.a.x;
    if (y == e.b.y) return e.b.x;
    return e.a.x + (y - e.a.y) * (e.b.x - e.a.x) / (e.b.y - e.a.y);
  };

  std::vector<Trapezoid> out;
  struct Cut {
    double x0, x1, xm;
  };
  std::vector<Cut> cuts;
  for (std::size_t s = 0; s + 1 < ys.size(); ++s) {
    const double y0 = ys[s];
    const double y1 = ys[s + 1];
    const double ym = 0.5 * (y0 + y1);
    cuts.clear();
    for (const Edge& e : edges) {
      if (e.a.y <= y0 && e.b.y >= y1) cuts.push_back({x_at(e, y0), x_at(e, y1), x_at(e, ym)});
    }
    std::sort(cuts.begin(), cuts.end(), [](const Cut& a, const Cut& b) { return a.xm < b.xm; });
    for (std::size_t k = 0; k + 1 < cuts.size(); k += 2) {
      const Cut& l = cuts[k];
      const Cut& r = cuts[k + 1];
      if (l.x0 == r.x0 && l.x1 == r.x1) continue;
      out.push_back(Trapezoid{{{l.x0, y0}, {r.x0, y0}, {r.x1, y1}, {l.x1, y1}}});
    }
  }
  return out;
}

inline double intersection_area(const std::vector<Trapezoid>& target, const Polygon& source) {
  const BBox sb = bbox_of(source);
  double area = 0;
  std::vector<Point> out;
  std::vector<Point> tmp;
  for (const Trapezoid& t : target) {
    const BBox tb = bbox_of(std::span<const Point>(t.v, 4));
    if (!tb.intersects(sb)) continue;
    auto clip_ring = [&](const Ring& r) {
      detail::clip_to_convex(r.vertices, std::span<const Point>(t.v, 4), out, tmp);
      area += signed_area(out);
    };
    clip_ring(source.outer);
    for (const Ring& h : source.holes) clip_ring(h);
  }
  return std::max(area, 0.0);
}

}  // namespace detail

// Area of a ∩ b. `a` is cut into convex trapezoids and b's rings are clipped against each.
inline double intersection_area(const Polygon& a, const Polygon& b) {
  if (!bbox_of(a).intersects(bbox_of(b))) return 0.0;
  return detail::intersection_area(detail::trapezoids(a), b);
}

enum class AwStat { mean, sum };

inline AwStat parse_aw_stat(const std::string& s) {
  if (s == "mean") return AwStat::mean;
  if (s == "sum") return AwStat::sum;
  throw InvalidParameter("summarize_aw supports mean or sum, not '" + s + "'");
}

// Source values transferred to targets by intersection area. One column per
// value column plus `coverage` = intersected area / target area.
inline ResultTable summarize_aw(const FeatureSet& targets, const FeatureSet& sources,
                                const std::vector<std::string>& value_columns, AwStat stat) {
  if (!targets.all_of_type<Polygon>() || !sources.all_of_type<Polygon>())
    throw InvalidInput("summarize_aw requires polygon targets and sources");
  if (value_columns.empty()) throw InvalidParameter("summarize_aw needs at least one value column");
  std::vector<Column> cols;
  for (const auto& c : value_columns) cols.push_back({c});
  cols.push_back({"coverage", 0.0});
  ResultTable t(std::move(cols));

  const std::size_t ns = sources.size();
  std::vector<BBox> sbox(ns);
  std::vector<std::vector<double>> values(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    sbox[i] = bbox_of(sources[i].geometry);
    for (const auto& c : value_columns) values[i].push_back(numeric_attr(sources[i], c));
  }
  // Source areas by the same trapezoid rule used for intersections.
  std::vector<double> sarea(ns, -1);
  auto source_area = [&](std::size_t i) {
    if (sarea[i] < 0) {
      const auto& sp = std::get<Polygon>(sources[i].geometry);
      sarea[i] = detail::intersection_area(detail::trapezoids(sp), sp);
    }
    return sarea[i];
  };

  std::vector<std::pair<std::size_t, double>> hits;
  for (const auto& tf : targets.features) {
    const auto& tp = std::get<Polygon>(tf.geometry);
    const BBox tb = bbox_of(tp);
    const auto traps = detail::trapezoids(tp);
    hits.clear();
    double total = 0;
    for (std::size_t i = 0; i < ns; ++i) {
      if (!tb.intersects(sbox[i])) continue;
      const double a = detail::intersection_area(traps, std::get<Polygon>(sources[i].geometry));
      if (a > 0) {
        hits.emplace_back(i, a);
        total += a;
      }
    }
    ResultRow& row = t.add_row(tf.id);
    const double tarea = polygon_area(tp);
    row.values.back() = total / tarea;
    if (hits.empty()) continue;
    for (std::size_t c = 0; c < value_columns.size(); ++c) {
      double acc = 0;
      for (const auto& [i, a] : hits) {
        const double w = stat == AwStat::mean ? a / total : a / source_area(i);
        acc += w * values[i][c];
      }
      row.values[c] = acc;
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Sum of exponentially decaying contributions

struct SedcParams {
  double bandwidth = 1;
  std::optional<double> maxdist;  // default 2 * bandwidth
  std::vector<std::string> value_columns;

  double cutoff() const { return maxdist.value_or(2 * bandwidth); }
};

inline void check_sedc_params(const SedcParams& p) {
  if (!(p.bandwidth > 0) || !std::isfinite(p.bandwidth)) throw InvalidParameter("bandwidth must be > 0");
  if (!(p.cutoff() >= p.bandwidth) || !std::isfinite(p.cutoff())) throw InvalidParameter("maxdist must be >= bandwidth");
  if (p.value_columns.empty()) throw InvalidParameter("summarize_sedc needs at least one value column");
}

// Weight of a source at distance d: exp(-3 d / bandwidth), so about 5% at the bandwidth.
inline double sedc_weight(double d, double bandwidth) { return std::exp(-3.0 * d / bandwidth); }

// Uniform bucket grid over points; queries return candidate indices in ascending order.
class PointGrid {
 public:
  PointGrid(const std::vector<Point>& pts, double cell) : pts_(pts), cell_(cell) {
    if (pts.empty()) return;
    box_ = bbox_of(std::span<const Point>(pts));
    nx_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(box_.width() / cell_)) + 1);
    ny_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(box_.height() / cell_)) + 1);
    const std::int64_t cap = 1 << 22;
    while (nx_ * ny_ > cap) {
      cell_ *= 2;
      nx_ = static_cast<std::int64_t>(std::floor(box_.width() / cell_)) + 1;
      ny_ = static_cast<std::int64_t>(std::floor(box_.height() / cell_)) + 1;
    }
    start_.assign(static_cast<std::size_t>(nx_ * ny_) + 1, 0);
    std::vector<std::size_t> key(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      key[i] = bucket(ix(pts[i].x), iy(pts[i].y));
      ++start_[key[i] + 1];
    }
    for (std::size_t b = 1; b < start_.size(); ++b) start_[b] += start_[b - 1];
    index_.resize(pts.size());
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < pts.size(); ++i) index_[fill[key[i]]++] = i;
  }

  void query(const BBox& b, std::vector<std::size_t>& out) const {
    out.clear();
    if (pts_.empty() || !b.intersects(box_)) return;
    const std::int64_t x0 = ix(b.xmin), x1 = ix(b.xmax), y0 = iy(b.ymin), y1 = iy(b.ymax);
    for (std::int64_t j = y0; j <= y1; ++j) {
      for (std::int64_t i = x0; i <= x1; ++i) {
        const std::size_t k = bucket(i, j);
        out.insert(out.end(), index_.begin() + static_cast<std::ptrdiff_t>(start_[k]),
                   index_.begin() + static_cast<std::ptrdiff_t>(start_[k + 1]));
      }
    }
    std::sort(out.begin(), out.end());
  }

 private:
  std::int64_t ix(double x) const {
    return std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor((x - box_.xmin) / cell_)), 0, nx_ - 1);
  }
  std::int64_t iy(double y) const {
    return std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor((y - box_.ymin) / cell_)), 0, ny_ - 1);
  }
  std::size_t bucket(std::int64_t i, std::int64_t j) const { return static_cast<std::size_t>(j * nx_ + i); }

  std::vector<Point> pts_;
  double cell_;
  BBox box_;
  std::int64_t nx_ = 0;
  std::int64_t ny_ = 0;
  std::vector<std::size_t> start_;
  std::vector<std::size_t> index_;
};

// Per target and value column v: sedc_v = sum over sources within maxdist of
// v * exp(-3 d / bandwidth), accumulated in source order; `n_sources` counts them.
inline ResultTable summarize_sedc(const FeatureSet& targets, const FeatureSet& sources, const SedcParams& p) {
  check_sedc_params(p);
  if (!targets.all_of_type<Point>() || !sources.all_of_type<Point>())
    throw InvalidInput("summarize_sedc requires point targets and sources");
  std::vector<Column> cols;
  for (const auto& c : p.value_columns) cols.push_back({"sedc_" + c, 0.0});
  cols.push_back({"n_sources", std::int64_t{0}});
  ResultTable t(std::move(cols));

  const auto src = representative_points(sources);
  std::vector<std::vector<double>> values(sources.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    for (const auto& c : p.value_columns) values[i].push_back(numeric_attr(sources[i], c));
  }
  const double cutoff = p.cutoff();
  const PointGrid grid(src, cutoff);
  std::vector<std::size_t> cand;
  std::vector<double> acc(p.value_columns.size());
  for (const auto& tf : targets.features) {
    const Point q = std::get<Point>(tf.geometry);
    grid.query(bbox_of(q).expanded(cutoff), cand);
    std::fill(acc.begin(), acc.end(), 0.0);
    std::int64_t n = 0;
    for (std::size_t i : cand) {
      const double d = point_distance(q, src[i]);
      if (d > cutoff) continue;
      const double w = sedc_weight(d, p.bandwidth);
      for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += values[i][c] * w;
      ++n;
    }
    ResultRow& row = t.add_row(tf.id);
    for (std::size_t c = 0; c < acc.size(); ++c) row.values[c] = acc[c];
    row.values.back() = n;
  }
  return t;
}

// ---------------------------------------------------------------------------
// Nearest feature distance

namespace detail {

// Empty context yields null distance rows instead of an error.
inline ResultTable nearest_rows(const FeatureSet& points, const FeatureSet& context) {
  if (!points.all_of_type<Point>()) throw InvalidInput("nearest_distance requires point features as y");
  for (const auto& f : context.features) {
    if (std::holds_alternative<Polygon>(f.geometry))
      throw UnsupportedGeometry("nearest_distance context must be points or lines ('" + f.id + "')");
  }
  ResultTable t({{"distance"}, {"nearest_id"}});
  for (const auto& pf : points.features) {
    const Point p = std::get<Point>(pf.geometry);
    double best = std::numeric_limits<double>::infinity();
    const Feature* best_f = nullptr;
    for (const auto& cf : context.features) {
      const double d = point_feature_distance(p, cf.geometry);
      if (d < best) {
        best = d;
        best_f = &cf;
      }
    }
    ResultRow& row = t.add_row(pf.id);
    if (best_f) {
      row.values[0] = best;
      row.values[1] = best_f->id;
    }
  }
  return t;
}

}  // namespace detail

// Distance from each point to the closest context feature (ties go to the earliest feature).
inline ResultTable nearest_distance(const FeatureSet& y, const FeatureSet& x) {
  if (x.empty()) throw InvalidInput("nearest_distance needs at least one context feature");
  return detail::nearest_rows(y, x);
}

}  // namespace chop

#endif  // CHOP_GEOOPS_HPP
