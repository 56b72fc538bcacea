#pragma once
#ifndef CHOP_RASTER_HPP
#define CHOP_RASTER_HPP

// In-memory square-cell rasters, cell windows, exact polygon coverage and the
// weighted zonal statistics built on top of it.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chop/error.hpp"
#include "chop/geom.hpp"

namespace chop {

enum class RasterKind { continuous, categorical };

struct Raster {
  int ncols = 0;
  int nrows = 0;
  double xll = 0;
  double yll = 0;
  double cellsize = 1;
  double nodata = -9999;
  std::vector<double> values;  // row-major, row 0 is the top row
  RasterKind kind = RasterKind::continuous;

  friend bool operator==(const Raster& a, const Raster& b) {
    if (a.ncols != b.ncols || a.nrows != b.nrows || a.xll != b.xll || a.yll != b.yll ||
        a.cellsize != b.cellsize || a.kind != b.kind || a.values.size() != b.values.size())
      return false;
    if (std::bit_cast<std::uint64_t>(a.nodata) != std::bit_cast<std::uint64_t>(b.nodata)) return false;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      if (std::bit_cast<std::uint64_t>(a.values[i]) != std::bit_cast<std::uint64_t>(b.values[i])) return false;
    }
    return true;
  }

  double at(int row, int col) const { return values[static_cast<std::size_t>(row) * ncols + col]; }
  bool is_nodata(double v) const { return std::bit_cast<std::uint64_t>(v) == std::bit_cast<std::uint64_t>(nodata); }

  double xmax() const { return xll + ncols * cellsize; }
  double ytop() const { return yll + nrows * cellsize; }
  BBox extent() const { return {xll, yll, xmax(), ytop()}; }

  // Cell edges, computed from global indices so every caller sees identical coordinates.
  double col_left(int col) const { return xll + col * cellsize; }
  double row_top(int row) const { return yll + (nrows - row) * cellsize; }
  BBox cell_box(int row, int col) const { return {col_left(col), row_top(row + 1), col_left(col + 1), row_top(row)}; }

  void validate() const {
    if (ncols <= 0 || nrows <= 0) throw InvalidInput("raster dimensions must be positive");
    if (!(cellsize > 0) || !std::isfinite(cellsize)) throw InvalidInput("raster cellsize must be > 0");
    if (!std::isfinite(xll) || !std::isfinite(yll)) throw InvalidInput("raster origin must be finite");
    if (values.size() != static_cast<std::size_t>(ncols) * static_cast<std::size_t>(nrows))
      throw InvalidInput("raster value count does not match ncols*nrows");
  }
};

struct CellWindow {
  int row0 = 0;
  int col0 = 0;
  int nrows = 0;
  int ncols = 0;

  friend bool operator==(const CellWindow&, const CellWindow&) = default;

  bool empty() const { return nrows <= 0 || ncols <= 0; }
  int row_end() const { return row0 + nrows; }
  int col_end() const { return col0 + ncols; }

  CellWindow intersected(const CellWindow& o) const {
    const int r0 = std::max(row0, o.row0);
    const int c0 = std::max(col0, o.col0);
    const int r1 = std::min(row_end(), o.row_end());
    const int c1 = std::min(col_end(), o.col_end());
    if (r1 <= r0 || c1 <= c0) return {};
    return {r0, c0, r1 - r0, c1 - c0};
  }
};

inline CellWindow full_window(const Raster& r) { return {0, 0, r.nrows, r.ncols}; }

// Smallest window holding every cell whose (closed) rectangle meets b.
inline CellWindow window_for_bbox(const Raster& r, const BBox& b) {
  if (!b.intersects(r.extent())) return {};
  auto clamp_idx = [](double v, int hi) { return static_cast<int>(std::clamp(v, 0.0, static_cast<double>(hi))); };
  const int c0 = clamp_idx(std::floor((b.xmin - r.xll) / r.cellsize), r.ncols - 1);
  const int c1 = clamp_idx(std::floor((b.xmax - r.xll) / r.cellsize), r.ncols - 1);
  const int r0 = clamp_idx(std::floor((r.ytop() - b.ymax) / r.cellsize), r.nrows - 1);
  const int r1 = clamp_idx(std::floor((r.ytop() - b.ymin) / r.cellsize), r.nrows - 1);
  return {r0, c0, r1 - r0 + 1, c1 - c0 + 1};
}

struct CoverageCell {
  int row = 0;
  int col = 0;
  double fraction = 0;  // in (0, 1]

  friend bool operator==(const CoverageCell&, const CoverageCell&) = default;
};

// Area share of every cell covered by `poly`, in row-major order.
//
// Each ring is clipped once to a row strip and then to each cell of that row;
// signed areas of outer ring and holes are summed per cell. Only cells inside
// `limit` are visited, and each cell's result does not depend on `limit`.
inline std::vector<CoverageCell> coverage_fractions(const Raster& r, const Polygon& poly,
                                                    std::optional<CellWindow> limit = std::nullopt) {
  std::vector<CoverageCell> out;
  CellWindow w = window_for_bbox(r, bbox_of(poly));
  if (limit) w = w.intersected(*limit);
  if (w.empty()) return out;

  std::vector<const Ring*> rings{&poly.outer};
  for (const Ring& h : poly.holes) rings.push_back(&h);

  std::vector<std::vector<Point>> strips(rings.size());
  std::vector<Point> tmp;
  std::vector<Point> cell_pts;
  std::vector<Point> tmp2;
  std::vector<double> row_area(static_cast<std::size_t>(w.ncols));

  for (int row = w.row0; row < w.row_end(); ++row) {
    const double ytop = r.row_top(row);
    const double ybot = r.row_top(row + 1);
    std::fill(row_area.begin(), row_area.end(), 0.0);
    bool any = false;
    for (std::size_t k = 0; k < rings.size(); ++k) {
      detail::clip_axis(rings[k]->vertices, detail::Side::bottom, ybot, tmp);
      detail::clip_axis(tmp, detail::Side::top, ytop, strips[k]);
      const auto& strip = strips[k];
      if (strip.size() < 3) continue;
      const BBox sb = bbox_of(std::span<const Point>(strip));
      for (int col = w.col0; col < w.col_end(); ++col) {
        const double x0 = r.col_left(col);
        const double x1 = r.col_left(col + 1);
        if (x1 < sb.xmin || x0 > sb.xmax) continue;
        detail::clip_axis(strip, detail::Side::left, x0, tmp2);
        detail::clip_axis(tmp2, detail::Side::right, x1, cell_pts);
        if (cell_pts.size() < 3) continue;
        row_area[static_cast<std::size_t>(col - w.col0)] += signed_area(cell_pts);
        any = true;
      }
    }
    if (!any) continue;
    const double cell_area_row = ytop - ybot;
    for (int col = w.col0; col < w.col_end(); ++col) {
      const double cell_area = (r.col_left(col + 1) - r.col_left(col)) * cell_area_row;
      const double f = row_area[static_cast<std::size_t>(col - w.col0)] / cell_area;
      if (f > 0) out.push_back({row, col, std::min(f, 1.0)});
    }
  }
  return out;
}

enum class StatKind { mean, sum, count, min, max, stdev, frequency };

inline const char* stat_name(StatKind k) {
  switch (k) {
    case StatKind::mean: return "mean";
    case StatKind::sum: return "sum";
    case StatKind::count: return "count";
    case StatKind::min: return "min";
    case StatKind::max: return "max";
    case StatKind::stdev: return "stdev";
    default: return "frequency";
  }
}

inline StatKind parse_stat(const std::string& s) {
  for (StatKind k : {StatKind::mean, StatKind::sum, StatKind::count, StatKind::min, StatKind::max, StatKind::stdev,
                     StatKind::frequency}) {
    if (s == stat_name(k)) return k;
  }
  throw InvalidParameter("unknown statistic '" + s + "'");
}

struct StatResult {
  std::optional<double> value;          // null when no valid cell is covered
  double count = 0;                     // sum of coverage weights over valid cells
  std::map<double, double> frequency;   // category -> summed weight (frequency only)
};

// Weighted statistic over covered cells; nodata cells are skipped.
inline StatResult zonal_stat(const Raster& r, const std::vector<CoverageCell>& cells, StatKind kind) {
  if (kind == StatKind::frequency && r.kind != RasterKind::categorical)
    throw InvalidParameter("frequency requires a categorical raster");
  StatResult res;
  double wsum = 0;
  double wvsum = 0;
  double lo = 0;
  double hi = 0;
  bool seen = false;
  for (const CoverageCell& c : cells) {
    const double v = r.at(c.row, c.col);
    if (r.is_nodata(v)) continue;
    wsum += c.fraction;
    wvsum += c.fraction * v;
    if (!seen) {
      lo = hi = v;
      seen = true;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (kind == StatKind::frequency) res.frequency[v] += c.fraction;
  }
  res.count = wsum;
  if (!seen) return res;
  switch (kind) {
    case StatKind::mean: res.value = wvsum / wsum; break;
    case StatKind::sum: res.value = wvsum; break;
    case StatKind::count: res.value = wsum; break;
    case StatKind::min: res.value = lo; break;
    case StatKind::max: res.value = hi; break;
    case StatKind::stdev: {
      const double mu = wvsum / wsum;
      double acc = 0;
      for (const CoverageCell& c : cells) {
        const double v = r.at(c.row, c.col);
        if (r.is_nodata(v)) continue;
        acc += c.fraction * (v - mu) * (v - mu);
      }
      res.value = std::sqrt(acc / wsum);
      break;
    }
    case StatKind::frequency: break;
  }
  return res;
}

// Cell holding p under half-open intervals [x, x+cs) x (y-cs, y].
inline std::optional<CoverageCell> cell_at_point(const Raster& r, const Point& p) {
  const double fc = std::floor((p.x - r.xll) / r.cellsize);
  const double fr = std::floor((r.ytop() - p.y) / r.cellsize);
  if (!(fc >= 0 && fc < r.ncols && fr >= 0 && fr < r.nrows)) return std::nullopt;
  return CoverageCell{static_cast<int>(fr), static_cast<int>(fc), 1.0};
}

inline std::optional<double> value_at_point(const Raster& r, const Point& p) {
  auto c = cell_at_point(r, p);
  if (!c) return std::nullopt;
  const double v = r.at(c->row, c->col);
  if (r.is_nodata(v)) return std::nullopt;
  return v;
}

}  // namespace chop

#endif  // CHOP_RASTER_HPP
