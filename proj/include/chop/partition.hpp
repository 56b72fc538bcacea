#pragma once
#ifndef CHOP_PARTITION_HPP
#define CHOP_PARTITION_HPP

// Spatial partitioning of an anchor dataset into chunks of parallel work.
//
// Every generator returns a PartitionSet whose chunks carry a core box (used
// for unique ownership of anchor features) and a padded box (core grown by
// `padding`, used to select context data). Chunk ids are dense from 0.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "chop/error.hpp"
#include "chop/features.hpp"
#include "chop/geom.hpp"

namespace chop {

enum class PartitionMode { grid, grid_quantile, grid_advanced, balanced };

inline const char* mode_name(PartitionMode m) {
  switch (m) {
    case PartitionMode::grid: return "grid";
    case PartitionMode::grid_quantile: return "grid_quantile";
    case PartitionMode::grid_advanced: return "grid_advanced";
    default: return "balanced";
  }
}

inline PartitionMode parse_mode(const std::string& s) {
  if (s == "grid") return PartitionMode::grid;
  if (s == "grid_quantile" || s == "quantile") return PartitionMode::grid_quantile;
  if (s == "grid_advanced" || s == "advanced") return PartitionMode::grid_advanced;
  if (s == "balanced") return PartitionMode::balanced;
  throw InvalidParameter("unknown partition mode '" + s + "'");
}

struct Chunk {
  std::int64_t chunk_id = 0;
  BBox core;
  BBox padded;
  std::vector<std::string> member_ids;

  friend bool operator==(const Chunk&, const Chunk&) = default;
};

struct PartitionSet {
  PartitionMode mode = PartitionMode::grid;
  double padding = 0;
  std::vector<Chunk> chunks;

  friend bool operator==(const PartitionSet&, const PartitionSet&) = default;

  std::size_t member_count() const {
    std::size_t n = 0;
    for (const auto& c : chunks) n += c.member_ids.size();
    return n;
  }
};

struct GridSpec {
  PartitionMode mode = PartitionMode::grid;
  int nx = 1;
  int ny = 1;
  int nq = 1;
  int n_groups = 1;
  int min_features = 1;
  double padding = 0;
};

namespace detail {

inline void check_padding(double padding) {
  if (!(padding >= 0) || !std::isfinite(padding)) throw InvalidParameter("padding must be finite and >= 0");
}

inline Chunk make_chunk(std::int64_t id, const BBox& core, double padding) {
  return Chunk{id, core, core.expanded(padding), {}};
}

// Regular breakpoints; the last one is pinned to `hi` so neighbouring cells share exact edges.
inline std::vector<double> even_breaks(double lo, double hi, int n) {
  std::vector<double> b(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) b[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / n;
  b.back() = hi;
  return b;
}

inline std::vector<Point> require_points(const FeatureSet& fs, const char* what) {
  if (!fs.all_of_type<Point>()) throw InvalidInput(std::string(what) + " requires point features");
  return representative_points(fs);
}

// Index of the interval [b[i], b[i+1]) holding v; the last interval is closed.
inline int interval_of(const std::vector<double>& b, double v) {
  const int n = static_cast<int>(b.size()) - 1;
  if (v >= b.back()) return n - 1;
  auto it = std::upper_bound(b.begin(), b.end(), v);
  return std::clamp(static_cast<int>(it - b.begin()) - 1, 0, n - 1);
}

}  // namespace detail

// Extent of the features, widened by 0.5 per side along any zero-width axis.
inline BBox data_extent(const FeatureSet& fs) {
  BBox b = extent_of(fs);
  if (b.width() == 0) b = {b.xmin - 0.5, b.ymin, b.xmax + 0.5, b.ymax};
  if (b.height() == 0) b = {b.xmin, b.ymin - 0.5, b.xmax, b.ymax + 0.5};
  return b;
}

// nx*ny equal cells, row-major from the minimum corner. Members are left empty.
inline PartitionSet make_regular_grid(const BBox& extent, int nx, int ny, double padding) {
  if (nx < 1 || ny < 1) throw InvalidParameter("nx and ny must be >= 1");
  if (!extent.valid() || !(extent.width() > 0 && extent.height() > 0))
    throw InvalidParameter("grid extent must be non-degenerate");
  detail::check_padding(padding);
  const auto xb = detail::even_breaks(extent.xmin, extent.xmax, nx);
  const auto yb = detail::even_breaks(extent.ymin, extent.ymax, ny);
  PartitionSet ps{PartitionMode::grid, padding, {}};
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const BBox core{xb[static_cast<std::size_t>(i)], yb[static_cast<std::size_t>(j)],
                      xb[static_cast<std::size_t>(i) + 1], yb[static_cast<std::size_t>(j) + 1]};
      ps.chunks.push_back(detail::make_chunk(static_cast<std::int64_t>(ps.chunks.size()), core, padding));
    }
  }
  return ps;
}

// Owner chunk of p: the lowest-id core containing it under [xmin,xmax) x [ymin,ymax),
// with edges on the outer boundary of all cores closed. Points outside every core
// go to the core with the nearest center (ties to the lowest id).
inline std::size_t owner_chunk(const PartitionSet& ps, const BBox& outer, const Point& p) {
  for (std::size_t k = 0; k < ps.chunks.size(); ++k) {
    const BBox& c = ps.chunks[k].core;
    const bool in_x = c.xmin <= p.x && (p.x < c.xmax || (p.x == c.xmax && c.xmax == outer.xmax));
    const bool in_y = c.ymin <= p.y && (p.y < c.ymax || (p.y == c.ymax && c.ymax == outer.ymax));
    if (in_x && in_y) return k;
  }
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < ps.chunks.size(); ++k) {
    const double d = point_distance(p, ps.chunks[k].core.center());
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

// Fills member_ids (replacing any existing assignment) by each anchor's representative point.
inline PartitionSet assign_to_partition(const FeatureSet& anchors, PartitionSet ps) {
  if (ps.chunks.empty()) throw InvalidInput("partition set has no chunks");
  BBox outer = ps.chunks.front().core;
  for (auto& c : ps.chunks) {
    outer = outer.united(c.core);
    c.member_ids.clear();
  }
  for (const auto& f : anchors.features) {
    ps.chunks[owner_chunk(ps, outer, representative_point(f.geometry))].member_ids.push_back(f.id);
  }
  return ps;
}

// Linear-interpolation quantile of sorted data at probability p.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

// Interior breaks at i/nq quantiles of each axis, outer edges at the data bbox.
// Repeated breaks collapse, so zero-width stripes never become chunks.
inline PartitionSet make_quantile_grid(const FeatureSet& points, int nq, double padding) {
  if (points.empty()) throw InvalidInput("quantile grid needs at least one point");
  if (nq < 1) throw InvalidParameter("nq must be >= 1");
  detail::check_padding(padding);
  const auto pts = detail::require_points(points, "quantile grid");
  std::vector<double> xs;
  std::vector<double> ys;
  for (const Point& p : pts) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  auto breaks = [nq](const std::vector<double>& v) {
    std::vector<double> b{v.front()};
    for (int i = 1; i < nq; ++i) b.push_back(quantile_sorted(v, static_cast<double>(i) / nq));
    b.push_back(v.back());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    if (b.size() == 1) b.push_back(b.front());  // one degenerate interval
    return b;
  };
  const auto xb = breaks(xs);
  const auto yb = breaks(ys);
  PartitionSet ps{PartitionMode::grid_quantile, padding, {}};
  for (std::size_t j = 0; j + 1 < yb.size(); ++j) {
    for (std::size_t i = 0; i + 1 < xb.size(); ++i) {
      ps.chunks.push_back(detail::make_chunk(static_cast<std::int64_t>(ps.chunks.size()),
                                             {xb[i], yb[j], xb[i + 1], yb[j + 1]}, padding));
    }
  }
  return assign_to_partition(points, std::move(ps));
}

// Rook adjacency of grid cells; edge weight is the combined count of both cells.
struct GridEdge {
  std::size_t u = 0;
  std::size_t v = 0;
  std::size_t weight = 0;

  friend bool operator==(const GridEdge&, const GridEdge&) = default;
  friend bool operator<(const GridEdge& a, const GridEdge& b) {
    return std::tie(a.weight, a.u, a.v) < std::tie(b.weight, b.u, b.v);
  }
};

struct GridAdjacency {
  std::size_t nodes = 0;
  std::vector<GridEdge> edges;
};

inline GridAdjacency rook_adjacency(int nx, int ny, const std::vector<std::size_t>& counts) {
  GridAdjacency g{static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), {}};
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const auto u = static_cast<std::size_t>(j * nx + i);
      if (i + 1 < nx) g.edges.push_back({u, u + 1, counts[u] + counts[u + 1]});
      if (j + 1 < ny) {
        const auto v = u + static_cast<std::size_t>(nx);
        g.edges.push_back({u, v, counts[u] + counts[v]});
      }
    }
  }
  return g;
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // Keeps the smaller root so group representatives are the lowest member index.
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

// Kruskal; edges considered in (weight, u, v) order. Result is in that order too.
inline std::vector<GridEdge> minimum_spanning_tree(const GridAdjacency& g) {
  std::vector<GridEdge> sorted = g.edges;
  std::sort(sorted.begin(), sorted.end());
  DisjointSets ds(g.nodes);
  std::vector<GridEdge> mst;
  for (const auto& e : sorted) {
    if (ds.unite(e.u, e.v)) mst.push_back(e);
  }
  return mst;
}

struct MergedGrid {
  PartitionSet partition;
  std::vector<std::size_t> cell_counts;  // per original cell
  std::vector<std::size_t> cell_group;   // original cell -> chunk index
  std::vector<GridEdge> mst;
};

// Regular grid over the points, then sparse neighbours merged along MST edges:
// an edge merges its two current groups when both hold fewer than min_features
// points. Passes repeat until one makes no merge.
inline MergedGrid merge_grid_cells(const FeatureSet& points, int nx, int ny, int min_features, double padding) {
  if (points.empty()) throw InvalidInput("merged grid needs at least one point");
  if (min_features < 1) throw InvalidParameter("min_features must be >= 1");
  if (nx < 1 || ny < 1 || nx * ny < 2) throw InvalidParameter("merged grid needs nx*ny >= 2");
  const auto pts = detail::require_points(points, "merged grid");

  PartitionSet cells = make_regular_grid(data_extent(points), nx, ny, padding);
  cells = assign_to_partition(points, std::move(cells));
  const std::size_t n = cells.chunks.size();
  std::vector<std::size_t> counts(n);
  for (std::size_t k = 0; k < n; ++k) counts[k] = cells.chunks[k].member_ids.size();

  const auto mst = minimum_spanning_tree(rook_adjacency(nx, ny, counts));
  DisjointSets ds(n);
  std::vector<std::size_t> group_count = counts;  // valid at roots
  const auto threshold = static_cast<std::size_t>(min_features);
  for (bool merged = true; merged;) {
    merged = false;
    for (const auto& e : mst) {
      const std::size_t a = ds.find(e.u);
      const std::size_t b = ds.find(e.v);
      if (a == b || group_count[a] >= threshold || group_count[b] >= threshold) continue;
      const std::size_t total = group_count[a] + group_count[b];
      ds.unite(a, b);
      group_count[ds.find(a)] = total;
      merged = true;
    }
  }

  MergedGrid out;
  out.partition = PartitionSet{PartitionMode::grid_advanced, padding, {}};
  out.cell_counts = counts;
  out.mst = mst;
  out.cell_group.assign(n, 0);
  std::map<std::size_t, std::size_t> root_to_chunk;  // roots are the lowest cell index of each group
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t root = ds.find(k);
    auto [it, fresh] = root_to_chunk.try_emplace(root, out.partition.chunks.size());
    if (fresh) {
      out.partition.chunks.push_back(
          detail::make_chunk(static_cast<std::int64_t>(it->second), cells.chunks[k].core, padding));
    }
    Chunk& ch = out.partition.chunks[it->second];
    ch.core = ch.core.united(cells.chunks[k].core);
    ch.padded = ch.core.expanded(padding);
    out.cell_group[k] = it->second;
  }
  // Members follow input order within each chunk.
  std::map<std::string, std::size_t> owner;
  for (std::size_t k = 0; k < n; ++k) {
    for (const auto& id : cells.chunks[k].member_ids) owner.emplace(id, out.cell_group[k]);
  }
  for (const auto& f : points.features) out.partition.chunks[owner.at(f.id)].member_ids.push_back(f.id);
  return out;
}

inline PartitionSet make_merged_grid(const FeatureSet& points, int nx, int ny, int min_features, double padding) {
  return merge_grid_cells(points, nx, ny, min_features, padding).partition;
}

// Total within-group sum of squared distances to the group means.
inline double within_group_ssq(const std::vector<Point>& pts, const std::vector<std::size_t>& group, std::size_t k) {
  std::vector<double> sx(k), sy(k), cnt(k);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    sx[group[i]] += pts[i].x;
    sy[group[i]] += pts[i].y;
    cnt[group[i]] += 1;
  }
  double ssq = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::size_t g = group[i];
    const double dx = pts[i].x - sx[g] / cnt[g];
    const double dy = pts[i].y - sy[g] / cnt[g];
    ssq += dx * dx + dy * dy;
  }
  return ssq;
}

struct BalancedGroups {
  std::vector<std::size_t> group;  // per input point
  std::vector<double> ssq_trace;   // total within-group SSQ after seeding, then after each sweep
};

// Equal-size spatial clusters: farthest-point seeding from the point nearest the
// centroid, capacity-limited greedy assignment, then pairwise swaps that lower
// the within-group SSQ (at most 50 sweeps, fixed scan order).
inline BalancedGroups balanced_clusters(const std::vector<Point>& pts, std::size_t k) {
  const std::size_t n = pts.size();
  if (k < 1 || k > n) throw InvalidParameter("n_groups must be between 1 and the number of points");

  // Centered copy keeps the swap arithmetic well conditioned.
  double cx = 0;
  double cy = 0;
  for (const Point& p : pts) {
    cx += p.x;
    cy += p.y;
  }
  cx /= static_cast<double>(n);
  cy /= static_cast<double>(n);
  std::vector<Point> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = {pts[i].x - cx, pts[i].y - cy};

  auto d2 = [](const Point& a, const Point& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
  };

  std::size_t first = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (d2(q[i], {0, 0}) < d2(q[first], {0, 0})) first = i;
  }
  std::vector<std::size_t> centers{first};
  std::vector<double> mind(n);
  for (std::size_t i = 0; i < n; ++i) mind[i] = d2(q[i], q[first]);
  while (centers.size() < k) {
    std::size_t far = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (mind[i] > mind[far]) far = i;
    }
    centers.push_back(far);
    for (std::size_t i = 0; i < n; ++i) mind[i] = std::min(mind[i], d2(q[i], q[far]));
  }

  // Greedy: closest points first, each to its nearest center that still has room.
  const std::size_t base = n / k;
  std::size_t extra = n % k;  // groups allowed to reach base + 1
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c : centers) best = std::min(best, d2(q[i], q[c]));
    nearest[i] = best;
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return nearest[a] < nearest[b]; });
  std::vector<std::size_t> size(k, 0);
  BalancedGroups out;
  out.group.assign(n, 0);
  std::vector<std::size_t> by_distance(k);
  for (std::size_t i : order) {
    std::iota(by_distance.begin(), by_distance.end(), 0);
    std::stable_sort(by_distance.begin(), by_distance.end(), [&](std::size_t a, std::size_t b) {
      return d2(q[i], q[centers[a]]) < d2(q[i], q[centers[b]]);
    });
    for (std::size_t g : by_distance) {
      const bool room = size[g] < base || (size[g] == base && extra > 0);
      if (!room) continue;
      if (size[g] == base) --extra;
      ++size[g];
      out.group[i] = g;
      break;
    }
  }

  std::vector<double> sx(k), sy(k);
  for (std::size_t i = 0; i < n; ++i) {
    sx[out.group[i]] += q[i].x;
    sy[out.group[i]] += q[i].y;
  }
  double ssq = within_group_ssq(q, out.group, k);
  out.ssq_trace.push_back(ssq);
  const double tol = 1e-12 * std::max(ssq, 1e-300);
  for (int sweep = 0; sweep < 50; ++sweep) {
    bool swapped = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const std::size_t a = out.group[i];
        const std::size_t b = out.group[j];
        if (a == b) continue;
        const double dx = q[j].x - q[i].x;
        const double dy = q[j].y - q[i].y;
        const double dd = dx * dx + dy * dy;
        const double na = static_cast<double>(size[a]);
        const double nb = static_cast<double>(size[b]);
        const double delta = -(2 * (sx[a] * dx + sy[a] * dy) + dd) / na - (-2 * (sx[b] * dx + sy[b] * dy) + dd) / nb;
        if (delta < -tol) {
          sx[a] += dx;
          sy[a] += dy;
          sx[b] -= dx;
          sy[b] -= dy;
          std::swap(out.group[i], out.group[j]);
          swapped = true;
        }
      }
    }
    const double now = within_group_ssq(q, out.group, k);
    out.ssq_trace.push_back(now);
    if (!swapped) break;
  }
  return out;
}

// One chunk per balanced group, in seed order; members in input order.
inline PartitionSet make_balanced_groups(const FeatureSet& points, int n_groups, double padding) {
  detail::check_padding(padding);
  const auto pts = detail::require_points(points, "balanced groups");
  if (n_groups < 1 || static_cast<std::size_t>(n_groups) > pts.size())
    throw InvalidParameter("n_groups must be between 1 and the number of points");
  const auto k = static_cast<std::size_t>(n_groups);
  const auto groups = balanced_clusters(pts, k);
  PartitionSet ps{PartitionMode::balanced, padding, {}};
  std::vector<bool> started(k, false);
  std::vector<BBox> box(k);
  std::vector<std::vector<std::string>> members(k);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::size_t g = groups.group[i];
    box[g] = started[g] ? box[g].united(bbox_of(pts[i])) : bbox_of(pts[i]);
    started[g] = true;
    members[g].push_back(points[i].id);
  }
  for (std::size_t g = 0; g < k; ++g) {
    ps.chunks.push_back(detail::make_chunk(static_cast<std::int64_t>(g), box[g], padding));
    ps.chunks.back().member_ids = std::move(members[g]);
  }
  return ps;
}

// Dispatch on GridSpec.mode; the regular grid spans the anchors' extent.
inline PartitionSet make_partition(const FeatureSet& anchors, const GridSpec& spec) {
  switch (spec.mode) {
    case PartitionMode::grid:
      return assign_to_partition(anchors, make_regular_grid(data_extent(anchors), spec.nx, spec.ny, spec.padding));
    case PartitionMode::grid_quantile: return make_quantile_grid(anchors, spec.nq, spec.padding);
    case PartitionMode::grid_advanced:
      return make_merged_grid(anchors, spec.nx, spec.ny, spec.min_features, spec.padding);
    default: return make_balanced_groups(anchors, spec.n_groups, spec.padding);
  }
}

// ---------------------------------------------------------------------------
// Hierarchical grouping

struct FeatureGroup {
  std::string key;
  std::vector<std::string> member_ids;

  friend bool operator==(const FeatureGroup&, const FeatureGroup&) = default;
};

inline constexpr const char* kUnassigned = "UNASSIGNED";

// One group per distinct attribute value, ordered by key.
inline std::vector<FeatureGroup> group_by_hierarchy(const FeatureSet& anchors, const std::string& column) {
  if (!anchors.has_column(column)) throw InvalidInput("hierarchy column '" + column + "' not found");
  std::map<std::string, std::vector<std::string>> groups;
  for (const auto& f : anchors.features) {
    auto it = f.attributes.find(column);
    if (it == f.attributes.end()) throw InvalidInput("feature '" + f.id + "' has no hierarchy value");
    groups[attr_to_string(it->second)].push_back(f.id);
  }
  std::vector<FeatureGroup> out;
  for (auto& [k, ids] : groups) out.push_back({k, std::move(ids)});
  return out;
}

// Each anchor goes to the first region (in region order) containing its
// representative point; uncontained anchors form a trailing "UNASSIGNED" group.
// Groups are ordered by key with UNASSIGNED last; empty regions are dropped.
inline std::vector<FeatureGroup> group_by_regions(const FeatureSet& anchors, const FeatureSet& regions,
                                                  const std::string& region_id_column) {
  if (!regions.all_of_type<Polygon>()) throw InvalidInput("regions must be polygons");
  std::vector<std::string> keys;
  std::vector<BBox> boxes;
  for (const auto& r : regions.features) {
    if (region_id_column.empty() || region_id_column == "id") {
      keys.push_back(r.id);
    } else {
      auto it = r.attributes.find(region_id_column);
      if (it == r.attributes.end()) throw InvalidInput("region '" + r.id + "' has no '" + region_id_column + "'");
      keys.push_back(attr_to_string(it->second));
    }
    boxes.push_back(bbox_of(r.geometry));
  }
  std::map<std::string, std::vector<std::string>> groups;
  std::vector<std::string> unassigned;
  for (const auto& f : anchors.features) {
    const Point p = representative_point(f.geometry);
    bool placed = false;
    for (std::size_t k = 0; k < regions.size() && !placed; ++k) {
      if (boxes[k].contains(p) && point_in_polygon(p, std::get<Polygon>(regions[k].geometry))) {
        groups[keys[k]].push_back(f.id);
        placed = true;
      }
    }
    if (!placed) unassigned.push_back(f.id);
  }
  std::vector<FeatureGroup> out;
  for (auto& [k, ids] : groups) out.push_back({k, std::move(ids)});
  if (!unassigned.empty()) out.push_back({kUnassigned, std::move(unassigned)});
  return out;
}

}  // namespace chop

#endif  // CHOP_PARTITION_HPP
