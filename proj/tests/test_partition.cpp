#include <gtest/gtest.h>

#include <random>

#include "chop/partition.hpp"
#include "properties.hpp"
#include "support.hpp"

using namespace chop;
using testing_support::point_set;

namespace {

std::vector<Point> random_points(std::uint64_t seed, std::size_t n, double w = 1000, double h = 800) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0, w), uy(0, h);
  std::vector<Point> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back({ux(rng), uy(rng)});
  return pts;
}

std::size_t chunk_of(const PartitionSet& ps, const std::string& id) {
  for (std::size_t k = 0; k < ps.chunks.size(); ++k) {
    const auto& m = ps.chunks[k].member_ids;
    if (std::find(m.begin(), m.end(), id) != m.end()) return k;
  }
  return SIZE_MAX;
}

}  // namespace

TEST(RegularGrid, FourByTwo) {
  const PartitionSet ps = make_regular_grid({0, 0, 4, 2}, 4, 2, 0);
  ASSERT_EQ(ps.chunks.size(), 8u);
  for (std::size_t k = 0; k < 8; ++k) {
    const BBox expect{double(k % 4), double(k / 4), double(k % 4 + 1), double(k / 4 + 1)};
    EXPECT_EQ(ps.chunks[k].core, expect);
    EXPECT_EQ(ps.chunks[k].chunk_id, static_cast<std::int64_t>(k));
  }
  EXPECT_EQ(properties::exact_tiling(ps, {0, 0, 4, 2}), "");
}

TEST(RegularGrid, SingleChunkIsExtent) {
  const PartitionSet ps = make_regular_grid({1, 2, 3, 5}, 1, 1, 0);
  ASSERT_EQ(ps.chunks.size(), 1u);
  EXPECT_EQ(ps.chunks[0].core, (BBox{1, 2, 3, 5}));
}

TEST(RegularGrid, Padding) {
  const PartitionSet ps = make_regular_grid({0, 0, 100, 50}, 3, 2, 10);
  for (const auto& c : ps.chunks) EXPECT_EQ(c.padded, c.core.expanded(10));
  EXPECT_EQ(properties::padded_boxes(ps), "");
}

TEST(RegularGrid, InvalidParameters) {
  EXPECT_THROW(make_regular_grid({0, 0, 1, 1}, 0, 2, 0), InvalidParameter);
  EXPECT_THROW(make_regular_grid({0, 0, 1, 1}, 2, 0, 0), InvalidParameter);
  EXPECT_THROW(make_regular_grid({0, 0, 1, 1}, 1, 1, -1), InvalidParameter);
}

TEST(RegularGrid, TilingOnAwkwardExtents) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1e5, 1e5);
  for (int t = 0; t < 50; ++t) {
    const double x0 = u(rng), y0 = u(rng);
    const BBox e{x0, y0, x0 + std::abs(u(rng)) + 0.1, y0 + std::abs(u(rng)) + 0.1};
    const PartitionSet ps = make_regular_grid(e, 1 + t % 7, 1 + t % 5, 3);
    EXPECT_EQ(properties::exact_tiling(ps, e), "");
    for (std::size_t k = 0; k + 1 < ps.chunks.size(); ++k) {
      const auto& a = ps.chunks[k].core;
      const auto& b = ps.chunks[k + 1].core;
      if (a.ymin == b.ymin) {
        EXPECT_EQ(a.xmax, b.xmin);
      }
    }
  }
}

TEST(Assign, InteriorPoint) {
  const PartitionSet grid = make_regular_grid({0, 0, 4, 2}, 4, 2, 0);
  const PartitionSet ps = assign_to_partition(point_set({{3.5, 0.5}}), grid);
  EXPECT_EQ(chunk_of(ps, "p0"), 3u);
}

TEST(Assign, SharedEdgeGoesToUpperInterval) {
  const PartitionSet grid = make_regular_grid({0, 0, 4, 2}, 4, 2, 0);
  const PartitionSet ps = assign_to_partition(point_set({{1, 0.5}, {1, 1}, {4, 2}, {0, 0}}), grid);
  EXPECT_EQ(chunk_of(ps, "p0"), 1u);
  EXPECT_EQ(chunk_of(ps, "p1"), 5u);
  EXPECT_EQ(chunk_of(ps, "p2"), 7u);
  EXPECT_EQ(chunk_of(ps, "p3"), 0u);
}

TEST(Assign, OutsideGoesToNearestCenter) {
  const PartitionSet grid = make_regular_grid({0, 0, 4, 2}, 4, 2, 0);
  const PartitionSet ps = assign_to_partition(point_set({{-5, 1.6}, {2, -3}}), grid);
  EXPECT_EQ(chunk_of(ps, "p0"), 4u);
  // (2,-3) is equidistant from the centers of chunks 1 and 2.
  EXPECT_EQ(chunk_of(ps, "p1"), 1u);
}

TEST(Assign, NonPointAnchorsUseFirstVertex) {
  FeatureSet fs;
  fs.features.push_back({"poly", rect_polygon({2.5, 1.5, 10, 10}), {}});
  fs.features.push_back({"line", Polyline{{{0.5, 0.5}, {3.9, 1.9}}}, {}});
  const PartitionSet ps = assign_to_partition(fs, make_regular_grid({0, 0, 4, 2}, 4, 2, 0));
  EXPECT_EQ(chunk_of(ps, "poly"), 6u);
  EXPECT_EQ(chunk_of(ps, "line"), 0u);
}

TEST(Quantile, MedianBreak) {
  const FeatureSet fs = point_set({{0, 0}, {1, 0}, {2, 0}, {3, 0}});
  const PartitionSet ps = make_quantile_grid(fs, 2, 0);
  // y is degenerate, so only the x stripes remain.
  ASSERT_EQ(ps.chunks.size(), 2u);
  EXPECT_EQ(ps.chunks[0].core.xmax, 1.5);
  EXPECT_EQ(ps.chunks[1].core.xmin, 1.5);
  EXPECT_EQ(ps.chunks[0].member_ids, (std::vector<std::string>{"p0", "p1"}));
  EXPECT_EQ(ps.chunks[1].member_ids, (std::vector<std::string>{"p2", "p3"}));
}

TEST(Quantile, QuantileMatchesDirectComputation) {
  const std::vector<double> v{1, 2, 4, 8, 16};
  EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.5), 4);
  EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.25), 2);
  EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.3), 2 + 0.2 * 2);
  EXPECT_DOUBLE_EQ(quantile_sorted(v, 1.0), 16);
}

TEST(Quantile, SingleChunkIsDataBox) {
  const FeatureSet fs = point_set(random_points(1, 50));
  const PartitionSet ps = make_quantile_grid(fs, 1, 0);
  ASSERT_EQ(ps.chunks.size(), 1u);
  EXPECT_EQ(ps.chunks[0].core, extent_of(fs));
  EXPECT_EQ(ps.chunks[0].member_ids.size(), 50u);
}

TEST(Quantile, IdenticalPointsCollapse) {
  const FeatureSet fs = point_set({{3, 3}, {3, 3}, {3, 3}});
  const PartitionSet ps = make_quantile_grid(fs, 4, 1);
  ASSERT_EQ(ps.chunks.size(), 1u);
  EXPECT_EQ(ps.chunks[0].member_ids.size(), 3u);
}

TEST(Quantile, StripesAreBalanced) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t n = 200 + seed * 37;
    const FeatureSet fs = point_set(random_points(seed, n));
    for (int nq : {2, 3, 4, 7}) {
      const PartitionSet ps = make_quantile_grid(fs, nq, 0);
      EXPECT_EQ(properties::quantile_stripes(fs, ps, nq), "") << "seed " << seed << " nq " << nq;
      EXPECT_EQ(properties::unique_assignment(fs, ps), "");
    }
  }
}

TEST(Quantile, RejectsNonPoints) {
  FeatureSet fs;
  fs.features.push_back({"a", rect_polygon({0, 0, 1, 1}), {}});
  EXPECT_THROW(make_quantile_grid(fs, 2, 0), InvalidInput);
}

TEST(Merged, HandExample) {
  // 2x2 cells over [0,2]^2 with counts [1, 1, 100, 100].
  std::vector<Point> pts{{0, 0}, {2, 0}};
  for (int i = 0; i < 100; ++i) pts.push_back({0.5 * i / 100.0, 2 - 0.5 * i / 100.0});
  for (int i = 0; i < 100; ++i) pts.push_back({2 - 0.5 * i / 100.0, 2 - 0.5 * i / 100.0});
  const FeatureSet fs = point_set(pts);
  const MergedGrid m = merge_grid_cells(fs, 2, 2, 5, 0);
  EXPECT_EQ(m.cell_counts, (std::vector<std::size_t>{1, 1, 100, 100}));
  ASSERT_EQ(m.partition.chunks.size(), 3u);
  EXPECT_EQ(m.partition.chunks[0].core, (BBox{0, 0, 2, 1}));
  EXPECT_EQ(m.partition.chunks[0].member_ids, (std::vector<std::string>{"p0", "p1"}));
  EXPECT_EQ(m.partition.chunks[1].member_ids.size(), 100u);
  EXPECT_EQ(properties::merged_fixpoint(m, 5, pts.size()), "");
}

TEST(Merged, NoMergeWhenDense) {
  const FeatureSet fs = point_set(random_points(4, 400));
  const MergedGrid m = merge_grid_cells(fs, 3, 3, 5, 2);
  const PartitionSet grid = assign_to_partition(fs, make_regular_grid(data_extent(fs), 3, 3, 2));
  ASSERT_EQ(m.partition.chunks.size(), 9u);
  for (std::size_t k = 0; k < 9; ++k) {
    EXPECT_EQ(m.partition.chunks[k].core, grid.chunks[k].core);
    EXPECT_EQ(m.partition.chunks[k].member_ids, grid.chunks[k].member_ids);
  }
}

TEST(Merged, EmptyCellsCollapse) {
  // All points in the bottom-left cell of a 4x3 grid, plus one point pinning the
  // far corner; with min_features 2 that lone point counts as empty.
  std::vector<Point> pts;
  for (int i = 0; i < 30; ++i) pts.push_back({0.1 * i / 30, 0.1 * i / 30});
  const FeatureSet core = point_set(pts);
  FeatureSet fs = core;
  fs.features.push_back({"corner", Point{4, 3}, {}});
  const MergedGrid m = merge_grid_cells(fs, 4, 3, 2, 0);
  EXPECT_EQ(m.partition.chunks.size(), 2u);
  EXPECT_EQ(properties::merged_fixpoint(m, 2, fs.size()), "");
  EXPECT_EQ(properties::unique_assignment(fs, m.partition), "");
}

TEST(Merged, FixpointOnRandomInputs) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<Point> pts = random_points(seed, 300);
    // Cluster half the points to make sparse areas.
    for (std::size_t i = 0; i < 150; ++i) pts[i] = {pts[i].x * 0.1, pts[i].y * 0.1};
    const FeatureSet fs = point_set(pts);
    for (int minf : {1, 5, 20, 60}) {
      const MergedGrid m = merge_grid_cells(fs, 6, 5, minf, 1);
      EXPECT_EQ(properties::merged_fixpoint(m, static_cast<std::size_t>(minf), pts.size()), "");
      EXPECT_EQ(properties::unique_assignment(fs, m.partition), "");
    }
  }
}

TEST(Merged, InvalidParameters) {
  const FeatureSet fs = point_set(random_points(1, 10));
  EXPECT_THROW(merge_grid_cells(fs, 2, 2, 0, 0), InvalidParameter);
}

TEST(Mst, KruskalOrder) {
  const auto g = rook_adjacency(2, 2, {1, 1, 100, 100});
  const auto mst = minimum_spanning_tree(g);
  ASSERT_EQ(mst.size(), 3u);
  EXPECT_EQ(mst[0], (GridEdge{0, 1, 2}));
  EXPECT_EQ(mst[1], (GridEdge{0, 2, 101}));
  EXPECT_EQ(mst[2], (GridEdge{1, 3, 101}));
}

TEST(Balanced, CollinearExample) {
  const auto g = balanced_clusters({{0, 0}, {1, 0}, {10, 0}, {11, 0}}, 2);
  EXPECT_EQ(g.group[0], g.group[1]);
  EXPECT_EQ(g.group[2], g.group[3]);
  EXPECT_NE(g.group[0], g.group[2]);
}

TEST(Balanced, CollinearExampleIsOptimal) {
  // Exhaustive search over balanced 2-partitions of {0,1,10,11}.
  const std::vector<Point> pts{{0, 0}, {1, 0}, {10, 0}, {11, 0}};
  double best = INFINITY;
  std::vector<std::size_t> best_g;
  for (int mask = 0; mask < 16; ++mask) {
    if (__builtin_popcount(mask) != 2) continue;
    std::vector<std::size_t> g(4);
    for (int i = 0; i < 4; ++i) g[i] = (mask >> i) & 1;
    const double s = within_group_ssq(pts, g, 2);
    if (s < best) {
      best = s;
      best_g = g;
    }
  }
  const auto got = balanced_clusters(pts, 2);
  EXPECT_DOUBLE_EQ(within_group_ssq(pts, got.group, 2), best);
}

TEST(Balanced, Extremes) {
  const auto pts = random_points(3, 9);
  const auto one = balanced_clusters(pts, 1);
  for (auto g : one.group) EXPECT_EQ(g, 0u);
  const auto all = balanced_clusters(pts, 9);
  std::set<std::size_t> distinct(all.group.begin(), all.group.end());
  EXPECT_EQ(distinct.size(), 9u);
  EXPECT_THROW(balanced_clusters(pts, 10), InvalidParameter);
  EXPECT_THROW(balanced_clusters(pts, 0), InvalidParameter);
}

TEST(Balanced, SizesAndSsqTrace) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto pts = random_points(seed, 97 + seed * 11);
    for (std::size_t k : {2u, 3u, 5u, 8u}) {
      const auto g = balanced_clusters(pts, k);
      EXPECT_EQ(properties::balanced(g, k), "");
      EXPECT_GE(g.ssq_trace.size(), 2u);
    }
  }
}

TEST(Balanced, TwentyThreePointsFiveGroups) {
  const FeatureSet fs = point_set(random_points(8, 23));
  const PartitionSet ps = make_balanced_groups(fs, 5, 0);
  std::vector<std::size_t> sizes;
  for (const auto& c : ps.chunks) sizes.push_back(c.member_ids.size());
  std::sort(sizes.rbegin(), sizes.rend());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{5, 5, 5, 4, 4}));
  EXPECT_EQ(properties::unique_assignment(fs, ps), "");
  for (const auto& c : ps.chunks) {
    for (const auto& id : c.member_ids) {
      const auto it = std::find_if(fs.features.begin(), fs.features.end(), [&](const Feature& f) { return f.id == id; });
      EXPECT_TRUE(c.core.contains(std::get<Point>(it->geometry)));
    }
  }
}

TEST(MakePartition, UniqueAssignmentAllModes) {
  const FeatureSet fs = point_set(random_points(12, 1000));
  for (PartitionMode mode :
       {PartitionMode::grid, PartitionMode::grid_quantile, PartitionMode::grid_advanced, PartitionMode::balanced}) {
    const GridSpec spec{mode, 5, 4, 3, 7, 30, 25};
    const PartitionSet ps = make_partition(fs, spec);
    EXPECT_EQ(ps.mode, mode);
    EXPECT_EQ(properties::unique_assignment(fs, ps), "") << mode_name(mode);
    EXPECT_EQ(properties::padded_boxes(ps), "") << mode_name(mode);
  }
}

TEST(Hierarchy, GroupsByValue) {
  FeatureSet fs = point_set({{0, 0}, {1, 1}, {2, 2}});
  fs.columns = {"county"};
  fs.features[0].attributes["county"] = std::string("37001");
  fs.features[1].attributes["county"] = std::string("37001");
  fs.features[2].attributes["county"] = std::string("37003");
  const auto groups = group_by_hierarchy(fs, "county");
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].key, "37001");
  EXPECT_EQ(groups[0].member_ids.size(), 2u);
  EXPECT_EQ(groups[1].member_ids.size(), 1u);
  EXPECT_THROW(group_by_hierarchy(fs, "state"), InvalidInput);
}

TEST(Regions, ContainmentAndFallback) {
  const FeatureSet pts = point_set({{1, 1}, {5, 5}, {50, 50}});
  FeatureSet regions;
  regions.features.push_back({"B", rect_polygon({4, 4, 10, 10}), {}});
  regions.features.push_back({"A", rect_polygon({0, 0, 10, 10}), {}});
  const auto groups = group_by_regions(pts, regions, "id");
  ASSERT_EQ(groups.size(), 3u);
  EXPECT_EQ(groups[0].key, "A");
  EXPECT_EQ(groups[0].member_ids, std::vector<std::string>{"p0"});
  EXPECT_EQ(groups[1].key, "B");
  EXPECT_EQ(groups[1].member_ids, std::vector<std::string>{"p1"});
  EXPECT_EQ(groups[2].key, kUnassigned);
  EXPECT_EQ(groups[2].member_ids, std::vector<std::string>{"p2"});
}

TEST(Regions, SingleRegionHoldsAll) {
  const FeatureSet pts = point_set(random_points(5, 40, 10, 10));
  FeatureSet regions;
  regions.features.push_back({"all", rect_polygon({0, 0, 10, 10}), {}});
  const auto groups = group_by_regions(pts, regions, "id");
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(groups[0].member_ids.size(), 40u);
}
