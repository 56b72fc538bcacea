#pragma once
#ifndef CHOP_BENCH_HPP
#define CHOP_BENCH_HPP

// Synthetic inputs, timed sweeps over worker counts, and the scaling metrics
// speedup = t1 / tn and efficiency per thread = t1 / (n * tn).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "chop/error.hpp"
#include "chop/executor.hpp"
#include "chop/features.hpp"
#include "chop/partition.hpp"
#include "chop/raster.hpp"

namespace chop {

// SplitMix64 (Steele, Lea, Flood 2014). Version 1 of the synthetic-data stream:
//   state += 0x9E3779B97F4A7C15
//   z = state; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9; z = (z ^ z>>27) * 0x94D049BB133111EB; z ^= z>>31
// uniform() maps the top 53 bits to [0, 1).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

inline constexpr int kSynthVersion = 1;

struct SynthSpec {
  std::uint64_t seed = 42;
  std::size_t n_points = 1000;
  BBox extent{0, 0, 1000, 1000};
  int raster_ncols = 100;
  int raster_nrows = 100;
  RasterKind raster_kind = RasterKind::continuous;
  int n_categories = 8;
  std::size_t n_lines = 50;
};

struct SynthData {
  FeatureSet points;  // ids p0.., attribute `v` uniform in [0, 100)
  FeatureSet lines;   // ids l0.., two-vertex segments
  Raster raster;      // anchored at the extent's min corner, cellsize = width / ncols
};

// Points, raster and lines come from three independent streams (seed ^ 1, ^ 2, ^ 3),
// so changing one count leaves the other components unchanged.
inline SynthData synth_dataset(const SynthSpec& s) {
  if (!s.extent.valid() || !(s.extent.width() > 0 && s.extent.height() > 0))
    throw InvalidParameter("synthetic extent must be non-degenerate");
  if (s.raster_ncols < 1 || s.raster_nrows < 1) throw InvalidParameter("raster size must be >= 1");
  if (s.raster_kind == RasterKind::categorical && s.n_categories < 1) throw InvalidParameter("n_categories must be >= 1");
  SynthData d;
  const BBox& e = s.extent;

  SplitMix64 prng_points(s.seed ^ 1);
  d.points.columns = {"v"};
  d.points.features.reserve(s.n_points);
  for (std::size_t i = 0; i < s.n_points; ++i) {
    const double x = prng_points.uniform(e.xmin, e.xmax);
    const double y = prng_points.uniform(e.ymin, e.ymax);
    const double v = prng_points.uniform(0, 100);
    d.points.features.push_back(Feature{"p" + std::to_string(i), Point{x, y}, {{"v", v}}});
  }

  SplitMix64 prng_raster(s.seed ^ 2);
  Raster& r = d.raster;
  r.ncols = s.raster_ncols;
  r.nrows = s.raster_nrows;
  r.xll = e.xmin;
  r.yll = e.ymin;
  r.cellsize = e.width() / s.raster_ncols;
  r.nodata = -9999;
  r.kind = s.raster_kind;
  r.values.resize(static_cast<std::size_t>(r.ncols) * static_cast<std::size_t>(r.nrows));
  for (double& v : r.values) {
    if (s.raster_kind == RasterKind::categorical) {
      v = 1 + std::floor(prng_raster.uniform() * s.n_categories);
    } else {
      v = prng_raster.uniform(0, 100);
    }
  }

  SplitMix64 prng_lines(s.seed ^ 3);
  d.lines.features.reserve(s.n_lines);
  for (std::size_t i = 0; i < s.n_lines; ++i) {
    const Point a{prng_lines.uniform(e.xmin, e.xmax), prng_lines.uniform(e.ymin, e.ymax)};
    Point b{a.x + prng_lines.uniform(-0.1, 0.1) * e.width(), a.y + prng_lines.uniform(-0.1, 0.1) * e.height()};
    if (b == a) b.x += e.width() * 1e-6;
    d.lines.features.push_back(Feature{"l" + std::to_string(i), Polyline{{a, b}}, {}});
  }
  return d;
}

struct Scaling {
  double speedup = 0;
  double efficiency = 0;
};

inline Scaling efficiency(double t1, int n, double tn) {
  if (!(t1 > 0) || !(tn > 0) || n < 1) throw InvalidParameter("efficiency needs t1 > 0, tn > 0 and n >= 1");
  return {t1 / tn, t1 / (n * tn)};
}

struct BenchMetrics {
  double t1 = 0;
  double tn = 0;
  int n = 1;
  int repeats = 1;
  std::string aggregation = "median";

  double speedup() const { return efficiency(t1, n, tn).speedup; }
  double efficiency_per_thread() const { return efficiency(t1, n, tn).efficiency; }
};

struct BenchRun {
  int workers = 1;
  int repeat = 0;
  double elapsed_s = 0;
};

struct BenchReport {
  std::vector<BenchRun> runs;
  std::vector<BenchMetrics> median;
  std::vector<BenchMetrics> mean;
  std::string reference_csv;  // workers=1 output every timed run was checked against
};

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

using BenchClock = std::function<double()>;

inline double steady_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

// Times run_grid for each worker count. Partitioning happens once, untimed.
// An untimed workers=1 run fixes the reference output; every timed run must
// reproduce it byte for byte. A timing whose end precedes its start is
// retried once and then reported as an error.
inline BenchReport run_benchmark(const TaskSpec& task, const GridSpec& grid, std::vector<int> workers_list,
                                 int repeats, BenchClock clock = steady_seconds) {
  if (repeats < 1) throw InvalidParameter("repeats must be >= 1");
  if (workers_list.empty()) throw InvalidParameter("workers list is empty");
  for (int w : workers_list) {
    if (w < 1) throw InvalidParameter("worker counts must be >= 1");
  }
  if (std::find(workers_list.begin(), workers_list.end(), 1) == workers_list.end())
    workers_list.insert(workers_list.begin(), 1);

  const auto bound = detail::bind(task);
  const PartitionSet parts = make_partition(*bound.anchors, grid);

  BenchReport report;
  report.reference_csv = run_grid(task, parts, RunConfig{1, true, false, {}}).to_csv();

  std::map<int, std::vector<double>> times;
  for (int w : workers_list) {
    for (int rep = 0; rep < repeats; ++rep) {
      double elapsed = -1;
      for (int attempt = 0; attempt < 2 && elapsed < 0; ++attempt) {
        const double t0 = clock();
        const ResultTable out = run_grid(task, parts, RunConfig{w, true, false, {}});
        const double t1 = clock();
        if (out.to_csv() != report.reference_csv)
          throw Error("benchmark output with " + std::to_string(w) + " workers differs from the 1-worker output");
        if (t1 >= t0) elapsed = t1 - t0;
      }
      if (elapsed < 0) throw Error("timer went backwards twice; benchmark aborted");
      report.runs.push_back({w, rep, elapsed});
      times[w].push_back(elapsed);
    }
  }
  // Zero-length timings (coarse clocks) are clamped so the metrics stay defined.
  auto positive = [](double t) { return std::max(t, 1e-9); };
  const double t1_med = positive(median_of(times[1]));
  const double t1_mean = positive(mean_of(times[1]));
  std::vector<int> seen;
  for (int w : workers_list) {
    if (std::find(seen.begin(), seen.end(), w) != seen.end()) continue;
    seen.push_back(w);
    report.median.push_back({t1_med, positive(median_of(times[w])), w, repeats, "median"});
    report.mean.push_back({t1_mean, positive(mean_of(times[w])), w, repeats, "mean"});
  }
  return report;
}

inline std::string bench_runs_csv(const std::string& case_name, const BenchReport& r) {
  std::string s = "case,workers,repeat,elapsed_s\n";
  for (const auto& run : r.runs) {
    s += case_name + "," + std::to_string(run.workers) + "," + std::to_string(run.repeat) + "," +
         format_double(run.elapsed_s) + "\n";
  }
  return s;
}

inline std::string bench_summary_csv(const std::string& case_name, const BenchReport& r, double wall_total_s) {
  std::string s = "case,workers,repeats,aggregation,t1,tn,speedup,efficiency,wall_total_s\n";
  for (const auto* group : {&r.median, &r.mean}) {
    for (const auto& m : *group) {
      s += case_name + "," + std::to_string(m.n) + "," + std::to_string(m.repeats) + "," + m.aggregation + "," +
           format_double(m.t1) + "," + format_double(m.tn) + "," + format_double(m.speedup()) + "," +
           format_double(m.efficiency_per_thread()) + "," + format_double(wall_total_s) + "\n";
    }
  }
  return s;
}

}  // namespace chop

#endif  // CHOP_BENCH_HPP
