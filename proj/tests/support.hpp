#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "chop/bench.hpp"
#include "chop/dataio.hpp"
#include "chop/geom.hpp"
#include "chop/raster.hpp"

namespace testing_support {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("chop_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

// Fraction of a cell covered by `poly`, sampled on an s x s grid of cell-local points.
inline double supersample_fraction(const chop::Raster& r, const chop::Polygon& poly, int row, int col, int s = 256) {
  const chop::BBox c = r.cell_box(row, col);
  const double step = r.cellsize / s;
  long inside = 0;
  for (int j = 0; j < s; ++j) {
    const double y = c.ymin + (j + 0.5) * step;
    for (int i = 0; i < s; ++i) {
      if (chop::point_in_polygon({c.xmin + (i + 0.5) * step, y}, poly)) ++inside;
    }
  }
  return static_cast<double>(inside) / (static_cast<double>(s) * s);
}

inline chop::Raster constant_raster(int ncols, int nrows, double v, double cellsize = 1, double xll = 0,
                                    double yll = 0) {
  chop::Raster r;
  r.ncols = ncols;
  r.nrows = nrows;
  r.cellsize = cellsize;
  r.xll = xll;
  r.yll = yll;
  r.values.assign(static_cast<std::size_t>(ncols) * nrows, v);
  return r;
}

// Convex (one radius) or star-shaped (random radii) polygon around c.
inline chop::Polygon random_polygon(std::mt19937_64& rng, chop::Point c, double rmin, double rmax, bool convex) {
  std::uniform_real_distribution<double> u(0, 1);
  const int n = 3 + static_cast<int>(u(rng) * 12);
  std::vector<double> angles;
  // Angular gaps below pi keep the ring simple.
  for (double gap = 2 * M_PI; gap >= M_PI;) {
    angles.clear();
    for (int i = 0; i < n; ++i) angles.push_back(u(rng) * 2 * M_PI);
    std::sort(angles.begin(), angles.end());
    gap = angles.front() + 2 * M_PI - angles.back();
    for (int i = 1; i < n; ++i) gap = std::max(gap, angles[i] - angles[i - 1]);
  }
  const double rc = rmin + (rmax - rmin) * u(rng);
  std::vector<chop::Point> pts;
  for (double a : angles) {
    const double rad = convex ? rc : rmin + (rmax - rmin) * u(rng);
    pts.push_back({c.x + rad * std::cos(a), c.y + rad * std::sin(a)});
  }
  return chop::make_polygon(chop::make_ring(pts));
}

inline chop::FeatureSet point_set(const std::vector<chop::Point>& pts, const std::string& prefix = "p") {
  chop::FeatureSet fs;
  for (std::size_t i = 0; i < pts.size(); ++i) fs.features.push_back({prefix + std::to_string(i), pts[i], {}});
  return fs;
}

// Recursive guillotine split of `box` into about `n` rectangles, with values drawn uniformly.
inline chop::FeatureSet random_tiling(std::mt19937_64& rng, const chop::BBox& box, int n, const std::string& prefix,
                                      const std::string& value_column = "v") {
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<chop::BBox> boxes{box};
  while (static_cast<int>(boxes.size()) < n) {
    std::size_t k = 0;
    for (std::size_t i = 1; i < boxes.size(); ++i) {
      if (boxes[i].width() * boxes[i].height() > boxes[k].width() * boxes[k].height()) k = i;
    }
    const chop::BBox b = boxes[k];
    const double t = 0.2 + 0.6 * u(rng);
    if (b.width() >= b.height()) {
      const double x = b.xmin + t * b.width();
      boxes[k] = {b.xmin, b.ymin, x, b.ymax};
      boxes.push_back({x, b.ymin, b.xmax, b.ymax});
    } else {
      const double y = b.ymin + t * b.height();
      boxes[k] = {b.xmin, b.ymin, b.xmax, y};
      boxes.push_back({b.xmin, y, b.xmax, b.ymax});
    }
  }
  chop::FeatureSet fs;
  fs.columns = {value_column};
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    fs.features.push_back({prefix + std::to_string(i), chop::rect_polygon(boxes[i]), {{value_column, 100 * u(rng)}}});
  }
  return fs;
}

}  // namespace testing_support
