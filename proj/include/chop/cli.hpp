#pragma once
#ifndef CHOP_CLI_HPP
#define CHOP_CLI_HPP

// `chop` command line: partition, run, multiraster, bench, synth.
//
// Exit codes: 0 success, 2 usage or parameter error, 3 input/load error,
// 4 at least one chunk failed (its rows carry the error message).

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "chop/bench.hpp"
#include "chop/dataio.hpp"
#include "chop/error.hpp"
#include "chop/executor.hpp"
#include "chop/partition.hpp"

namespace chop::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kInput = 3, kPartial = 4 };

// Flag value errors detected after parsing (conflicts, unknown config keys).
struct UsageError : Error {
  using Error::Error;
};

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline RasterKind parse_raster_kind(const std::string& s) {
  if (s == "continuous") return RasterKind::continuous;
  if (s == "categorical") return RasterKind::categorical;
  throw InvalidParameter("raster kind must be continuous or categorical, not '" + s + "'");
}

inline int default_workers() {
  if (const char* env = std::getenv("CHOP_WORKERS")) {
    auto v = parse_double(env);
    if (!v || *v < 1 || *v != std::floor(*v)) throw UsageError("CHOP_WORKERS must be a positive integer");
    return static_cast<int>(*v);
  }
  return 1;
}

// Everything `run` and `multiraster` need; filled from --config, then from explicit flags.
struct RunOptions {
  std::string task;
  std::string x;
  std::string y;
  std::string id = "id";
  std::optional<std::string> x_id;
  std::string x_col = "x";
  std::string y_col = "y";
  double radius = 0;
  std::string stat = "mean";
  double bandwidth = 0;
  std::optional<double> maxdist;
  std::vector<std::string> value_cols;
  std::optional<std::string> partition;
  std::optional<std::string> hierarchy;
  std::optional<std::string> regions;
  std::string regions_id = "id";
  bool pad_y = false;
  std::optional<int> workers;
  bool capture_errors = true;
  bool fail_fast = false;
  std::string out;
  std::string raster_kind = "continuous";
  std::map<std::string, std::string> arg_map;
  std::vector<std::string> rasters;
  std::optional<std::string> raster_list;
  std::optional<std::int64_t> fail_chunk;
};

inline void apply_config(RunOptions& o, const nlohmann::json& j) {
  if (!j.is_object()) throw UsageError("job config must be a JSON object");
  auto str = [&](const nlohmann::json& v, const std::string& k) {
    if (!v.is_string()) throw UsageError("config key '" + k + "' must be a string");
    return v.get<std::string>();
  };
  auto num = [&](const nlohmann::json& v, const std::string& k) {
    if (!v.is_number()) throw UsageError("config key '" + k + "' must be a number");
    return v.get<double>();
  };
  auto boolean = [&](const nlohmann::json& v, const std::string& k) {
    if (!v.is_boolean()) throw UsageError("config key '" + k + "' must be a boolean");
    return v.get<bool>();
  };
  auto strings = [&](const nlohmann::json& v, const std::string& k) {
    if (v.is_string()) return split_list(v.get<std::string>());
    if (!v.is_array()) throw UsageError("config key '" + k + "' must be a list of strings");
    std::vector<std::string> out;
    for (const auto& e : v) out.push_back(str(e, k));
    return out;
  };
  for (const auto& [k, v] : j.items()) {
    if (k == "task") o.task = str(v, k);
    else if (k == "x") o.x = str(v, k);
    else if (k == "y") o.y = str(v, k);
    else if (k == "id") o.id = str(v, k);
    else if (k == "x_id") o.x_id = str(v, k);
    else if (k == "x_col") o.x_col = str(v, k);
    else if (k == "y_col") o.y_col = str(v, k);
    else if (k == "radius") o.radius = num(v, k);
    else if (k == "stat") o.stat = str(v, k);
    else if (k == "bandwidth") o.bandwidth = num(v, k);
    else if (k == "maxdist") o.maxdist = num(v, k);
    else if (k == "value_cols") o.value_cols = strings(v, k);
    else if (k == "partition") o.partition = str(v, k);
    else if (k == "hierarchy") o.hierarchy = str(v, k);
    else if (k == "regions") o.regions = str(v, k);
    else if (k == "regions_id") o.regions_id = str(v, k);
    else if (k == "pad_y") o.pad_y = boolean(v, k);
    else if (k == "workers") {
      const double w = num(v, k);
      if (w < 1 || w != std::floor(w)) throw UsageError("config key 'workers' must be a positive integer");
      o.workers = static_cast<int>(w);
    } else if (k == "capture_errors") o.capture_errors = boolean(v, k);
    else if (k == "fail_fast") o.fail_fast = boolean(v, k);
    else if (k == "out") o.out = str(v, k);
    else if (k == "raster_kind") o.raster_kind = str(v, k);
    else if (k == "rasters") o.rasters = strings(v, k);
    else if (k == "raster_list") o.raster_list = str(v, k);
    else if (k == "arg_map") {
      if (!v.is_object()) throw UsageError("config key 'arg_map' must be an object");
      for (const auto& [ak, av] : v.items()) o.arg_map[ak] = str(av, "arg_map." + ak);
    } else {
      throw UsageError("unknown config key '" + k + "'");
    }
  }
}

inline std::map<std::string, std::string> parse_arg_map(const std::string& s) {
  std::map<std::string, std::string> m;
  for (const auto& item : split_list(s)) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("--arg-map entries look like name=x or name=y");
    m[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return m;
}

// Input failures (missing files, malformed content) are exit 3; bad parameters exit 2.
template <class Fn>
auto load_input(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const InvalidParameter&) {
    throw;
  } catch (const Error& e) {
    throw LoadError("input", 0, e.what());
  }
}

inline std::shared_ptr<const FeatureSet> load_feature_input(const std::string& path, const std::string& id,
                                                            const RunOptions& o) {
  return load_input([&] {
    auto fs = std::make_shared<FeatureSet>(load_features(path, id, o.x_col, o.y_col));
    fs->validate();
    return std::shared_ptr<const FeatureSet>(fs);
  });
}

struct PreparedRun {
  TaskSpec task;
  RunConfig cfg;
  std::shared_ptr<const FeatureSet> anchors;
};

inline PreparedRun prepare(const RunOptions& o, bool multiraster) {
  if (o.task.empty()) throw UsageError("--task is required");
  if (o.y.empty() && o.x.empty()) throw UsageError("--x and --y are required");
  if (o.out.empty()) throw UsageError("--out is required");
  PreparedRun p;
  TaskSpec& t = p.task;
  t.op = parse_op(o.task);
  t.radius = o.radius;
  t.stat = o.stat;
  t.bandwidth = o.bandwidth;
  t.maxdist = o.maxdist;
  t.value_columns = o.value_cols;
  t.id_column = o.id;
  t.pad_y = o.pad_y;
  t.arg_map = o.arg_map;
  const bool y_anchor = anchor_is_y(t);
  const std::string& anchor_path = y_anchor ? o.y : o.x;
  const std::string& context_path = y_anchor ? o.x : o.y;
  const std::string anchor_id = y_anchor ? o.id : o.x_id.value_or(o.id);
  const std::string context_id = y_anchor ? o.x_id.value_or(o.id) : o.id;
  if (anchor_path.empty()) throw UsageError(std::string("--") + (y_anchor ? "y" : "x") + " (anchor dataset) is required");
  p.anchors = load_feature_input(anchor_path, anchor_id, o);
  DatasetRef context;
  if (t.op == OpKind::extract_at) {
    if (!multiraster && context_path.empty()) throw UsageError("extract_at needs a raster path");
    context = RasterRef{context_path, nullptr, parse_raster_kind(o.raster_kind)};
  } else {
    if (context_path.empty()) throw UsageError("context dataset path is required");
    context = load_feature_input(context_path, context_id, o);
  }
  (y_anchor ? t.y : t.x) = p.anchors;
  (y_anchor ? t.x : t.y) = context;

  p.cfg.workers = o.workers.value_or(default_workers());
  if (p.cfg.workers < 1) throw UsageError("--workers must be >= 1");
  p.cfg.capture_errors = o.capture_errors;
  p.cfg.fail_fast = o.fail_fast;
  if (o.fail_chunk) {
    const std::int64_t bad = *o.fail_chunk;
    p.cfg.chunk_hook = [bad](std::int64_t id) {
      if (id == bad) throw Error("injected failure in chunk " + std::to_string(id));
    };
  }
  return p;
}

inline ResultTable execute_run(const RunOptions& o) {
  const int modes = (o.partition ? 1 : 0) + (o.hierarchy ? 1 : 0) + (o.regions ? 1 : 0);
  if (modes > 1) throw UsageError("--partition, --hierarchy and --regions are mutually exclusive");
  PreparedRun p = prepare(o, false);
  if (o.hierarchy) return run_hierarchy(p.task, group_by_hierarchy(*p.anchors, *o.hierarchy), p.cfg);
  if (o.regions) {
    auto regions = load_input([&] { return load_features(*o.regions, o.regions_id, o.x_col, o.y_col); });
    return run_hierarchy(p.task, group_by_regions(*p.anchors, regions, "id"), p.cfg);
  }
  PartitionSet parts;
  if (o.partition) {
    parts = load_input([&] { return load_partitions(*o.partition); });
    // A partition file without members is assigned on the fly.
    if (parts.member_count() == 0) parts = assign_to_partition(*p.anchors, std::move(parts));
  } else {
    const BBox all = p.anchors->empty() ? BBox{0, 0, 1, 1} : data_extent(*p.anchors);
    parts = assign_to_partition(*p.anchors, PartitionSet{PartitionMode::grid, 0, {Chunk{0, all, all, {}}}});
    parts.chunks[0].padded = BBox{-std::numeric_limits<double>::max(), -std::numeric_limits<double>::max(),
                                  std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  }
  return run_grid(p.task, parts, p.cfg);
}

inline ResultTable execute_multiraster(const RunOptions& o) {
  std::vector<std::string> paths = o.rasters;
  if (o.raster_list) {
    const std::string text = load_input([&] { return read_file(*o.raster_list); });
    for (const auto& line : split_list(text, '\n')) {
      std::string s = line;
      while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
      if (!s.empty()) paths.push_back(s);
    }
  }
  if (paths.empty()) throw UsageError("--rasters or --raster-list is required");
  if (o.partition || o.hierarchy || o.regions) throw UsageError("multiraster does not take partition flags");
  RunOptions m = o;
  if (m.task.empty()) m.task = "extract_at";
  if (parse_op(m.task) != OpKind::extract_at) throw UsageError("multiraster runs extract_at only");
  PreparedRun p = prepare(m, true);
  return run_multirasters(p.task, paths, p.cfg);
}

// Registers the flags shared by `run` and `multiraster`; values land in `o`.
inline void add_run_flags(CLI::App& app, RunOptions& o, std::string& config, std::string& arg_map,
                          std::string& value_cols, std::string& rasters) {
  app.add_option("--config", config, "JSON job file; explicit flags override its values");
  app.add_option("--task", o.task, "extract_at | summarize_aw | sedc | nearest");
  app.add_option("--x", o.x, "x dataset (raster path for extract_at)");
  app.add_option("--y", o.y, "y dataset (features)");
  app.add_option("--id", o.id, "id column of y");
  app.add_option("--x-id", o.x_id, "id column of x (defaults to --id)");
  app.add_option("--x-col", o.x_col, "CSV x coordinate column");
  app.add_option("--y-col", o.y_col, "CSV y coordinate column");
  app.add_option("--radius", o.radius, "buffer radius for extract_at");
  app.add_option("--stat", o.stat, "mean|sum|count|min|max|stdev|frequency");
  app.add_option("--bandwidth", o.bandwidth, "SEDC bandwidth");
  app.add_option("--maxdist", o.maxdist, "SEDC cutoff distance (default 2*bandwidth)");
  app.add_option("--value-cols", value_cols, "comma-separated value columns");
  app.add_option("--partition", o.partition, "PartitionSet JSON file");
  app.add_option("--hierarchy", o.hierarchy, "anchor attribute column to group by");
  app.add_option("--regions", o.regions, "region polygons to group anchors by");
  app.add_option("--regions-id", o.regions_id, "id column of the regions file");
  app.add_flag("--pad-y", o.pad_y, "y is the padded context and x the anchor");
  app.add_option("--workers", o.workers, "worker threads (default $CHOP_WORKERS or 1)");
  app.add_flag("--capture-errors,!--no-capture-errors", o.capture_errors, "record chunk errors as rows (default)");
  app.add_flag("--fail-fast", o.fail_fast, "stop scheduling chunks after the first failure");
  app.add_option("--out", o.out, "output CSV");
  app.add_option("--raster-kind", o.raster_kind, "continuous | categorical");
  app.add_option("--arg-map", arg_map, "bind argument names to x/y, e.g. targets=x,sources=y");
  app.add_option("--fail-chunk", o.fail_chunk, "inject a failure into one chunk (testing aid)");
  app.add_option("--rasters", rasters, "comma-separated raster paths (multiraster)");
  app.add_option("--raster-list", o.raster_list, "file with one raster path per line (multiraster)");
}

// Config first, then every flag given explicitly on the command line.
inline RunOptions resolve_run_options(CLI::App& app, const RunOptions& flags, const std::string& config,
                                      const std::string& arg_map, const std::string& value_cols,
                                      const std::string& rasters) {
  RunOptions o;
  if (!config.empty()) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(config));
    } catch (const nlohmann::json::parse_error& e) {
      throw LoadError(config, 0, e.what());
    } catch (const IoError& e) {
      throw LoadError(config, 0, e.what());
    }
    apply_config(o, j);
  }
  auto given = [&](const char* name) { return app.get_option(name)->count() > 0; };
  if (given("--task")) o.task = flags.task;
  if (given("--x")) o.x = flags.x;
  if (given("--y")) o.y = flags.y;
  if (given("--id")) o.id = flags.id;
  if (given("--x-id")) o.x_id = flags.x_id;
  if (given("--x-col")) o.x_col = flags.x_col;
  if (given("--y-col")) o.y_col = flags.y_col;
  if (given("--radius")) o.radius = flags.radius;
  if (given("--stat")) o.stat = flags.stat;
  if (given("--bandwidth")) o.bandwidth = flags.bandwidth;
  if (given("--maxdist")) o.maxdist = flags.maxdist;
  if (given("--value-cols")) o.value_cols = split_list(value_cols);
  if (given("--partition")) o.partition = flags.partition;
  if (given("--hierarchy")) o.hierarchy = flags.hierarchy;
  if (given("--regions")) o.regions = flags.regions;
  if (given("--regions-id")) o.regions_id = flags.regions_id;
  if (given("--pad-y")) o.pad_y = flags.pad_y;
  if (given("--workers")) o.workers = flags.workers;
  if (given("--capture-errors")) o.capture_errors = flags.capture_errors;
  if (given("--fail-fast")) o.fail_fast = flags.fail_fast;
  if (given("--out")) o.out = flags.out;
  if (given("--raster-kind")) o.raster_kind = flags.raster_kind;
  if (given("--arg-map")) o.arg_map = parse_arg_map(arg_map);
  if (given("--fail-chunk")) o.fail_chunk = flags.fail_chunk;
  if (given("--rasters")) o.rasters = split_list(rasters);
  if (given("--raster-list")) o.raster_list = flags.raster_list;
  return o;
}

inline int finish_table(const ResultTable& t, const std::string& out, std::ostream& err) {
  save_table(t, out);
  std::size_t failed = 0;
  for (const auto& r : t.rows()) failed += r.error ? 1 : 0;
  err << "wrote " << t.size() << " rows to " << out;
  if (failed) err << " (" << failed << " error rows)";
  err << "\n";
  return failed ? kPartial : kOk;
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"chop: partitioned parallel geoprocessing"};
  app.require_subcommand(1);

  // partition
  auto* part = app.add_subcommand("partition", "generate a PartitionSet JSON file");
  std::string p_input, p_format, p_id = "id", p_xcol = "x", p_ycol = "y", p_mode = "grid", p_out;
  int p_nx = 1, p_ny = 1, p_nq = 2, p_groups = 2, p_min = 1;
  double p_padding = 0;
  part->add_option("--input", p_input, "anchor features (CSV or GeoJSON)")->required();
  part->add_option("--format", p_format, "csv | geojson (default: by extension)");
  part->add_option("--id", p_id, "id column");
  part->add_option("--x-col", p_xcol, "CSV x coordinate column");
  part->add_option("--y-col", p_ycol, "CSV y coordinate column");
  part->add_option("--mode", p_mode, "grid | quantile | advanced | balanced");
  part->add_option("--nx", p_nx, "columns (grid, advanced)");
  part->add_option("--ny", p_ny, "rows (grid, advanced)");
  part->add_option("--nq", p_nq, "quantile breaks per axis (quantile)");
  part->add_option("--groups", p_groups, "number of groups (balanced)");
  part->add_option("--min-features", p_min, "merge threshold (advanced)");
  part->add_option("--padding", p_padding, "padding distance");
  part->add_option("--out", p_out, "output JSON")->required();

  // run / multiraster
  RunOptions run_flags;
  std::string r_config, r_argmap, r_values, r_rasters;
  auto* run = app.add_subcommand("run", "run a task over a partition, hierarchy or region grouping");
  add_run_flags(*run, run_flags, r_config, r_argmap, r_values, r_rasters);
  RunOptions mr_flags;
  std::string m_config, m_argmap, m_values, m_rasters;
  auto* multi = app.add_subcommand("multiraster", "run extract_at against several rasters, one per chunk");
  add_run_flags(*multi, mr_flags, m_config, m_argmap, m_values, m_rasters);

  // bench
  auto* bench = app.add_subcommand("bench", "time a task over worker counts");
  std::string b_case = "extract", b_workers = "1,2,4,8", b_out;
  std::size_t b_points = 10000;
  int b_size = 500, b_repeats = 3, b_nx = 4, b_ny = 2;
  std::uint64_t b_seed = 42;
  bench->add_option("--case", b_case, "extract | nearest | frequency");
  bench->add_option("--n-points", b_points, "synthetic points");
  bench->add_option("--raster-size", b_size, "raster columns and rows");
  bench->add_option("--workers", b_workers, "comma-separated worker counts");
  bench->add_option("--repeats", b_repeats, "timed repeats per worker count");
  bench->add_option("--seed", b_seed, "synthetic data seed");
  bench->add_option("--nx", b_nx, "grid columns");
  bench->add_option("--ny", b_ny, "grid rows");
  bench->add_option("--out", b_out, "output prefix: <out>_runs.csv, <out>_summary.csv, <out>_checksum.txt")
      ->required();

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic dataset");
  std::string s_dir, s_kind = "continuous";
  std::size_t s_points = 1000, s_lines = 50;
  int s_size = 100, s_categories = 8;
  std::uint64_t s_seed = 42;
  double s_extent = 10000;
  synth->add_option("--seed", s_seed, "seed");
  synth->add_option("--n-points", s_points, "points");
  synth->add_option("--n-lines", s_lines, "line segments");
  synth->add_option("--raster-size", s_size, "raster columns and rows");
  synth->add_option("--raster-kind", s_kind, "continuous | categorical");
  synth->add_option("--categories", s_categories, "categories (categorical raster)");
  synth->add_option("--extent", s_extent, "square extent side length");
  synth->add_option("--out-dir", s_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (*part) {
      RunOptions io;
      io.x_col = p_xcol;
      io.y_col = p_ycol;
      const FeatureSet fs = load_input([&] {
        auto f = p_format.empty() ? load_features(p_input, p_id, p_xcol, p_ycol)
                                  : load_features(p_input, parse_feature_format(p_format), p_id, p_xcol, p_ycol);
        f.validate();
        return f;
      });
      GridSpec spec{parse_mode(p_mode), p_nx, p_ny, p_nq, p_groups, p_min, p_padding};
      PartitionSet ps;
      try {
        ps = make_partition(fs, spec);
      } catch (const InvalidInput& e) {
        throw LoadError(p_input, 0, e.what());
      }
      save_partitions(ps, p_out);
      std::vector<std::size_t> sizes;
      for (const auto& c : ps.chunks) sizes.push_back(c.member_ids.size());
      std::sort(sizes.begin(), sizes.end());
      err << "chunks: " << ps.chunks.size();
      if (!sizes.empty()) {
        err << ", members min/median/max: " << sizes.front() << "/" << sizes[sizes.size() / 2] << "/"
            << sizes.back();
      }
      err << "\n";
      return kOk;
    }
    if (*run) {
      const RunOptions o = resolve_run_options(*run, run_flags, r_config, r_argmap, r_values, r_rasters);
      return finish_table(execute_run(o), o.out, err);
    }
    if (*multi) {
      const RunOptions o = resolve_run_options(*multi, mr_flags, m_config, m_argmap, m_values, m_rasters);
      return finish_table(execute_multiraster(o), o.out, err);
    }
    if (*bench) {
      std::vector<int> workers;
      for (const auto& w : split_list(b_workers)) {
        auto v = parse_double(w);
        if (!v || *v < 1 || *v != std::floor(*v)) throw UsageError("--workers takes positive integers");
        workers.push_back(static_cast<int>(*v));
      }
      if (b_case != "extract" && b_case != "nearest" && b_case != "frequency")
        throw UsageError("--case must be extract, nearest or frequency");
      const double wall0 = steady_seconds();
      SynthSpec ss;
      ss.seed = b_seed;
      ss.n_points = b_points;
      ss.extent = {0, 0, 100000, 100000};
      ss.raster_ncols = ss.raster_nrows = b_size;
      ss.raster_kind = b_case == "frequency" ? RasterKind::categorical : RasterKind::continuous;
      ss.n_lines = std::max<std::size_t>(50, b_points / 100);
      const SynthData d = synth_dataset(ss);
      const double cell = ss.extent.width() / b_size;
      TaskSpec t;
      GridSpec g{PartitionMode::grid, b_nx, b_ny, 1, 1, 1, 0};
      auto points = std::make_shared<const FeatureSet>(d.points);
      t.y = points;
      if (b_case == "nearest") {
        t.op = OpKind::nearest_distance;
        t.x = std::make_shared<const FeatureSet>(d.lines);
        g.padding = 0.1 * ss.extent.width();
      } else {
        t.op = OpKind::extract_at;
        t.x = RasterRef{"", std::make_shared<const Raster>(d.raster), ss.raster_kind};
        t.radius = 2.5 * cell;
        t.stat = b_case == "frequency" ? "frequency" : "mean";
        g.padding = t.radius;
      }
      const BenchReport rep = run_benchmark(t, g, workers, b_repeats);
      const double wall = steady_seconds() - wall0;
      write_file(b_out + "_runs.csv", bench_runs_csv(b_case, rep));
      write_file(b_out + "_summary.csv", bench_summary_csv(b_case, rep, wall));
      const std::string sum = hex64(fnv1a(rep.reference_csv));
      write_file(b_out + "_checksum.txt", sum + "\n");
      err << "result checksum " << sum << "\n";
      for (const auto& m : rep.median) {
        err << "workers " << m.n << ": median " << format_double(m.tn) << " s, speedup "
            << format_double(m.speedup()) << ", efficiency " << format_double(m.efficiency_per_thread()) << "\n";
      }
      return kOk;
    }
    if (*synth) {
      SynthSpec ss;
      ss.seed = s_seed;
      ss.n_points = s_points;
      ss.n_lines = s_lines;
      ss.raster_ncols = ss.raster_nrows = s_size;
      ss.raster_kind = parse_raster_kind(s_kind);
      ss.n_categories = s_categories;
      if (!(s_extent > 0)) throw UsageError("--extent must be > 0");
      ss.extent = {0, 0, s_extent, s_extent};
      const SynthData d = synth_dataset(ss);
      std::filesystem::create_directories(s_dir);
      const std::filesystem::path dir(s_dir);
      save_features(d.points, (dir / "points.csv").string());
      save_features(d.lines, (dir / "lines.geojson").string());
      write_raster(d.raster, (dir / "raster.asc").string());
      err << "wrote points.csv, lines.geojson, raster.asc to " << s_dir << "\n";
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidParameter& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInput;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kInput;
  }
  return kUsage;
}

}  // namespace chop::cli

#endif  // CHOP_CLI_HPP
