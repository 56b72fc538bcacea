#pragma once
#ifndef CHOP_EXECUTOR_HPP
#define CHOP_EXECUTOR_HPP

// Runs one task over many chunks on a pool of worker threads.
//
// The anchor dataset is split by chunk membership (each anchor belongs to
// exactly one chunk) and the context dataset is cut to each chunk's padded
// extent. Chunks are pulled from a shared queue in any order; results are
// merged by chunk id, so the output never depends on the worker count.

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <variant>
#include <vector>

#include "chop/dataio.hpp"
#include "chop/error.hpp"
#include "chop/features.hpp"
#include "chop/geoops.hpp"
#include "chop/partition.hpp"
#include "chop/raster.hpp"
#include "chop/table.hpp"

namespace chop {

// ---------------------------------------------------------------------------
// Worker pool

// Fixed set of threads draining an index queue. `fn(task, worker)` must not throw;
// anything that escapes is rethrown from run() after all workers have joined.
class WorkerPool {
 public:
  explicit WorkerPool(int workers) : workers_(workers) {
    if (workers < 1) throw InvalidParameter("workers must be >= 1");
  }

  int size() const { return workers_; }

  template <class Fn>
  void run(std::size_t tasks, Fn&& fn) const {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto drain = [&](int worker) {
      for (;;) {
        const std::size_t t = next.fetch_add(1);
        if (t >= tasks) return;
        try {
          fn(t, worker);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    const int spawned = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers_), tasks));
    {
      std::vector<std::jthread> threads;
      for (int w = 1; w < spawned; ++w) threads.emplace_back(drain, w);
      drain(0);
    }
    if (failure) std::rethrow_exception(failure);
  }

 private:
  int workers_;
};

// ---------------------------------------------------------------------------
// Task description

enum class OpKind { extract_at, summarize_aw, summarize_sedc, nearest_distance };

inline const char* op_name(OpKind op) {
  switch (op) {
    case OpKind::extract_at: return "extract_at";
    case OpKind::summarize_aw: return "summarize_aw";
    case OpKind::summarize_sedc: return "summarize_sedc";
    default: return "nearest_distance";
  }
}

inline OpKind parse_op(const std::string& s) {
  if (s == "extract_at") return OpKind::extract_at;
  if (s == "summarize_aw" || s == "aw") return OpKind::summarize_aw;
  if (s == "summarize_sedc" || s == "sedc") return OpKind::summarize_sedc;
  if (s == "nearest_distance" || s == "nearest") return OpKind::nearest_distance;
  throw InvalidParameter("unknown task '" + s + "'");
}

// A raster given by path (opened by each worker that needs it) or already in memory.
struct RasterRef {
  std::string path;
  std::shared_ptr<const Raster> raster;
  RasterKind kind = RasterKind::continuous;
};

using DatasetRef = std::variant<std::monostate, std::shared_ptr<const FeatureSet>, RasterRef>;

struct TaskSpec {
  OpKind op = OpKind::extract_at;
  DatasetRef x;
  DatasetRef y;
  double radius = 0;
  std::string stat = "mean";
  double bandwidth = 0;
  std::optional<double> maxdist;
  std::vector<std::string> value_columns;
  std::string id_column = "id";
  bool pad_y = false;
  // Binds the operation's own argument names to "x" / "y" (see op_arguments).
  std::map<std::string, std::string> arg_map;
};

struct RunConfig {
  int workers = 1;
  bool capture_errors = true;
  bool fail_fast = false;
  // Called on the worker right before a chunk is computed; throwing fails that chunk.
  std::function<void(std::int64_t)> chunk_hook;
};

struct ChunkError {
  std::string message;
  std::int64_t chunk_id = 0;
};

struct ChunkResult {
  std::int64_t chunk_id = 0;
  ResultTable rows;
  std::optional<ChunkError> error;
  std::vector<std::string> anchor_ids;                  // for error rows
  std::vector<std::pair<std::string, Value>> tags;      // leading columns (group, raster)
};

// Argument names of each operation: {anchor argument, context argument}.
inline std::pair<std::string, std::string> op_arguments(OpKind op) {
  switch (op) {
    case OpKind::extract_at: return {"features", "raster"};
    case OpKind::summarize_aw: return {"targets", "sources"};
    case OpKind::summarize_sedc: return {"targets", "sources"};
    default: return {"points", "features"};
  }
}

// Which of x/y is the anchor. Default: y; pad_y flips it; arg_map binds explicitly.
inline bool anchor_is_y(const TaskSpec& t) {
  if (t.arg_map.empty()) return !t.pad_y;
  const auto [anchor_arg, context_arg] = op_arguments(t.op);
  for (const auto& [k, v] : t.arg_map) {
    if (k != anchor_arg && k != context_arg)
      throw InvalidParameter(std::string("arg_map: ") + op_name(t.op) + " has no argument '" + k + "'");
    if (v != "x" && v != "y") throw InvalidParameter("arg_map values must be 'x' or 'y'");
  }
  auto a = t.arg_map.find(anchor_arg);
  auto c = t.arg_map.find(context_arg);
  if (a == t.arg_map.end() || c == t.arg_map.end() || a->second == c->second)
    throw InvalidParameter("arg_map must bind '" + anchor_arg + "' and '" + context_arg + "' to distinct roles");
  const bool y_anchor = a->second == "y";
  if (t.pad_y && y_anchor) throw InvalidParameter("pad_y pads y, but arg_map makes y the anchor");
  return y_anchor;
}

inline ResultTable merge_chunks(std::vector<ChunkResult> chunks);

namespace detail {

struct Bound {
  const FeatureSet* anchors = nullptr;
  const FeatureSet* context = nullptr;  // null for raster context
  const RasterRef* raster = nullptr;
};

inline Bound bind(const TaskSpec& t) {
  const bool y_anchor = anchor_is_y(t);
  const DatasetRef& a = y_anchor ? t.y : t.x;
  const DatasetRef& c = y_anchor ? t.x : t.y;
  Bound b;
  const auto* af = std::get_if<std::shared_ptr<const FeatureSet>>(&a);
  if (!af || !*af) throw InvalidInput(std::string("anchor dataset ") + (y_anchor ? "y" : "x") + " must be features");
  b.anchors = af->get();
  if (t.op == OpKind::extract_at) {
    b.raster = std::get_if<RasterRef>(&c);
    if (!b.raster || (b.raster->path.empty() && !b.raster->raster))
      throw InvalidInput("extract_at needs a raster as the context dataset");
  } else {
    const auto* cf = std::get_if<std::shared_ptr<const FeatureSet>>(&c);
    if (!cf || !*cf) throw InvalidInput(std::string(op_name(t.op)) + " needs features as the context dataset");
    b.context = cf->get();
  }
  return b;
}

inline ExtractParams extract_params(const TaskSpec& t) { return {t.radius, parse_stat(t.stat), kBufferSegments}; }

inline SedcParams sedc_params(const TaskSpec& t) { return {t.bandwidth, t.maxdist, t.value_columns}; }

// Parameter and geometry checks that apply to the whole run, done before any chunk starts.
inline void validate(const TaskSpec& t, const Bound& b) {
  switch (t.op) {
    case OpKind::extract_at: {
      const auto p = extract_params(t);
      check_extract_inputs(*b.anchors, p);
      const RasterKind kind = b.raster->raster ? b.raster->raster->kind : b.raster->kind;
      if (p.stat == StatKind::frequency && kind != RasterKind::categorical)
        throw InvalidParameter("frequency requires a categorical raster");
      break;
    }
    case OpKind::summarize_aw:
      parse_aw_stat(t.stat);
      if (!b.anchors->all_of_type<Polygon>() || !b.context->all_of_type<Polygon>())
        throw InvalidInput("summarize_aw requires polygon targets and sources");
      if (t.value_columns.empty()) throw InvalidParameter("summarize_aw needs at least one value column");
      for (const auto& f : b.context->features) {
        for (const auto& c : t.value_columns) numeric_attr(f, c);
      }
      break;
    case OpKind::summarize_sedc:
      check_sedc_params(sedc_params(t));
      if (!b.anchors->all_of_type<Point>() || !b.context->all_of_type<Point>())
        throw InvalidInput("summarize_sedc requires point targets and sources");
      for (const auto& f : b.context->features) {
        for (const auto& c : t.value_columns) numeric_attr(f, c);
      }
      break;
    case OpKind::nearest_distance:
      if (!b.anchors->all_of_type<Point>()) throw InvalidInput("nearest_distance requires point anchors");
      if (b.context->empty()) throw InvalidInput("nearest_distance needs at least one context feature");
      if (b.context->all_of_type<Polygon>() && !b.context->empty())
        throw UnsupportedGeometry("nearest_distance context must be points or lines");
      break;
  }
}

// Extent an anchor's result depends on; the chunk result is exact when this lies inside the context box.
inline BBox dependency_box(const TaskSpec& t, const Feature& f, const ResultTable& rows, std::size_t row) {
  const BBox b = bbox_of(f.geometry);
  switch (t.op) {
    case OpKind::extract_at: return b.expanded(t.radius);
    case OpKind::summarize_aw: return b;
    case OpKind::summarize_sedc: return b.expanded(sedc_params(t).cutoff());
    default: {
      const Value& d = rows.at(row, "distance");
      if (is_null(d)) return BBox{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                                  std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
      return b.expanded(std::get<double>(d));
    }
  }
}

struct ChunkPlan {
  std::int64_t chunk_id = 0;
  std::vector<std::size_t> anchors;  // indices into the anchor set, in output order
  std::optional<BBox> context_box;   // none: the whole context dataset
  std::vector<std::pair<std::string, Value>> tags;
  std::optional<RasterRef> raster_override;  // multi-raster runs
};

class RasterCache {
 public:
  explicit RasterCache(int workers) : per_worker_(static_cast<std::size_t>(workers)) {}

  std::shared_ptr<const Raster> get(const RasterRef& ref, int worker) {
    if (ref.raster) return ref.raster;
    auto& cache = per_worker_[static_cast<std::size_t>(worker)];
    auto it = cache.find(ref.path);
    if (it != cache.end()) return it->second;
    auto r = std::make_shared<Raster>(load_raster(ref.path, ref.kind));
    r->validate();
    cache.emplace(ref.path, r);
    return r;
  }

 private:
  std::vector<std::map<std::string, std::shared_ptr<const Raster>>> per_worker_;
};

inline ResultTable compute_chunk(const TaskSpec& t, const Bound& b, const ChunkPlan& plan, RasterCache& rasters,
                                 int worker, const std::vector<BBox>& context_boxes) {
  const FeatureSet anchors = b.anchors->subset(plan.anchors);
  ResultTable rows;
  if (t.op == OpKind::extract_at) {
    const RasterRef& ref = plan.raster_override ? *plan.raster_override : *b.raster;
    const auto raster = rasters.get(ref, worker);
    std::optional<CellWindow> window;
    if (plan.context_box) window = window_for_bbox(*raster, *plan.context_box);
    rows = extract_at(*raster, anchors, extract_params(t), window);
  } else {
    std::vector<std::size_t> ctx;
    for (std::size_t i = 0; i < b.context->size(); ++i) {
      if (!plan.context_box || plan.context_box->intersects(context_boxes[i])) ctx.push_back(i);
    }
    const FeatureSet context = b.context->subset(ctx);
    switch (t.op) {
      case OpKind::summarize_aw:
        rows = summarize_aw(anchors, context, t.value_columns, parse_aw_stat(t.stat));
        break;
      case OpKind::summarize_sedc: rows = summarize_sedc(anchors, context, sedc_params(t)); break;
      default: rows = nearest_rows(anchors, context); break;
    }
  }
  const std::size_t warn = rows.add_column({"pad_warning", false});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    ResultRow& row = rows.rows()[r];
    row.chunk_id = plan.chunk_id;
    const bool exact = !plan.context_box ||
                       plan.context_box->contains(dependency_box(t, anchors[r], rows, r));
    row.values[warn] = !exact;
  }
  return rows;
}

inline ResultTable run_plans(const TaskSpec& t, const Bound& b, const std::vector<ChunkPlan>& plans,
                             const RunConfig& cfg) {
  WorkerPool pool(cfg.workers);
  RasterCache rasters(cfg.workers);
  std::vector<BBox> context_boxes;
  if (b.context) {
    for (const auto& f : b.context->features) context_boxes.push_back(bbox_of(f.geometry));
  }
  std::vector<ChunkResult> results(plans.size());
  std::atomic<bool> stop{false};
  pool.run(plans.size(), [&](std::size_t k, int worker) {
    const ChunkPlan& plan = plans[k];
    ChunkResult& res = results[k];
    res.chunk_id = plan.chunk_id;
    res.tags = plan.tags;
    for (std::size_t i : plan.anchors) res.anchor_ids.push_back((*b.anchors)[i].id);
    if (stop.load()) {
      res.error = ChunkError{"not executed: an earlier chunk failed", plan.chunk_id};
      return;
    }
    try {
      if (cfg.chunk_hook) cfg.chunk_hook(plan.chunk_id);
      res.rows = compute_chunk(t, b, plan, rasters, worker, context_boxes);
    } catch (const std::exception& e) {
      res.error = ChunkError{e.what(), plan.chunk_id};
      if (cfg.fail_fast || !cfg.capture_errors) stop.store(true);
    } catch (...) {
      res.error = ChunkError{"unknown error", plan.chunk_id};
      if (cfg.fail_fast || !cfg.capture_errors) stop.store(true);
    }
  });
  if (!cfg.capture_errors) {
    for (const auto& r : results) {
      if (r.error && r.error->message.rfind("not executed", 0) != 0)
        throw Error("chunk " + std::to_string(r.chunk_id) + " failed: " + r.error->message);
    }
  }
  return merge_chunks(std::move(results));
}

}  // namespace detail

// Concatenates chunk results by chunk id (then within-chunk order). Failed
// chunks contribute one error row per anchor feature with null outputs.
inline ResultTable merge_chunks(std::vector<ChunkResult> chunks) {
  std::sort(chunks.begin(), chunks.end(),
            [](const ChunkResult& a, const ChunkResult& b) { return a.chunk_id < b.chunk_id; });
  for (std::size_t i = 1; i < chunks.size(); ++i) {
    if (chunks[i].chunk_id == chunks[i - 1].chunk_id)
      throw std::logic_error("duplicate chunk_id " + std::to_string(chunks[i].chunk_id) + " in merge");
  }
  std::vector<ResultTable> parts;
  parts.reserve(chunks.size());
  for (auto& c : chunks) {
    std::vector<Column> cols;
    for (const auto& [name, v] : c.tags) cols.push_back({name});
    ResultTable part(std::move(cols));
    if (c.error) {
      std::vector<std::string> ids = c.anchor_ids;
      if (ids.empty()) ids.emplace_back();
      for (const auto& id : ids) {
        ResultRow& row = part.add_row(id, c.chunk_id);
        for (std::size_t k = 0; k < c.tags.size(); ++k) row.values[k] = c.tags[k].second;
        row.error = c.error->message;
      }
    } else {
      for (const Column& col : c.rows.columns()) part.add_column(col);
      for (const ResultRow& r : c.rows.rows()) {
        ResultRow row{r.id, c.chunk_id, std::vector<Value>(part.columns().size()), r.error};
        for (std::size_t k = 0; k < c.tags.size(); ++k) row.values[k] = c.tags[k].second;
        for (std::size_t k = 0; k < r.values.size(); ++k) row.values[c.tags.size() + k] = r.values[k];
        part.append_row(std::move(row));
      }
    }
    parts.push_back(std::move(part));
  }
  std::vector<const ResultTable*> ptrs;
  for (const auto& p : parts) ptrs.push_back(&p);
  return ResultTable::concat(ptrs);
}

// Grid-partitioned run: anchors by chunk membership, context cut to padded boxes.
inline ResultTable run_grid(const TaskSpec& task, const PartitionSet& parts, const RunConfig& cfg) {
  const auto b = detail::bind(task);
  detail::validate(task, b);
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < b.anchors->size(); ++i) index.emplace((*b.anchors)[i].id, i);
  std::vector<bool> used(b.anchors->size(), false);
  std::vector<detail::ChunkPlan> plans;
  for (const auto& c : parts.chunks) {
    detail::ChunkPlan plan{c.chunk_id, {}, c.padded, {}, std::nullopt};
    for (const auto& id : c.member_ids) {
      auto it = index.find(id);
      if (it == index.end()) throw InvalidInput("partition member '" + id + "' is not an anchor feature");
      if (used[it->second]) throw InvalidInput("anchor '" + id + "' is assigned to more than one chunk");
      used[it->second] = true;
      plan.anchors.push_back(it->second);
    }
    plans.push_back(std::move(plan));
  }
  for (std::size_t i = 0; i < used.size(); ++i) {
    if (!used[i]) throw InvalidInput("anchor '" + (*b.anchors)[i].id + "' is not assigned to any chunk");
  }
  return detail::run_plans(task, b, plans, cfg);
}

// One chunk per group. Context is cut to the group's anchor extent grown by the
// task's interaction distance (radius, maxdist); nearest_distance sees all context.
inline ResultTable run_hierarchy(const TaskSpec& task, const std::vector<FeatureGroup>& groups, const RunConfig& cfg) {
  const auto b = detail::bind(task);
  detail::validate(task, b);
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < b.anchors->size(); ++i) index.emplace((*b.anchors)[i].id, i);
  std::vector<detail::ChunkPlan> plans;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    detail::ChunkPlan plan{static_cast<std::int64_t>(g), {}, std::nullopt, {{"group", groups[g].key}}, std::nullopt};
    std::optional<BBox> box;
    for (const auto& id : groups[g].member_ids) {
      auto it = index.find(id);
      if (it == index.end()) throw InvalidInput("group member '" + id + "' is not an anchor feature");
      plan.anchors.push_back(it->second);
      const BBox fb = bbox_of((*b.anchors)[it->second].geometry);
      box = box ? box->united(fb) : fb;
    }
    if (box) {
      switch (task.op) {
        case OpKind::extract_at: plan.context_box = box->expanded(task.radius); break;
        case OpKind::summarize_sedc: plan.context_box = box->expanded(detail::sedc_params(task).cutoff()); break;
        case OpKind::summarize_aw: plan.context_box = *box; break;
        case OpKind::nearest_distance: break;
      }
    }
    plans.push_back(std::move(plan));
  }
  return detail::run_plans(task, b, plans, cfg);
}

// extract_at of the full anchor set against each raster, one chunk per path.
inline ResultTable run_multirasters(const TaskSpec& task, const std::vector<std::string>& raster_paths,
                                    const RunConfig& cfg) {
  if (task.op != OpKind::extract_at) throw InvalidParameter("multi-raster runs support extract_at only");
  if (raster_paths.empty()) throw InvalidParameter("no raster paths given");
  TaskSpec t = task;
  const bool y_anchor = anchor_is_y(t);
  RasterRef base;
  if (const auto* r = std::get_if<RasterRef>(y_anchor ? &t.x : &t.y)) base = *r;
  base.raster.reset();
  base.path = raster_paths.front();
  (y_anchor ? t.x : t.y) = base;
  const auto b = detail::bind(t);
  detail::validate(t, b);
  std::vector<detail::ChunkPlan> plans;
  for (std::size_t k = 0; k < raster_paths.size(); ++k) {
    detail::ChunkPlan plan{static_cast<std::int64_t>(k), {}, std::nullopt, {{"raster", raster_paths[k]}}, base};
    plan.raster_override->path = raster_paths[k];
    plan.anchors.resize(b.anchors->size());
    std::iota(plan.anchors.begin(), plan.anchors.end(), 0);
    plans.push_back(std::move(plan));
  }
  return detail::run_plans(t, b, plans, cfg);
}

}  // namespace chop

#endif  // CHOP_EXECUTOR_HPP
