#pragma once
#ifndef CHOP_DATAIO_HPP
#define CHOP_DATAIO_HPP

// File formats: CSV point tables, a GeoJSON subset (Point, LineString,
// Polygon), ESRI ASCII grids, PartitionSet JSON and result CSV tables.
// Numbers are written with 17 significant digits so output bytes are stable.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "chop/error.hpp"
#include "chop/features.hpp"
#include "chop/format.hpp"
#include "chop/partition.hpp"
#include "chop/raster.hpp"
#include "chop/table.hpp"

namespace chop {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// CSV (RFC 4180)

struct CsvRecord {
  std::size_t line = 0;  // line where the record starts
  std::vector<std::string> fields;
};

inline std::vector<CsvRecord> parse_csv(std::string_view text, const std::string& path = "<csv>") {
  std::vector<CsvRecord> out;
  std::size_t line = 1;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    CsvRecord rec{line, {}};
    std::string field;
    bool quoted = false;
    bool field_started_quoted = false;
    for (;;) {
      if (i >= n) {
        if (quoted) throw LoadError(path, rec.line, "unterminated quoted field");
        rec.fields.push_back(std::move(field));
        break;
      }
      const char c = text[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < n && text[i + 1] == '"') {
            field += '"';
            i += 2;
          } else {
            quoted = false;
            ++i;
          }
        } else {
          if (c == '\n') ++line;
          field += c;
          ++i;
        }
        continue;
      }
      if (c == '"' && field.empty() && !field_started_quoted) {
        quoted = true;
        field_started_quoted = true;
        ++i;
      } else if (c == ',') {
        rec.fields.push_back(std::move(field));
        field.clear();
        field_started_quoted = false;
        ++i;
      } else if (c == '\r' || c == '\n') {
        rec.fields.push_back(std::move(field));
        if (c == '\r' && i + 1 < n && text[i + 1] == '\n') ++i;
        ++i;
        ++line;
        break;
      } else {
        field += c;
        ++i;
      }
    }
    if (rec.fields.size() == 1 && rec.fields[0].empty()) continue;  // blank line
    out.push_back(std::move(rec));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Features

enum class FeatureFormat { csv, geojson };

inline FeatureFormat format_from_path(const std::string& path) {
  auto ends_with = [&](std::string_view suf) {
    if (path.size() < suf.size()) return false;
    std::string tail = path.substr(path.size() - suf.size());
    std::transform(tail.begin(), tail.end(), tail.begin(), [](unsigned char c) { return std::tolower(c); });
    return tail == suf;
  };
  if (ends_with(".geojson") || ends_with(".json")) return FeatureFormat::geojson;
  return FeatureFormat::csv;
}

inline FeatureFormat parse_feature_format(const std::string& s) {
  if (s == "csv") return FeatureFormat::csv;
  if (s == "geojson") return FeatureFormat::geojson;
  throw InvalidParameter("unknown feature format '" + s + "'");
}

inline AttrValue parse_attr(const std::string& s) {
  if (auto d = parse_lossless_number(s)) return *d;
  return s;
}

inline FeatureSet load_features_csv(const std::string& path, const std::string& id_column,
                                    const std::string& x_column = "x", const std::string& y_column = "y") {
  const auto records = parse_csv(read_file(path), path);
  if (records.empty()) throw LoadError(path, 1, "missing header row");
  const auto& header = records.front().fields;
  auto find = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw LoadError(path, 1, "column '" + name + "' not found");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t id_i = find(id_column);
  const std::size_t x_i = find(x_column);
  const std::size_t y_i = find(y_column);

  FeatureSet fs;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != id_i && c != x_i && c != y_i) fs.columns.push_back(header[c]);
  }
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != header.size())
      throw LoadError(path, rec.line,
                      "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(rec.fields.size()));
    const std::string& id = rec.fields[id_i];
    if (id.empty()) throw LoadError(path, rec.line, "missing id");
    if (!seen.emplace(id, rec.line).second) throw LoadError(path, rec.line, "duplicate id '" + id + "'");
    auto x = parse_double(rec.fields[x_i]);
    auto y = parse_double(rec.fields[y_i]);
    if (!x || !y || !std::isfinite(*x) || !std::isfinite(*y))
      throw LoadError(path, rec.line, "invalid coordinate for id '" + id + "'");
    Feature f{id, Point{*x, *y}, {}};
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c != id_i && c != x_i && c != y_i) f.attributes.emplace(header[c], parse_attr(rec.fields[c]));
    }
    fs.features.push_back(std::move(f));
  }
  return fs;
}

namespace detail {

inline Point json_point(const nlohmann::json& c, const std::string& where) {
  if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number())
    throw InvalidInput(where + ": coordinate must be [x, y]");
  return {c[0].get<double>(), c[1].get<double>()};
}

inline std::vector<Point> json_points(const nlohmann::json& a, const std::string& where) {
  if (!a.is_array()) throw InvalidInput(where + ": expected an array of coordinates");
  std::vector<Point> pts;
  for (std::size_t i = 0; i < a.size(); ++i) pts.push_back(json_point(a[i], where + "/" + std::to_string(i)));
  return pts;
}

inline Geometry json_geometry(const nlohmann::json& g, const std::string& where) {
  if (!g.is_object() || !g.contains("type")) throw InvalidInput(where + ": geometry has no type");
  const std::string type = g["type"].get<std::string>();
  if (type == "GeometryCollection" || type.rfind("Multi", 0) == 0)
    throw UnsupportedGeometry(where + ": unsupported geometry type " + type);
  if (!g.contains("coordinates")) throw InvalidInput(where + ": geometry has no coordinates");
  const auto& c = g["coordinates"];
  if (type == "Point") {
    const Point p = json_point(c, where + "/coordinates");
    if (!finite(p)) throw InvalidInput(where + ": non-finite coordinate");
    return p;
  }
  if (type == "LineString") return make_polyline(json_points(c, where + "/coordinates"));
  if (type == "Polygon") {
    if (!c.is_array() || c.empty()) throw InvalidInput(where + ": polygon has no rings");
    Ring outer = make_ring(json_points(c[0], where + "/coordinates/0"));
    std::vector<Ring> holes;
    for (std::size_t i = 1; i < c.size(); ++i)
      holes.push_back(make_ring(json_points(c[i], where + "/coordinates/" + std::to_string(i))));
    return make_polygon(std::move(outer), std::move(holes));
  }
  throw UnsupportedGeometry(where + ": unsupported geometry type " + type);
}

inline nlohmann::json coords_json(const std::vector<Point>& pts, bool close) {
  nlohmann::json a = nlohmann::json::array();
  for (const Point& p : pts) a.push_back({p.x, p.y});
  if (close && !pts.empty()) a.push_back({pts.front().x, pts.front().y});
  return a;
}

}  // namespace detail

inline FeatureSet parse_features_geojson(const std::string& text, const std::string& id_column,
                                         const std::string& path = "<geojson>") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw LoadError(path, 0, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
      !doc["features"].is_array())
    throw LoadError(path, 0, "expected a FeatureCollection");
  FeatureSet fs;
  std::unordered_map<std::string, std::size_t> seen;
  const auto& feats = doc["features"];
  for (std::size_t i = 0; i < feats.size(); ++i) {
    const std::string where = "/features/" + std::to_string(i);
    const auto& jf = feats[i];
    try {
      const auto& props = jf.contains("properties") && jf["properties"].is_object() ? jf["properties"]
                                                                                     : nlohmann::json::object();
      nlohmann::json idv;
      if (props.contains(id_column)) {
        idv = props[id_column];
      } else if (id_column == "id" && jf.contains("id")) {
        idv = jf["id"];
      } else {
        throw InvalidInput(where + ": missing id property '" + id_column + "'");
      }
      std::string id = idv.is_string() ? idv.get<std::string>() : idv.is_number() ? format_double(idv.get<double>())
                                                                                   : std::string();
      if (id.empty()) throw InvalidInput(where + ": empty id");
      if (!seen.emplace(id, i).second) throw InvalidInput(where + ": duplicate id '" + id + "'");
      Feature f{id, detail::json_geometry(jf.value("geometry", nlohmann::json()), where + "/geometry"), {}};
      for (const auto& [k, v] : props.items()) {
        if (k == id_column) continue;
        if (v.is_number()) {
          f.attributes.emplace(k, v.get<double>());
        } else if (v.is_string()) {
          f.attributes.emplace(k, v.get<std::string>());
        } else if (v.is_boolean()) {
          f.attributes.emplace(k, std::string(v.get<bool>() ? "true" : "false"));
        } else if (v.is_null()) {
          continue;
        } else {
          f.attributes.emplace(k, v.dump());
        }
        if (std::find(fs.columns.begin(), fs.columns.end(), k) == fs.columns.end()) fs.columns.push_back(k);
      }
      if (!fs.features.empty() && fs.features.front().geometry.index() != f.geometry.index())
        throw InvalidInput(where + ": geometry type differs from the first feature");
      fs.features.push_back(std::move(f));
    } catch (const LoadError&) {
      throw;
    } catch (const Error& e) {
      throw LoadError(path, 0, e.what());
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(path, 0, where + ": " + e.what());
    }
  }
  return fs;
}

inline FeatureSet load_features(const std::string& path, FeatureFormat format, const std::string& id_column,
                                const std::string& x_column = "x", const std::string& y_column = "y") {
  if (format == FeatureFormat::csv) return load_features_csv(path, id_column, x_column, y_column);
  return parse_features_geojson(read_file(path), id_column, path);
}

inline FeatureSet load_features(const std::string& path, const std::string& id_column,
                                const std::string& x_column = "x", const std::string& y_column = "y") {
  return load_features(path, format_from_path(path), id_column, x_column, y_column);
}

// Point features as `id_column,x,y,<attributes...>`.
inline std::string features_to_csv(const FeatureSet& fs, const std::string& id_column = "id") {
  if (!fs.all_of_type<Point>()) throw InvalidInput("CSV output holds point features only");
  std::string s = csv_escape(id_column) + ",x,y";
  for (const auto& c : fs.columns) s += "," + csv_escape(c);
  s += '\n';
  for (const auto& f : fs.features) {
    const Point& p = std::get<Point>(f.geometry);
    s += csv_escape(f.id) + "," + format_double(p.x) + "," + format_double(p.y);
    for (const auto& c : fs.columns) {
      s += ',';
      auto it = f.attributes.find(c);
      if (it != f.attributes.end()) s += csv_escape(attr_to_string(it->second));
    }
    s += '\n';
  }
  return s;
}

inline std::string features_to_geojson(const FeatureSet& fs, const std::string& id_column = "id") {
  nlohmann::ordered_json doc;
  doc["type"] = "FeatureCollection";
  doc["features"] = nlohmann::ordered_json::array();
  for (const auto& f : fs.features) {
    nlohmann::ordered_json jf;
    jf["type"] = "Feature";
    nlohmann::ordered_json props;
    props[id_column] = f.id;
    for (const auto& c : fs.columns) {
      auto it = f.attributes.find(c);
      if (it == f.attributes.end()) continue;
      if (const auto* d = std::get_if<double>(&it->second)) {
        props[c] = *d;
      } else {
        props[c] = std::get<std::string>(it->second);
      }
    }
    jf["properties"] = props;
    nlohmann::ordered_json g;
    if (const auto* p = std::get_if<Point>(&f.geometry)) {
      g["type"] = "Point";
      g["coordinates"] = {p->x, p->y};
    } else if (const auto* l = std::get_if<Polyline>(&f.geometry)) {
      g["type"] = "LineString";
      g["coordinates"] = detail::coords_json(l->vertices, false);
    } else {
      const auto& poly = std::get<Polygon>(f.geometry);
      g["type"] = "Polygon";
      nlohmann::json rings = nlohmann::json::array();
      rings.push_back(detail::coords_json(poly.outer.vertices, true));
      for (const auto& h : poly.holes) rings.push_back(detail::coords_json(h.vertices, true));
      g["coordinates"] = rings;
    }
    jf["geometry"] = g;
    doc["features"].push_back(jf);
  }
  return doc.dump() + "\n";
}

inline void save_features(const FeatureSet& fs, const std::string& path, const std::string& id_column = "id") {
  write_file(path, format_from_path(path) == FeatureFormat::csv ? features_to_csv(fs, id_column)
                                                                 : features_to_geojson(fs, id_column));
}

// ---------------------------------------------------------------------------
// Result tables

inline void save_table(const ResultTable& t, const std::string& path) { write_file(path, t.to_csv()); }

// ---------------------------------------------------------------------------
// ESRI ASCII grid

inline Raster parse_ascii_grid(const std::string& text, const std::string& path = "<grid>",
                               RasterKind kind = RasterKind::continuous) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  Raster r;
  r.kind = kind;
  bool have[6] = {false, false, false, false, false, false};
  bool x_center = false;
  bool y_center = false;
  auto lower = [](std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
  };

  // Header: `key value` lines until the first line starting with a number.
  std::streampos data_start = in.tellg();
  std::size_t data_line = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    if (parse_double(key)) {
      data_line = lineno;
      break;
    }
    std::string val;
    std::string extra;
    if (!(ls >> val) || (ls >> extra)) throw LoadError(path, lineno, "malformed header line");
    const std::string k = lower(key);
    auto num = parse_double(val);
    if (!num) throw LoadError(path, lineno, "header value '" + val + "' is not a number");
    if (k == "ncols" || k == "nrows") {
      if (*num != std::floor(*num) || *num < 1 || *num > 1e9) throw LoadError(path, lineno, k + " must be a positive integer");
      (k == "ncols" ? r.ncols : r.nrows) = static_cast<int>(*num);
      have[k == "ncols" ? 0 : 1] = true;
    } else if (k == "xllcorner" || k == "xllcenter") {
      r.xll = *num;
      x_center = k == "xllcenter";
      have[2] = true;
    } else if (k == "yllcorner" || k == "yllcenter") {
      r.yll = *num;
      y_center = k == "yllcenter";
      have[3] = true;
    } else if (k == "cellsize") {
      r.cellsize = *num;
      have[4] = true;
    } else if (k == "nodata_value") {
      r.nodata = *num;
      have[5] = true;
    } else if (k == "dx" || k == "dy") {
      throw LoadError(path, lineno, "rectangular cells are not supported");
    } else {
      throw LoadError(path, lineno, "unknown header key '" + key + "'");
    }
    data_start = in.tellg();
  }
  static const char* names[] = {"ncols", "nrows", "xllcorner", "yllcorner", "cellsize"};
  for (int i = 0; i < 5; ++i) {
    if (!have[i]) throw LoadError(path, lineno, std::string("missing header key ") + names[i]);
  }
  if (!(r.cellsize > 0)) throw LoadError(path, lineno, "cellsize must be > 0");
  if (x_center) r.xll -= r.cellsize / 2;
  if (y_center) r.yll -= r.cellsize / 2;

  // Data: one line per raster row, top to bottom.
  in.clear();
  in.seekg(data_start);
  lineno = data_line ? data_line - 1 : lineno;
  r.values.reserve(static_cast<std::size_t>(r.ncols) * static_cast<std::size_t>(r.nrows));
  int rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const char* p = line.data();
    const char* end = p + line.size();
    int count = 0;
    while (p < end) {
      while (p < end && std::isspace(static_cast<unsigned char>(*p))) ++p;
      if (p >= end) break;
      const char* tok = p;
      while (p < end && !std::isspace(static_cast<unsigned char>(*p))) ++p;
      auto v = parse_double(std::string_view(tok, static_cast<std::size_t>(p - tok)));
      if (!v) throw LoadError(path, lineno, "invalid cell value '" + std::string(tok, p) + "'");
      if (rows < r.nrows) r.values.push_back(*v);
      ++count;
    }
    if (count == 0) continue;
    if (count != r.ncols)
      throw LoadError(path, lineno, "expected " + std::to_string(r.ncols) + " values, got " + std::to_string(count));
    if (++rows > r.nrows) throw LoadError(path, lineno, "more data rows than nrows");
  }
  if (rows != r.nrows)
    throw LoadError(path, lineno, "expected " + std::to_string(r.nrows) + " data rows, got " + std::to_string(rows));
  return r;
}

inline Raster load_raster(const std::string& path, RasterKind kind = RasterKind::continuous) {
  return parse_ascii_grid(read_file(path), path, kind);
}

inline std::string raster_to_ascii_grid(const Raster& r) {
  std::string s;
  s += "ncols " + std::to_string(r.ncols) + "\n";
  s += "nrows " + std::to_string(r.nrows) + "\n";
  s += "xllcorner " + format_double(r.xll) + "\n";
  s += "yllcorner " + format_double(r.yll) + "\n";
  s += "cellsize " + format_double(r.cellsize) + "\n";
  s += "nodata_value " + format_double(r.nodata) + "\n";
  const std::string nodata = format_double(r.nodata);
  for (int row = 0; row < r.nrows; ++row) {
    for (int col = 0; col < r.ncols; ++col) {
      if (col) s += ' ';
      const double v = r.at(row, col);
      s += r.is_nodata(v) ? nodata : format_double(v);
    }
    s += '\n';
  }
  return s;
}

inline void write_raster(const Raster& r, const std::string& path) { write_file(path, raster_to_ascii_grid(r)); }

// ---------------------------------------------------------------------------
// PartitionSet JSON

inline std::string partitions_to_json(const PartitionSet& ps) {
  auto box = [](const BBox& b) { return nlohmann::ordered_json::array({b.xmin, b.ymin, b.xmax, b.ymax}); };
  std::vector<const Chunk*> order;
  for (const auto& c : ps.chunks) order.push_back(&c);
  std::stable_sort(order.begin(), order.end(), [](const Chunk* a, const Chunk* b) { return a->chunk_id < b->chunk_id; });
  nlohmann::ordered_json doc;
  doc["mode"] = mode_name(ps.mode);
  doc["padding"] = ps.padding;
  doc["chunks"] = nlohmann::ordered_json::array();
  for (const Chunk* c : order) {
    nlohmann::ordered_json jc;
    jc["chunk_id"] = c->chunk_id;
    jc["core"] = box(c->core);
    jc["padded"] = box(c->padded);
    jc["member_ids"] = c->member_ids;
    doc["chunks"].push_back(jc);
  }
  return doc.dump(1) + "\n";
}

inline void save_partitions(const PartitionSet& ps, const std::string& path) {
  write_file(path, partitions_to_json(ps));
}

inline PartitionSet parse_partitions(const std::string& text, const std::string& path = "<partitions>") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw LoadError(path, 0, std::string("invalid JSON: ") + e.what());
  }
  auto fail = [&](const std::string& where, const std::string& what) { throw LoadError(path, 0, where + ": " + what); };
  if (!doc.is_object()) fail("/", "expected an object");
  for (const auto& [k, v] : doc.items()) {
    if (k != "mode" && k != "padding" && k != "chunks") fail("/" + k, "unknown key");
  }
  PartitionSet ps;
  if (!doc.contains("mode") || !doc["mode"].is_string()) fail("/mode", "expected a string");
  try {
    ps.mode = parse_mode(doc["mode"].get<std::string>());
  } catch (const Error& e) {
    fail("/mode", e.what());
  }
  if (!doc.contains("padding") || !doc["padding"].is_number()) fail("/padding", "expected a number");
  ps.padding = doc["padding"].get<double>();
  if (!(ps.padding >= 0)) fail("/padding", "must be >= 0");
  if (!doc.contains("chunks") || !doc["chunks"].is_array()) fail("/chunks", "expected an array");
  const auto& chunks = doc["chunks"];
  auto read_box = [&](const nlohmann::json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 4) fail(where, "expected [xmin, ymin, xmax, ymax]");
    for (std::size_t i = 0; i < 4; ++i) {
      if (!j[i].is_number()) fail(where + "/" + std::to_string(i), "expected a number");
    }
    BBox b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
    if (!b.valid()) fail(where, "invalid box");
    return b;
  };
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const std::string where = "/chunks/" + std::to_string(i);
    const auto& jc = chunks[i];
    if (!jc.is_object()) fail(where, "expected an object");
    for (const auto& [k, v] : jc.items()) {
      if (k != "chunk_id" && k != "core" && k != "padded" && k != "member_ids") fail(where + "/" + k, "unknown key");
    }
    Chunk c;
    if (!jc.contains("chunk_id") || !jc["chunk_id"].is_number_integer()) fail(where + "/chunk_id", "expected an integer");
    c.chunk_id = jc["chunk_id"].get<std::int64_t>();
    if (c.chunk_id != static_cast<std::int64_t>(i)) fail(where + "/chunk_id", "chunk ids must be dense and ordered");
    if (!jc.contains("core")) fail(where + "/core", "missing");
    if (!jc.contains("padded")) fail(where + "/padded", "missing");
    c.core = read_box(jc["core"], where + "/core");
    c.padded = read_box(jc["padded"], where + "/padded");
    if (!c.padded.contains(c.core)) fail(where + "/padded", "padded box does not contain the core box");
    if (jc.contains("member_ids")) {
      const auto& m = jc["member_ids"];
      if (!m.is_array()) fail(where + "/member_ids", "expected an array");
      for (std::size_t k = 0; k < m.size(); ++k) {
        if (!m[k].is_string()) fail(where + "/member_ids/" + std::to_string(k), "expected a string");
        c.member_ids.push_back(m[k].get<std::string>());
      }
    }
    ps.chunks.push_back(std::move(c));
  }
  return ps;
}

inline PartitionSet load_partitions(const std::string& path) { return parse_partitions(read_file(path), path); }

}  // namespace chop

#endif  // CHOP_DATAIO_HPP
