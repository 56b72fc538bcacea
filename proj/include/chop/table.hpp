#pragma once
#ifndef CHOP_TABLE_HPP
#define CHOP_TABLE_HPP

// Result rows produced by every operation and merged by the executor.
//
// Layout on disk is `id,chunk_id,<columns...>,error`. Columns come in two
// groups: fixed columns in first-seen order, then keyed columns (one per
// category for frequency tables) sorted by their numeric key. A row that
// lacks a column takes the column's fill value, unless it is an error row,
// in which case every output is null.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "chop/format.hpp"

namespace chop {

using Value = std::variant<std::monostate, double, std::int64_t, bool, std::string>;

inline bool is_null(const Value& v) { return std::holds_alternative<std::monostate>(v); }

inline std::string value_to_string(const Value& v) {
  struct {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(double d) const { return format_double(d); }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const std::string& s) const { return s; }
  } visitor;
  return std::visit(visitor, v);
}

struct Column {
  std::string name;
  Value fill{};
  std::optional<double> key{};

  friend bool operator==(const Column&, const Column&) = default;
};

struct ResultRow {
  std::string id;
  std::int64_t chunk_id = 0;
  std::vector<Value> values;
  std::optional<std::string> error{};

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

inline std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

class ResultTable {
 public:
  ResultTable() = default;
  explicit ResultTable(std::vector<Column> columns) : columns_(std::move(columns)) {}

  const std::vector<Column>& columns() const { return columns_; }
  const std::vector<ResultRow>& rows() const { return rows_; }
  std::vector<ResultRow>& rows() { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  std::optional<std::size_t> column_index(std::string_view name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (columns_[i].name == name) return i;
    }
    return std::nullopt;
  }

  // Adds the column if absent; returns its index.
  std::size_t add_column(Column c) {
    if (auto i = column_index(c.name)) return *i;
    columns_.push_back(std::move(c));
    for (auto& r : rows_) r.values.resize(columns_.size(), r.error ? Value{} : columns_.back().fill);
    return columns_.size() - 1;
  }

  ResultRow& add_row(std::string id, std::int64_t chunk_id = 0) {
    ResultRow r{std::move(id), chunk_id, {}, std::nullopt};
    r.values.reserve(columns_.size());
    for (const Column& c : columns_) r.values.push_back(c.fill);
    rows_.push_back(std::move(r));
    return rows_.back();
  }

  void append_row(ResultRow r) {
    r.values.resize(columns_.size());
    rows_.push_back(std::move(r));
  }

  const Value& at(std::size_t row, std::string_view column) const {
    static const Value null_value{};
    auto i = column_index(column);
    if (!i || *i >= rows_[row].values.size()) return null_value;
    return rows_[row].values[*i];
  }

  bool has_errors() const {
    return std::any_of(rows_.begin(), rows_.end(), [](const ResultRow& r) { return r.error.has_value(); });
  }

  // Concatenates tables in the given order, unifying their columns.
  static ResultTable concat(const std::vector<const ResultTable*>& parts) {
    std::vector<Column> fixed;
    std::vector<Column> keyed;
    auto seen = [](const std::vector<Column>& cs, const std::string& n) {
      return std::any_of(cs.begin(), cs.end(), [&](const Column& c) { return c.name == n; });
    };
    for (const ResultTable* t : parts) {
      for (const Column& c : t->columns_) {
        auto& group = c.key ? keyed : fixed;
        if (!seen(group, c.name)) group.push_back(c);
      }
    }
    std::stable_sort(keyed.begin(), keyed.end(), [](const Column& a, const Column& b) { return *a.key < *b.key; });
    fixed.insert(fixed.end(), keyed.begin(), keyed.end());

    ResultTable out(std::move(fixed));
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < out.columns_.size(); ++i) index.emplace(out.columns_[i].name, i);
    for (const ResultTable* t : parts) {
      std::vector<std::size_t> map;
      map.reserve(t->columns_.size());
      for (const Column& c : t->columns_) map.push_back(index.at(c.name));
      for (const ResultRow& r : t->rows_) {
        ResultRow nr{r.id, r.chunk_id, {}, r.error};
        nr.values.reserve(out.columns_.size());
        for (const Column& c : out.columns_) nr.values.push_back(r.error ? Value{} : c.fill);
        for (std::size_t k = 0; k < r.values.size() && k < map.size(); ++k) {
          if (!r.error || !is_null(r.values[k])) nr.values[map[k]] = r.values[k];
        }
        out.rows_.push_back(std::move(nr));
      }
    }
    return out;
  }

  // Re-sorts columns into canonical order (fixed first, keyed by key).
  ResultTable canonical() const { return concat({this}); }

  std::string to_csv() const {
    std::string s = "id,chunk_id";
    for (const Column& c : columns_) s += "," + csv_escape(c.name);
    s += ",error\n";
    for (const ResultRow& r : rows_) {
      s += csv_escape(r.id);
      s += ',';
      s += std::to_string(r.chunk_id);
      for (std::size_t i = 0; i < columns_.size(); ++i) {
        s += ',';
        if (i < r.values.size()) s += csv_escape(value_to_string(r.values[i]));
      }
      s += ',';
      if (r.error) s += csv_escape(*r.error);
      s += '\n';
    }
    return s;
  }

 private:
  std::vector<Column> columns_;
  std::vector<ResultRow> rows_;
};

}  // namespace chop

#endif  // CHOP_TABLE_HPP
