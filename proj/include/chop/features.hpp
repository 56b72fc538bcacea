#pragma once
#ifndef CHOP_FEATURES_HPP
#define CHOP_FEATURES_HPP

#include <cstddef>
#include <map>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include "chop/error.hpp"
#include "chop/format.hpp"
#include "chop/geom.hpp"

namespace chop {

using AttrValue = std::variant<std::string, double>;

inline std::string attr_to_string(const AttrValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return format_double(*d);
  return std::get<std::string>(v);
}

struct Feature {
  std::string id;
  Geometry geometry;
  std::map<std::string, AttrValue> attributes;

  friend bool operator==(const Feature&, const Feature&) = default;
};

// Features in input order. Ids are unique and non-empty; all geometries share one type.
struct FeatureSet {
  std::vector<Feature> features;
  std::vector<std::string> columns;

  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;

  std::size_t size() const { return features.size(); }
  bool empty() const { return features.empty(); }
  const Feature& operator[](std::size_t i) const { return features[i]; }

  bool has_column(const std::string& c) const {
    for (const auto& k : columns) {
      if (k == c) return true;
    }
    return false;
  }

  template <class G>
  bool all_of_type() const {
    for (const auto& f : features) {
      if (!std::holds_alternative<G>(f.geometry)) return false;
    }
    return true;
  }

  void validate() const {
    std::unordered_set<std::string> seen;
    std::size_t kind = features.empty() ? 0 : features.front().geometry.index();
    for (std::size_t i = 0; i < features.size(); ++i) {
      const Feature& f = features[i];
      if (f.id.empty()) throw InvalidInput("feature " + std::to_string(i) + " has an empty id");
      if (!seen.insert(f.id).second) throw InvalidInput("duplicate feature id '" + f.id + "'");
      if (f.geometry.index() != kind) throw InvalidInput("feature '" + f.id + "' mixes geometry types");
    }
  }

  // Copy of the features at `indices`, in the order given.
  FeatureSet subset(const std::vector<std::size_t>& indices) const {
    FeatureSet out;
    out.columns = columns;
    out.features.reserve(indices.size());
    for (std::size_t i : indices) out.features.push_back(features[i]);
    return out;
  }
};

// Extent covering every feature.
inline BBox extent_of(const FeatureSet& fs) {
  if (fs.empty()) throw InvalidInput("empty feature set has no extent");
  BBox b = bbox_of(fs.features.front().geometry);
  for (const auto& f : fs.features) b = b.united(bbox_of(f.geometry));
  return b;
}

inline std::vector<Point> representative_points(const FeatureSet& fs) {
  std::vector<Point> pts;
  pts.reserve(fs.size());
  for (const auto& f : fs.features) pts.push_back(representative_point(f.geometry));
  return pts;
}

// Numeric attribute or InvalidInput naming the feature.
inline double numeric_attr(const Feature& f, const std::string& column) {
  auto it = f.attributes.find(column);
  if (it == f.attributes.end()) throw InvalidInput("feature '" + f.id + "' has no value for column '" + column + "'");
  if (const auto* d = std::get_if<double>(&it->second)) return *d;
  throw InvalidInput("feature '" + f.id + "' column '" + column + "' is not numeric");
}

}  // namespace chop

#endif  // CHOP_FEATURES_HPP
