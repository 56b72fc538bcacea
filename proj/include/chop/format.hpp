#pragma once
#ifndef CHOP_FORMAT_HPP
#define CHOP_FORMAT_HPP

#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace chop {

// 17 significant digits: every double survives a text round trip.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Full-string parse; nullopt on trailing junk, empty input or overflow.
inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Attribute text is treated as a number only when nothing is lost by doing so:
// no surrounding blanks, no explicit '+', no leading zeros (codes like "037001" stay text).
inline std::optional<double> parse_lossless_number(std::string_view s) {
  if (s.empty() || s.front() == '+' || s.front() == ' ' || s.back() == ' ') return std::nullopt;
  std::string_view digits = s.front() == '-' ? s.substr(1) : s;
  if (digits.size() > 1 && digits[0] == '0' && digits[1] >= '0' && digits[1] <= '9') return std::nullopt;
  auto v = parse_double(s);
  if (!v || !std::isfinite(*v)) return std::nullopt;
  return v;
}

}  // namespace chop

#endif  // CHOP_FORMAT_HPP
