#pragma once
#ifndef CHOP_ERROR_HPP
#define CHOP_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chop {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad argument values (non-positive radius, nx = 0, ...).
struct InvalidParameter : Error {
  using Error::Error;
};

// Inputs of the wrong kind or shape (non-point geometry for a point-only operation, missing column).
struct InvalidInput : Error {
  using Error::Error;
};

struct UnsupportedGeometry : InvalidInput {
  using InvalidInput::InvalidInput;
};

// Malformed file content. `line` is 1-based; 0 when the format has no line notion (JSON).
struct LoadError : Error {
  LoadError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + (line ? ":" + std::to_string(line) : std::string()) + ": " + what), line(line) {}
  std::size_t line;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace chop

#endif  // CHOP_ERROR_HPP
