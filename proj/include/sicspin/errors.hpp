#pragma once

#include <stdexcept>
#include <string>

namespace sicspin {

// Invariant or precondition violation on user-supplied values (parameters,
// config keys, trace files, CLI arguments).
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Filesystem failure: missing input, unwritable output.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// J^T J singular at the fit solution; carries a human-readable description
// of the flat parameter directions.
class DegenerateFitError : public std::runtime_error {
 public:
  explicit DegenerateFitError(const std::string& what) : std::runtime_error(what) {}
};

// An initial-guess heuristic could not extract features from the data
// (too short, flat, ...). The caller may supply a manual guess instead.
class HeuristicError : public std::runtime_error {
 public:
  explicit HeuristicError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sicspin
