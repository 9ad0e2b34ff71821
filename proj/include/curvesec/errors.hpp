#pragma once

#include <stdexcept>
#include <string>

namespace curvesec {

/// Argument outside the unit domain, or an index out of range.
class domain_error : public std::invalid_argument {
 public:
  explicit domain_error(const std::string& what) : std::invalid_argument(what) {}
};

/// Input data failed a structural or admissibility check.
class validation_error : public std::runtime_error {
 public:
  explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative scheme hit its budget before reaching tolerance.
class convergence_error : public std::runtime_error {
 public:
  explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed configuration input.
class parse_error : public std::runtime_error {
 public:
  explicit parse_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace curvesec
