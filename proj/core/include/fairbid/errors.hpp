#pragma once

#include <stdexcept>
#include <string>

namespace fairbid {

/// Argument outside the mathematical domain of an operation.
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical procedure failed to converge or produced a degenerate result.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// A distribution fails the strict-regularity requirement.
struct RegularityError : std::runtime_error {
  explicit RegularityError(const std::string& what) : std::runtime_error(what) {}
};

/// Shapes or required fields of a problem instance are inconsistent.
struct StructuralError : std::runtime_error {
  explicit StructuralError(const std::string& what) : std::runtime_error(what) {}
};

/// The constraint polytope is empty.
struct InfeasibleError : std::runtime_error {
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

/// Bad or unreadable configuration / input files.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fairbid
