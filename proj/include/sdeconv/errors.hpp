#pragma once

#include <stdexcept>
#include <string>

namespace sdeconv {

// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Requested allocation exceeds the configured memory cap.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Value outside the range of an invertible map.
struct RangeError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct QuadratureError : std::runtime_error {
  QuadratureError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_error(achieved) {}
  double achieved_error;
};

struct DegenerateFitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Path simulation produced a non-finite state.
struct NonFiniteError : std::runtime_error {
  NonFiniteError(const std::string& what, std::size_t path_index)
      : std::runtime_error(what), path(path_index) {}
  std::size_t path;
};

// Config validation failure; `field` is a dotted path such as "estimators.theta[2]".
struct ConfigError : std::runtime_error {
  ConfigError(std::string field_path, const std::string& message)
      : std::runtime_error(field_path + ": " + message), field(std::move(field_path)) {}
  std::string field;
};

}  // namespace sdeconv
