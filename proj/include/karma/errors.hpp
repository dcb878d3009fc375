#pragma once

#include <stdexcept>
#include <string>

namespace karma {

// Error taxonomy mirrored by CLI exit codes (validation=2, convergence=3, io=4).
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConvergenceError : std::runtime_error {
  double residual;
  ConvergenceError(const std::string& msg, double res)
      : std::runtime_error(msg), residual(res) {}
};

struct FeasibilityError : std::runtime_error {
  explicit FeasibilityError(const std::string& msg) : std::runtime_error(msg) {}
};

struct AssumptionError : std::runtime_error {
  explicit AssumptionError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ResourceError : std::runtime_error {
  explicit ResourceError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace karma
