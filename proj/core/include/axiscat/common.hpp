#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace axiscat {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Thrown when a scene/config file fails validation (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown on violated numerical preconditions or internal failures.
class SolverError : public std::runtime_error {
public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace axiscat
