#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace pfews {

/// Argument outside the mathematical domain of an operation (no fold, zero
/// rate, empty input).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Invalid configuration value. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite or runaway state during integration.
class DivergenceError : public std::runtime_error {
public:
  DivergenceError(std::size_t step, std::optional<std::size_t> run = std::nullopt);

  std::size_t step() const noexcept { return step_; }
  std::optional<std::size_t> run() const noexcept { return run_; }

private:
  std::size_t step_;
  std::optional<std::size_t> run_;
};

/// Iterative procedure did not meet its tolerance within budget.
class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Zero-variance column, rank-0 covariance and similar.
class DegeneracyError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A class has too few members for the requested stratified split, or a
/// training set lacks one of the two classes.
class StratificationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace pfews
