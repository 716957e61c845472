#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cornermass {

/// Argument outside a profile or patch domain, or an ill-posed construction.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Base for failures of a numerical kernel.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivergedError : public NumericalError {
 public:
  DivergedError(const std::string& what, double last_good)
      : NumericalError(what), last_good_(last_good) {}
  double last_good() const { return last_good_; }

 private:
  double last_good_;
};

class UnconvergedError : public NumericalError {
 public:
  UnconvergedError(const std::string& what, double residual,
                   std::vector<double> history = {})
      : NumericalError(what), residual_(residual), history_(std::move(history)) {}
  double residual() const { return residual_; }
  const std::vector<double>& history() const { return history_; }

 private:
  double residual_;
  std::vector<double> history_;
};

class BracketError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A theorem hypothesis the caller asked us to rely on does not hold.
class HypothesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cornermass
