#pragma once

#include <stdexcept>
#include <string>

namespace predictive {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters, unnormalized measures, mismatched sample spaces.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation (e.g. n = 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Operation not defined for the sample space at hand.
class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

/// Conditioning on an event of predictive probability zero.
class ConditioningOnNull : public Error {
 public:
  using Error::Error;
};

/// A rule update failed while folding a sequence; carries the step index.
class StepError : public Error {
 public:
  StepError(std::size_t step, const std::string& what)
      : Error("step " + std::to_string(step) + ": " + what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace predictive
