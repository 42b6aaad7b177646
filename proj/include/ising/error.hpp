#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ising {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A builder or operation received parameters that violate a stated constraint.
/// `field()` names the offending parameter so front ends can report it.
class InvalidArgument : public Error {
 public:
  InvalidArgument(std::string field, const std::string& reason)
      : Error(field + ": " + reason), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class RetryExhausted : public Error {
 public:
  RetryExhausted(const std::string& what, int attempts)
      : Error(what + " (gave up after " + std::to_string(attempts) + " attempts)"),
        attempts_(attempts) {}
  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (achieved residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class SizeLimitError : public Error {
 public:
  SizeLimitError(const std::string& what, std::size_t cap)
      : Error(what + " (cap is " + std::to_string(cap) + ")"), cap_(cap) {}
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t cap_;
};

/// Two inputs that must agree mathematically do not.
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace ising
