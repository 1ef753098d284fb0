#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qagibbs {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Problem size exceeds what an exact (exponential) routine accepts.
class CapacityError : public Error {
 public:
  CapacityError(const std::string& what, std::size_t requested, std::size_t limit)
      : Error(what + " (requested " + std::to_string(requested) + ", limit " +
              std::to_string(limit) + ")"),
        requested_(requested),
        limit_(limit) {}

  std::size_t requested() const noexcept { return requested_; }
  std::size_t limit() const noexcept { return limit_; }

 private:
  std::size_t requested_;
  std::size_t limit_;
};

// A spin configuration or gauge vector does not cover the model's sites.
class ConfigurationMismatch : public Error {
 public:
  using Error::Error;
};

// Two distributions (or operators) live on different state spaces.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NonHermitianError : public Error {
 public:
  using Error::Error;
};

// Rejection sampling ran out of attempts.
class ExhaustionError : public Error {
 public:
  ExhaustionError(const std::string& what, std::size_t attempts)
      : Error(what + " after " + std::to_string(attempts) + " attempts"), attempts_(attempts) {}

  std::size_t attempts() const noexcept { return attempts_; }

 private:
  std::size_t attempts_;
};

class UnknownLabelError : public Error {
 public:
  using Error::Error;
};

// Remote sampler errors.
class TransportError : public Error {
 public:
  using Error::Error;
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

class FixtureMissError : public Error {
 public:
  using Error::Error;
};

}  // namespace qagibbs
