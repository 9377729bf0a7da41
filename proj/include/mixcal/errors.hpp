#pragma once

#include <stdexcept>
#include <string>

namespace mixcal {

// Argument outside an operation's domain (non-positive frequency, bad state norm, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Closed-form population formulas have a 1/detuning pole; raised at zero detuning.
class SingularityError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Fock-space truncation too small for the state being evolved.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Scan grid cannot produce a location estimate (e.g. all weights zero).
class DegenerateGridError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Run configuration failed schema or value checks. line() is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// File could not be read, written or parsed (store, CSV, config file).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mixcal
