#pragma once

#include <stdexcept>
#include <string>

namespace afgd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: dimension mismatch, non-finite entries, bad ranges.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Configuration that violates an optimizer or scenario invariant.
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

/// Objective has no unique minimizer (singular Hessian, too few samples).
class DegenerateObjective : public Error {
 public:
  using Error::Error;
};

/// Requested parameters admit no convergence certificate.
class NoCertificate : public Error {
 public:
  using Error::Error;
};

/// Not enough usable iterates to fit a convergence rate.
class DegenerateFit : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Text-format error carrying the offending line (1-based, 0 if unknown) and key.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, int line, const std::string& key,
             const std::string& what)
      : Error(source + ":" + std::to_string(line) +
              (key.empty() ? std::string() : " [" + key + "]") + ": " + what),
        line_(line),
        key_(key) {}

  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  int line_;
  std::string key_;
};

}  // namespace afgd
