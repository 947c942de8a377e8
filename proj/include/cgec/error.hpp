#ifndef CGEC_ERROR_HPP_
#define CGEC_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cgec {

// Base of every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid input data or arguments. The CLI maps this family to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Inconsistent configuration (missing lexicon, missing credentials, bad template).
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Malformed record in an input file; carries the 1-based line number.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& message,
             const std::string& origin = {})
      : ValidationError((origin.empty() ? std::string() : origin + ": ") +
                        "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Filesystem failures. Exit code 2.
class IoError : public Error {
 public:
  using Error::Error;
};

// Network failures after retries are exhausted. Exit code 2.
class TransportError : public Error {
 public:
  using Error::Error;
};

// The endpoint rejected the credentials; never retried.
class AuthError : public TransportError {
 public:
  using TransportError::TransportError;
};

}  // namespace cgec

#endif  // CGEC_ERROR_HPP_
