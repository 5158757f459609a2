#pragma once

#include <stdexcept>
#include <string>

namespace editdyn {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input. `locus` names the offending field, line or element.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::string locus = {})
      : Error(locus.empty() ? message : message + " (at " + locus + ")"), message_(message), locus_(std::move(locus)) {}
  const std::string& locus() const noexcept { return locus_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string message_;
  std::string locus_;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Network failure after retries were exhausted; retryable by the caller.
class TransportError : public Error {
 public:
  TransportError(const std::string& message, int attempts)
      : Error(message + " (after " + std::to_string(attempts) + " attempts)"), attempts_(attempts) {}
  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

class OfflineError : public Error {
 public:
  OfflineError() : Error("offline forbids network") {}
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Fit cannot proceed: the data pins down fewer parameters than requested.
class UnderdeterminedError : public Error {
 public:
  UnderdeterminedError() : Error("underdetermined") {}
  explicit UnderdeterminedError(const std::string& detail) : Error("underdetermined: " + detail) {}
};

}  // namespace editdyn
