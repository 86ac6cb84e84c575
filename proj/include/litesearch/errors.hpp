#pragma once

#include <stdexcept>
#include <string>

namespace litesearch {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition (bad argument, empty input).
class InvalidInputError : public Error {
public:
  using Error::Error;
};

/// Lookup of a node, task, or resource that does not exist.
class NotFoundError : public Error {
public:
  using Error::Error;
};

/// Attempt to expand a node past its allocated budget, or before one is set.
class BudgetViolationError : public Error {
public:
  using Error::Error;
};

/// Backend transport failure (timeout, connection refused, bad status).
/// Retryable errors are retried by the HTTP client before surfacing here.
class TransportError : public Error {
public:
  explicit TransportError(const std::string& what, bool retryable = true)
      : Error(what), retryable_(retryable) {}
  bool retryable() const { return retryable_; }

private:
  bool retryable_;
};

/// The policy produced unusable output (e.g. an empty generation).
class DegenerateOutputError : public Error {
public:
  using Error::Error;
};

/// Malformed input file (dataset line, config, demonstrations).
class ParseError : public Error {
public:
  using Error::Error;
};

/// Filesystem failure (unreadable dataset, unwritable report path).
class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace litesearch
