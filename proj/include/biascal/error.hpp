#pragma once

#include <stdexcept>
#include <string>

namespace biascal {

// Every failure raised by the library derives from Error so callers can
// catch the family in one place; the subclasses pick the CLI exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data or configuration (bad JSON line, bad key-value file,
// invariant violations on construction).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class UnknownLabelError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class EmptyDatasetError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class PoolTooSmallError : public Error {
 public:
  using Error::Error;
};

class EmptyCorpusError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class SourceMismatchError : public Error {
 public:
  using Error::Error;
};

class BackendError : public Error {
 public:
  using Error::Error;
};

// Endpoint unreachable, connection reset, or timed out. Retried.
class TransportError : public BackendError {
 public:
  using BackendError::BackendError;
};

// Endpoint answered but refused or mangled the logprob request. Not retried.
class ScoringError : public BackendError {
 public:
  using BackendError::BackendError;
};

class MetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace biascal
