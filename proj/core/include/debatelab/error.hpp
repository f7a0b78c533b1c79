#pragma once

#include <stdexcept>
#include <string>

namespace debatelab {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Provider failures. Only TransportError is considered transient.
class ProviderError : public Error {
 public:
  using Error::Error;
};
class TransportError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};
class ProtocolError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};
class EmptyCompletion : public ProviderError {
 public:
  using ProviderError::ProviderError;
};
class ParseError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};
class ScenarioHole : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};
class ZeroVector : public Error {
 public:
  using Error::Error;
};
class IncompleteTranscript : public Error {
 public:
  using Error::Error;
};
class InsufficientArguments : public Error {
 public:
  using Error::Error;
};
class SeriesTooShort : public Error {
 public:
  using Error::Error;
};
class MissingLabels : public Error {
 public:
  using Error::Error;
};
class NoReports : public Error {
 public:
  using Error::Error;
};

class TooFewValues : public Error {
 public:
  using Error::Error;
};
class BadRange : public Error {
 public:
  using Error::Error;
};
class DomainError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed persisted or input data. `line()` is 1-based, 0 when unknown.
class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class TemplateError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace debatelab
