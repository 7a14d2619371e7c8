#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace codeguard {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value violates a domain invariant (bad CWE id, empty field, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Misconfiguration: missing env vars, bad config file, replay misses.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class ReplayMissError : public ConfigError {
 public:
  explicit ReplayMissError(std::string fingerprint)
      : ConfigError("unmatched fingerprint " + fingerprint),
        fingerprint_(std::move(fingerprint)) {}
  const std::string& fingerprint() const noexcept { return fingerprint_; }

 private:
  std::string fingerprint_;
};

// Network failure talking to a live backend. Retryable by the caller.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, int attempts, int status = 0)
      : Error(what), attempts_(attempts), status_(status) {}
  int attempts() const noexcept { return attempts_; }
  // HTTP status of the last response, 0 when no response was received.
  int status() const noexcept { return status_; }

 private:
  int attempts_;
  int status_;
};

class DecompositionError : public Error {
 public:
  using Error::Error;
};

class ExtractionError : public Error {
 public:
  ExtractionError(const std::string& what, std::string raw_response)
      : Error(what), raw_(std::move(raw_response)) {}
  const std::string& raw_response() const noexcept { return raw_; }

 private:
  std::string raw_;
};

class BuildError : public Error {
 public:
  using Error::Error;
};

class EmbeddingError : public Error {
 public:
  using Error::Error;
};

// Malformed persisted file. line() is 1-based, 0 when not line specific.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A file could not be written.
class IoError : public Error {
 public:
  using Error::Error;
};

// A single evaluation case could not be scored (external detector failure).
class EvaluationError : public Error {
 public:
  using Error::Error;
};

}  // namespace codeguard
