#pragma once

#include <stdexcept>
#include <string>

namespace emobias {

// Base of every error thrown by the library. The CLI maps subclasses to
// process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (corpus, lexicon, prediction log).
class DataError : public Error {
 public:
  using Error::Error;
};

class LoadError : public DataError {
 public:
  using DataError::DataError;
};

class AugmentError : public DataError {
 public:
  using DataError::DataError;
};

class AccountingError : public DataError {
 public:
  using DataError::DataError;
};

// Bad run configuration: missing secrets, invalid paths, bad parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// Transport failure after all retries. Carries the request fingerprint so a
// run can be resumed.
class QueryError : public Error {
 public:
  QueryError(std::string fingerprint, const std::string& what)
      : Error(what), fingerprint_(std::move(fingerprint)) {}

  const std::string& fingerprint() const noexcept { return fingerprint_; }

 private:
  std::string fingerprint_;
};

// Endpoint answered, but not with a well-formed chat-completion body.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace emobias
