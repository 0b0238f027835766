#pragma once

#include <stdexcept>
#include <string>

namespace cowrite {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (empty input, out-of-range value).
class DomainError : public Error {
  public:
    using Error::Error;
};

class DuplicateTransitionError : public Error {
  public:
    using Error::Error;
};

class StaleFeedbackError : public Error {
  public:
    using Error::Error;
};

class EmptySuggestionError : public Error {
  public:
    using Error::Error;
};

/// Model output could not be turned into a JSON object. Carries the raw text.
class ParseError : public Error {
  public:
    ParseError(const std::string& what, std::string raw)
        : Error(what), raw_response(std::move(raw)) {}
    std::string raw_response;
};

/// JSON was found but does not satisfy the expected schema.
class SchemaError : public ParseError {
  public:
    using ParseError::ParseError;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Network failure, timeout, or retry exhaustion.
class TransportError : public Error {
  public:
    using Error::Error;
};

/// Endpoint answered with a non-success HTTP status.
class StatusError : public TransportError {
  public:
    StatusError(int status_code, const std::string& body_excerpt)
        : TransportError("HTTP status " + std::to_string(status_code) + ": " + body_excerpt),
          status(status_code), body(body_excerpt) {}
    int status;
    std::string body;
};

/// Strict mock backend received a request no script matches.
class UnmatchedScriptError : public Error {
  public:
    using Error::Error;
};

class UndefinedCorrelationError : public Error {
  public:
    using Error::Error;
};

class LengthMismatchError : public Error {
  public:
    using Error::Error;
};

class NotFoundError : public Error {
  public:
    using Error::Error;
};

class ConflictError : public Error {
  public:
    using Error::Error;
};

/// A batch run exceeded its failure-rate ceiling.
class BatchAbortedError : public Error {
  public:
    using Error::Error;
};

}  // namespace cowrite
