#pragma once

#include <stdexcept>
#include <string>

namespace webscraper {

// Base class for all webscraper errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input file or wire payload. Carries the offending key or the
// raw payload where available.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(what) {}
};

// A domain invariant does not hold (bad task file, duplicate dataset URLs,
// out-of-range argument).
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

// A file operation tried to reach outside the sandbox root.
class SecurityError : public Error {
 public:
  explicit SecurityError(const std::string& what) : Error(what) {}
};

// Provider-side failures, split by how callers should react.
enum class ProviderErrorKind {
  kTransport,  // connection-level failure, retryable
  kTimeout,    // request deadline exceeded
  kSchema,     // response or tool arguments do not match the declared shape
  kExhausted,  // scripted trace ran out of turns
};

class ProviderError : public Error {
 public:
  ProviderError(ProviderErrorKind kind, const std::string& what,
                std::string raw_payload = {})
      : Error(what), kind_(kind), raw_payload_(std::move(raw_payload)) {}

  ProviderErrorKind kind() const { return kind_; }
  // Raw body for logging when kind is kSchema; empty otherwise.
  const std::string& raw_payload() const { return raw_payload_; }

 private:
  ProviderErrorKind kind_;
  std::string raw_payload_;
};

// Loss of run infrastructure (dead browser session). Aborts the run; all
// other tool failures are fed back to the model as error results.
class ToolFatalError : public Error {
 public:
  explicit ToolFatalError(const std::string& what) : Error(what) {}
};

}  // namespace webscraper
