#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coterm {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed input line. `line_no` is 1-based; 0 when not tied to a line.
class FormatError : public Error {
 public:
  FormatError(std::size_t line_no, const std::string& message)
      : Error("line " + std::to_string(line_no) + ": " + message), line_no_(line_no) {}

  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::size_t line_no_;
};

class EncodingError : public Error {
 public:
  EncodingError(std::size_t line_no, const std::string& message)
      : Error("line " + std::to_string(line_no) + ": " + message), line_no_(line_no) {}

  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::size_t line_no_;
};

class EmptyTerm : public Error {
 public:
  explicit EmptyTerm(const std::string& term)
      : Error("term '" + term + "' contains no letters or digits") {}
};

class InvalidCounts : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ScenarioInvalid : public Error {
 public:
  using Error::Error;
};

/// Scheduler could not be reached over the network.
class SchedulerUnreachable : public Error {
 public:
  using Error::Error;
};

class StoreCorrupt : public Error {
 public:
  using Error::Error;
};

/// Error codes of the scheduler protocol. The names double as the `error`
/// field of JSON error bodies.
enum class SchedulerErrc {
  unknown_resource,
  unknown_task,
  not_owner,
  already_complete,
  quota_exceeded,
  malformed_resource_id,
  bad_request,
};

const char* to_string(SchedulerErrc code) noexcept;

class SchedulerError : public Error {
 public:
  SchedulerError(SchedulerErrc code, const std::string& message)
      : Error(std::string(to_string(code)) + ": " + message), code_(code) {}

  SchedulerErrc code() const noexcept { return code_; }

 private:
  SchedulerErrc code_;
};

}  // namespace coterm
