#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mementomap {

enum class ErrorKind {
  MalformedUri,
  MalformedFrequency,
  MalformedLine,
  MalformedCdxj,
  UnsortedInput,
  SinkFailure,
  SinkNotSeekable,
  IoFailure,
  GzipNotSeekable,
  DomainError,
  EmptyInput,
  DegenerateFit,
  InsufficientStats,
  EmptyLog,
  HttpFailure,
  TooManyPages,
  InvalidDocument,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library. `line()` is 1-based when the error
/// refers to a position in a text stream, 0 otherwise. `status()` carries the
/// HTTP status for HttpFailure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::size_t line = 0,
        int status = 0);

  ErrorKind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }
  int status() const noexcept { return status_; }
  /// The message without the kind and line prefix of what().
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::size_t line_;
  int status_;
  std::string message_;
};

}  // namespace mementomap
