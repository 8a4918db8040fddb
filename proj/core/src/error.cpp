#include "mementomap/error.hpp"

namespace mementomap {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MalformedUri: return "MalformedUri";
    case ErrorKind::MalformedFrequency: return "MalformedFrequency";
    case ErrorKind::MalformedLine: return "MalformedLine";
    case ErrorKind::MalformedCdxj: return "MalformedCdxj";
    case ErrorKind::UnsortedInput: return "UnsortedInput";
    case ErrorKind::SinkFailure: return "SinkFailure";
    case ErrorKind::SinkNotSeekable: return "SinkNotSeekable";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::GzipNotSeekable: return "GzipNotSeekable";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::DegenerateFit: return "DegenerateFit";
    case ErrorKind::InsufficientStats: return "InsufficientStats";
    case ErrorKind::EmptyLog: return "EmptyLog";
    case ErrorKind::HttpFailure: return "HttpFailure";
    case ErrorKind::TooManyPages: return "TooManyPages";
    case ErrorKind::InvalidDocument: return "InvalidDocument";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

namespace {

std::string format_message(ErrorKind kind, const std::string& message,
                           std::size_t line) {
  std::string out(to_string(kind));
  if (line != 0) {
    out += " at line ";
    out += std::to_string(line);
  }
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message, std::size_t line,
             int status)
    : std::runtime_error(format_message(kind, message, line)),
      kind_(kind),
      line_(line),
      status_(status),
      message_(message) {}

}  // namespace mementomap
