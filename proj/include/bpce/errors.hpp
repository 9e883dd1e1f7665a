#pragma once

#include <stdexcept>
#include <string>

namespace bpce {

enum class ErrorKind {
  UnknownNode,
  UnknownEdge,
  DuplicateEdge,
  DuplicateNode,
  AnnotationOpOnVariant,
  UnknownPid,
  NotAConnector,
  InvalidMapping,
  KindMismatch,
  Unreplayable,
  UnmappedAnchor,
  InvalidOpForDirection,
  NonTermination,
  SyntaxError,
  SchemaError,
  ManifestError,
  CrossRefError,
  UnsupportedFeature,
  InvalidArgument,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::UnknownNode: return "UnknownNode";
    case ErrorKind::UnknownEdge: return "UnknownEdge";
    case ErrorKind::DuplicateEdge: return "DuplicateEdge";
    case ErrorKind::DuplicateNode: return "DuplicateNode";
    case ErrorKind::AnnotationOpOnVariant: return "AnnotationOpOnVariant";
    case ErrorKind::UnknownPid: return "UnknownPid";
    case ErrorKind::NotAConnector: return "NotAConnector";
    case ErrorKind::InvalidMapping: return "InvalidMapping";
    case ErrorKind::KindMismatch: return "KindMismatch";
    case ErrorKind::Unreplayable: return "Unreplayable";
    case ErrorKind::UnmappedAnchor: return "UnmappedAnchor";
    case ErrorKind::InvalidOpForDirection: return "InvalidOpForDirection";
    case ErrorKind::NonTermination: return "NonTermination";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::ManifestError: return "ManifestError";
    case ErrorKind::CrossRefError: return "CrossRefError";
    case ErrorKind::UnsupportedFeature: return "UnsupportedFeature";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Library-wide exception; `kind()` identifies the failed precondition or
/// validation so callers can map it to exit codes or test expectations.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace bpce
