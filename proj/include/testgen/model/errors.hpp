#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace testgen {

enum class ErrorCode {
  MalformedDocument,
  UnknownKind,
  StoreClosed,
  MissingRun,
  ParseFailure,
  UnsupportedConstruct,
  AlreadyInstrumented,
  UnresolvedPointer,
  DuplicateFullSerialization,
  IncompleteInvocation,
  UnsupportedType,
  UnknownType,
  CompileFailure,
  EmptyBundle,
  IoFailure,
  DriverFailure,
  PreconditionViolation,
};

std::string_view to_string(ErrorCode code);

/// Base exception for every recoverable failure in the toolchain. The code
/// is what callers switch on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by the document decoder. `offset` is the byte offset into the
/// input at which decoding failed.
class DocumentError : public Error {
 public:
  DocumentError(ErrorCode code, std::size_t offset, const std::string& reason)
      : Error(code, reason + " at byte " + std::to_string(offset)),
        offset_(offset),
        reason_(reason) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t offset_;
  std::string reason_;
};

}  // namespace testgen
