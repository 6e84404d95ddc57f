#pragma once

#include <stdexcept>
#include <string>

namespace peerspin {

enum class ErrorCode {
  MalformedVersion,
  MalformedRange,
  SourceUnreadable,
  EmptySnapshot,
  PackageNotFound,
  NoSatisfyingVersion,
  SinkUnwritable,
  Network,
  InvalidArgument,
};

const char* to_string(ErrorCode code) noexcept;

/// Base class for every error raised by the library. The code is stable and is
/// what the C API maps onto its status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class MalformedVersion : public Error {
 public:
  explicit MalformedVersion(const std::string& text)
      : Error(ErrorCode::MalformedVersion, "malformed version: '" + text + "'") {}
};

class MalformedRange : public Error {
 public:
  explicit MalformedRange(const std::string& text)
      : Error(ErrorCode::MalformedRange, "malformed range: '" + text + "'") {}
};

class PackageNotFound : public Error {
 public:
  explicit PackageNotFound(const std::string& name)
      : Error(ErrorCode::PackageNotFound, "package not found: " + name) {}
};

class NoSatisfyingVersion : public Error {
 public:
  NoSatisfyingVersion(const std::string& name, const std::string& spec)
      : Error(ErrorCode::NoSatisfyingVersion,
              "no version of " + name + " satisfies '" + spec + "'") {}
};

}  // namespace peerspin
