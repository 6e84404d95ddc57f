#include "peerspin/error.hpp"

namespace peerspin {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedVersion: return "malformed-version";
    case ErrorCode::MalformedRange: return "malformed-range";
    case ErrorCode::SourceUnreadable: return "source-unreadable";
    case ErrorCode::EmptySnapshot: return "empty-snapshot";
    case ErrorCode::PackageNotFound: return "package-not-found";
    case ErrorCode::NoSatisfyingVersion: return "no-satisfying-version";
    case ErrorCode::SinkUnwritable: return "sink-unwritable";
    case ErrorCode::Network: return "network";
    case ErrorCode::InvalidArgument: return "invalid-argument";
  }
  return "unknown";
}

}  // namespace peerspin
