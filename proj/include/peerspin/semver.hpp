#pragma once

// Semantic versions and npm-style range expressions.
//
// Ranges follow the node-semver dialect: comparators, caret, tilde, x-ranges,
// hyphen ranges, `*` and `||` alternatives. Every sugar form is normalized into
// plain comparator sets when parsed, so evaluation only ever deals with
// `{=, <, <=, >, >=} version` terms.

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "peerspin/error.hpp"

namespace peerspin::semver {

/// One dot-separated prerelease identifier. Numeric identifiers compare
/// numerically and always sort below alphanumeric ones.
struct PrereleaseId {
  bool numeric = false;
  std::uint64_t number = 0;
  std::string text;

  static PrereleaseId from_number(std::uint64_t n) { return {true, n, std::to_string(n)}; }

  friend std::strong_ordering operator<=>(const PrereleaseId& a, const PrereleaseId& b);
  friend bool operator==(const PrereleaseId& a, const PrereleaseId& b) {
    return (a <=> b) == std::strong_ordering::equal;
  }
};

class Version {
 public:
  Version() = default;
  Version(std::uint64_t major, std::uint64_t minor, std::uint64_t patch,
          std::vector<PrereleaseId> prerelease = {}, std::vector<std::string> build = {})
      : major_(major),
        minor_(minor),
        patch_(patch),
        prerelease_(std::move(prerelease)),
        build_(std::move(build)) {}

  std::uint64_t major() const noexcept { return major_; }
  std::uint64_t minor() const noexcept { return minor_; }
  std::uint64_t patch() const noexcept { return patch_; }
  const std::vector<PrereleaseId>& prerelease() const noexcept { return prerelease_; }
  const std::vector<std::string>& build() const noexcept { return build_; }
  bool is_prerelease() const noexcept { return !prerelease_.empty(); }

  /// True when both versions share major.minor.patch.
  bool same_core(const Version& other) const noexcept {
    return major_ == other.major_ && minor_ == other.minor_ && patch_ == other.patch_;
  }

  /// Canonical text including build metadata.
  std::string to_string() const;

  // Precedence ignores build metadata, so equality does too.
  friend std::strong_ordering operator<=>(const Version& a, const Version& b);
  friend bool operator==(const Version& a, const Version& b) {
    return (a <=> b) == std::strong_ordering::equal;
  }

 private:
  std::uint64_t major_ = 0;
  std::uint64_t minor_ = 0;
  std::uint64_t patch_ = 0;
  std::vector<PrereleaseId> prerelease_;
  std::vector<std::string> build_;
};

enum class Op { Eq, Lt, Le, Gt, Ge };

struct Comparator {
  Op op = Op::Eq;
  Version version;

  bool test(const Version& v) const;
  std::string to_string() const;
  friend bool operator==(const Comparator&, const Comparator&) = default;
};

/// A conjunction of comparators. An empty set matches every release.
using ComparatorSet = std::vector<Comparator>;

class VersionRange {
 public:
  VersionRange() : alternatives_{ComparatorSet{}} {}
  explicit VersionRange(std::vector<ComparatorSet> alternatives)
      : alternatives_(std::move(alternatives)) {}

  const std::vector<ComparatorSet>& alternatives() const noexcept { return alternatives_; }

  bool satisfied_by(const Version& v) const;

  /// Normalized form; parse_range(r.to_string()) == r.
  std::string to_string() const;

  friend bool operator==(const VersionRange&, const VersionRange&) = default;

 private:
  std::vector<ComparatorSet> alternatives_;
};

/// Strict version parse. A leading `v` and surrounding whitespace are tolerated.
Version parse_version(std::string_view text);

/// Non-throwing variant.
std::optional<Version> try_parse_version(std::string_view text) noexcept;

VersionRange parse_range(std::string_view text);
std::optional<VersionRange> try_parse_range(std::string_view text) noexcept;

/// Prerelease versions only satisfy a comparator set that names a prerelease
/// of the same major.minor.patch.
bool satisfies(const Version& v, const VersionRange& r);

std::optional<Version> max_satisfying(std::span<const Version> versions, const VersionRange& r);

}  // namespace peerspin::semver
