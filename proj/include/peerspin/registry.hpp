#pragma once

// Package metadata: manifests, packuments and the stores that serve them.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "peerspin/semver.hpp"

namespace peerspin::registry {

struct Manifest {
  std::string name;
  semver::Version version;
  /// Regular dependencies. Names also listed as peers are removed on load.
  std::map<std::string, std::string> dependencies;
  std::map<std::string, std::string> peer_dependencies;
  /// Names flagged `optional: true` in peerDependenciesMeta.
  std::map<std::string, bool> peer_optional;

  bool is_optional_peer(const std::string& dep) const {
    auto it = peer_optional.find(dep);
    return it != peer_optional.end() && it->second;
  }
};

struct Packument {
  std::string name;
  /// Keyed by canonical version text (build metadata stripped).
  std::map<std::string, Manifest> versions;
  std::map<std::string, std::string> dist_tags;
  /// Release time in seconds since the Unix epoch. Versions without a usable
  /// timestamp are absent here and are reported by is_time_flagged().
  std::map<std::string, std::int64_t> times;

  /// Ascending precedence order.
  std::vector<semver::Version> sorted_versions() const;
  const Manifest* find(const semver::Version& v) const;
  std::optional<std::int64_t> released_at(const semver::Version& v) const;
  bool is_time_flagged(const semver::Version& v) const { return !released_at(v); }
};

/// Canonical key used in Packument::versions.
std::string version_key(const semver::Version& v);

/// Parses one packument document. Throws Error(SourceUnreadable) describing
/// the first violation when the document is malformed.
Packument parse_packument(std::string_view json_text);

/// Inverse of parse_packument (canonical JSON, keys sorted).
std::string serialize_packument(const Packument& p);

/// Parses an ISO-8601 UTC timestamp such as "2021-03-04T05:06:07.890Z".
std::optional<std::int64_t> parse_timestamp(std::string_view text);

/// Calendar year of a Unix timestamp.
int year_of(std::int64_t epoch_seconds);

/// `@scope/name` -> `@scope%2fname`.
std::string encode_name(std::string_view name);
std::string decode_name(std::string_view encoded);

/// Anything able to look packuments up by name.
class PackumentSource {
 public:
  virtual ~PackumentSource() = default;
  /// nullptr when the package does not exist.
  virtual std::shared_ptr<const Packument> find(const std::string& name) const = 0;

  /// Throws PackageNotFound.
  std::shared_ptr<const Packument> get(const std::string& name) const;
};

enum class SnapshotFormat { Ndjson, Directory };

class SnapshotStore : public PackumentSource {
 public:
  SnapshotStore() = default;

  /// Throws SourceUnreadable or EmptySnapshot.
  static SnapshotStore import(const std::filesystem::path& source, SnapshotFormat format);
  static SnapshotStore import_ndjson(std::istream& in);

  /// Later additions with the same name replace earlier ones.
  void add(Packument p);

  std::shared_ptr<const Packument> find(const std::string& name) const override;

  std::size_t size() const noexcept { return index_.size(); }
  std::vector<std::string> names() const;
  const std::map<std::string, std::shared_ptr<const Packument>>& packuments() const noexcept {
    return index_;
  }

  std::size_t skipped() const noexcept { return diagnostics_.size(); }
  const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

  /// Writes the store in the given layout.
  void save(const std::filesystem::path& target, SnapshotFormat format) const;

 private:
  std::map<std::string, std::shared_ptr<const Packument>> index_;
  std::vector<std::string> diagnostics_;
};

/// HTTP registry client with a write-once on-disk cache. Only plain http://
/// endpoints are supported.
class RemoteRegistry : public PackumentSource {
 public:
  RemoteRegistry(std::string base_url, std::filesystem::path cache_dir);
  ~RemoteRegistry() override;

  std::shared_ptr<const Packument> find(const std::string& name) const override;

  /// Number of HTTP requests issued so far.
  std::size_t fetches() const noexcept;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

struct Selection {
  std::shared_ptr<const Packument> packument;
  const Manifest* manifest = nullptr;
};

/// Resolves a dist-tag or a range to one concrete manifest. Throws
/// PackageNotFound, NoSatisfyingVersion or MalformedRange.
Selection select_version(const PackumentSource& source, const std::string& name,
                         const std::string& range_or_tag);

/// Range-only variant used once the spec is already parsed.
Selection select_version(const PackumentSource& source, const std::string& name,
                         const semver::VersionRange& range, const std::string& spec_text);

}  // namespace peerspin::registry
