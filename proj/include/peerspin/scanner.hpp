#pragma once

// Snapshot-wide scanning, ecosystem statistics and fixture synthesis.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "peerspin/registry.hpp"
#include "peerspin/resolver.hpp"

namespace peerspin::scanner {

struct ScanTask {
  std::string name;
  /// A concrete version, or "all" for every version of the package.
  std::string version;
};

enum class ScanVerdict { PeerSpin, Clean, Unresolvable, Error, IterationLimit };

const char* to_string(ScanVerdict verdict) noexcept;

struct ScanResult {
  std::string name;
  std::string version;
  ScanVerdict verdict = ScanVerdict::Error;
  std::optional<PeerSpinReport> report;
  std::string diagnostic;
  std::chrono::nanoseconds elapsed{0};
};

struct ScanSummary {
  std::size_t peerspin = 0;
  std::size_t clean = 0;
  std::size_t unresolvable = 0;
  std::size_t error = 0;
  std::size_t iteration_limit = 0;

  std::size_t total() const noexcept { return peerspin + clean + unresolvable + error + iteration_limit; }
  void add(ScanVerdict v) noexcept;
  friend bool operator==(const ScanSummary&, const ScanSummary&) = default;
};

/// Receives each finished result. Calls are serialized by scan_batch.
using ResultSink = std::function<void(const ScanResult&)>;

/// Expands "all" tasks (newest version first) against the source. Unknown
/// packages stay as-is and later yield an error result.
std::vector<ScanTask> expand_tasks(const registry::PackumentSource& source, const std::vector<ScanTask>& tasks);

/// Resolves one task.
ScanResult scan_one(const registry::PackumentSource& source, const ScanTask& task, const ResolutionConfig& config);

/// Runs every (expanded) task on up to `jobs` threads. Every task produces
/// exactly one sink call, in completion order.
ScanSummary scan_batch(const registry::PackumentSource& source, const std::vector<ScanTask>& tasks, unsigned jobs,
                       const ResolutionConfig& config, const ResultSink& sink);

/// Sink writing one NDJSON line per result; throws SinkUnwritable on failure.
ResultSink ndjson_sink(std::ostream& out);

/// {name, version, verdict, elapsed_ms, report?, diagnostic?} as one JSON line.
std::string result_to_json(const ScanResult& r);

/// Reads back lines written by ndjson_sink. Blank lines are skipped; a
/// malformed line throws Error(SourceUnreadable).
std::vector<ScanResult> read_results(std::istream& in);

// ---------------------------------------------------------------------------
// Statistics

enum class DepCategory { None, RegularOnly, HasPeer };

DepCategory categorize(const registry::Manifest& m);

struct UsageStats {
  std::size_t packages = 0;
  std::size_t packages_with_peers = 0;
  std::size_t versions = 0;
  std::map<DepCategory, std::size_t> versions_by_category;
  /// Packages with at least one version declaring peerDependencies, over all packages.
  double peer_usage_fraction = 0.0;
};

struct YearBucket {
  std::size_t released = 0;
  std::size_t with_peers = 0;
  std::size_t peerspin_affected = 0;
  friend bool operator==(const YearBucket&, const YearBucket&) = default;
};

struct YearlyStats {
  std::map<int, YearBucket> yearly;
  /// Versions without a usable release time, excluded from `yearly`.
  std::size_t skipped_undated = 0;
  /// Peerspin results whose version lacks a release time.
  std::size_t skipped_affected = 0;
};

struct PeerDependentRank {
  std::string name;
  semver::Version version;
  std::size_t count = 0;
};

UsageStats peer_usage_stats(const registry::SnapshotStore& store);

/// Buckets releases and peerspin verdicts by release year.
YearlyStats yearly_affected_counts(const registry::SnapshotStore& store, const std::vector<ScanResult>& results);

/// For each stored version, counts manifests of other packages whose peer range
/// it satisfies; top `n` by count, then name, then version. Zero counts are
/// dropped.
std::vector<PeerDependentRank> top_peer_dependents(const registry::SnapshotStore& store, std::size_t n);

// ---------------------------------------------------------------------------
// Fixtures

enum class Pattern { A, B };

struct FixtureDescriptor {
  std::string root_name;
  std::string root_version;
  /// Package that is expected to spin.
  std::string cycle_package;
  bool expect_peerspin = false;
  std::size_t packages = 0;
  std::size_t versions = 0;
};

/// Minimal snapshot realizing the pattern, with `intermediates` (≤ 8)
/// pass-through packages inserted on the regular chain (A) or the peer chain (B).
registry::SnapshotStore gen_pattern_fixture(Pattern pattern, unsigned intermediates, FixtureDescriptor* descriptor);

/// xydesign -> {antd, draft-js}; antd peer-> react-dom peer-> react@^18; draft-js peer-> react@^16.
registry::SnapshotStore gen_motivating_fixture(FixtureDescriptor* descriptor);

/// Helper for building stores in code and tests.
class StoreBuilder {
 public:
  StoreBuilder& version(const std::string& name, const std::string& version,
                        std::map<std::string, std::string> deps = {},
                        std::map<std::string, std::string> peers = {},
                        std::vector<std::string> optional_peers = {});
  StoreBuilder& time(const std::string& name, const std::string& version, const std::string& iso);
  registry::SnapshotStore build() const;

 private:
  std::map<std::string, registry::Packument> packuments_;
};

struct RandomFixtureOptions {
  std::size_t packages = 12;
  std::size_t max_versions = 3;
  std::size_t max_deps = 3;
  double peer_probability = 0.3;
  /// When true every range is satisfied by the newest version of its target,
  /// so no two versions of one package are ever needed.
  bool conflict_free = false;
};

/// Random acyclic dependency graph rooted at "root@1.0.0".
registry::SnapshotStore gen_random_fixture(std::mt19937_64& rng, const RandomFixtureOptions& options,
                                           FixtureDescriptor* descriptor);

/// Pattern fixture (A or B, given intermediates) merged with `noise` unrelated
/// clean regular dependencies of the root.
registry::SnapshotStore gen_noisy_pattern_fixture(std::mt19937_64& rng, Pattern pattern, unsigned intermediates,
                                                  std::size_t noise, FixtureDescriptor* descriptor);

}  // namespace peerspin::scanner
