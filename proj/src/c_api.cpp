#include "peerspin/peerspin.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <json.hpp>

#include "peerspin/render.hpp"
#include "peerspin/resolver.hpp"
#include "peerspin/scanner.hpp"

struct ps_store {
  std::unique_ptr<peerspin::registry::PackumentSource> source;
  /// Set when the source is a snapshot; statistics need the full index.
  const peerspin::registry::SnapshotStore* snapshot = nullptr;
};

struct ps_outcome {
  peerspin::ResolutionOutcome outcome;
};

namespace {

thread_local std::string last_error;

ps_status status_of(peerspin::ErrorCode code) {
  using peerspin::ErrorCode;
  switch (code) {
    case ErrorCode::MalformedVersion: return PS_ERR_MALFORMED_VERSION;
    case ErrorCode::MalformedRange: return PS_ERR_MALFORMED_RANGE;
    case ErrorCode::SourceUnreadable: return PS_ERR_SOURCE_UNREADABLE;
    case ErrorCode::EmptySnapshot: return PS_ERR_EMPTY_SNAPSHOT;
    case ErrorCode::PackageNotFound: return PS_ERR_PACKAGE_NOT_FOUND;
    case ErrorCode::NoSatisfyingVersion: return PS_ERR_NO_SATISFYING_VERSION;
    case ErrorCode::SinkUnwritable: return PS_ERR_SINK_UNWRITABLE;
    case ErrorCode::Network: return PS_ERR_NETWORK;
    case ErrorCode::InvalidArgument: return PS_ERR_INVALID_ARGUMENT;
  }
  return PS_ERR_INTERNAL;
}

ps_status fail(ps_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

template <typename F>
ps_status guarded(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const peerspin::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(PS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PS_ERR_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

peerspin::ResolutionConfig to_config(const ps_config* c) {
  peerspin::ResolutionConfig cfg;
  if (!c) return cfg;
  cfg.max_iterations = c->max_iterations;
  cfg.detector_enabled = c->detector_enabled != 0;
  cfg.emit_placement_log = c->emit_placement_log != 0;
  cfg.debug_checks = c->debug_checks != 0;
  return cfg;
}

peerspin::registry::SnapshotFormat to_format(ps_snapshot_format f) {
  return f == PS_SNAPSHOT_DIRECTORY ? peerspin::registry::SnapshotFormat::Directory
                                    : peerspin::registry::SnapshotFormat::Ndjson;
}

peerspin::scanner::ScanTask parse_task(std::string_view text) {
  auto at = text.rfind('@');
  if (at == std::string_view::npos || at == 0) return {std::string(text), "all"};
  return {std::string(text.substr(0, at)), std::string(text.substr(at + 1))};
}

const char* category_name(peerspin::scanner::DepCategory c) {
  switch (c) {
    case peerspin::scanner::DepCategory::None: return "none";
    case peerspin::scanner::DepCategory::RegularOnly: return "regular-only";
    case peerspin::scanner::DepCategory::HasPeer: return "has-peer";
  }
  return "?";
}

}  // namespace

extern "C" {

void ps_config_init(ps_config* config) {
  if (!config) return;
  peerspin::ResolutionConfig defaults;
  config->max_iterations = defaults.max_iterations;
  config->detector_enabled = defaults.detector_enabled ? 1 : 0;
  config->emit_placement_log = defaults.emit_placement_log ? 1 : 0;
  config->debug_checks = defaults.debug_checks ? 1 : 0;
}

const char* ps_last_error(void) { return last_error.c_str(); }

const char* ps_status_name(ps_status status) {
  switch (status) {
    case PS_OK: return "ok";
    case PS_ERR_MALFORMED_VERSION: return "malformed-version";
    case PS_ERR_MALFORMED_RANGE: return "malformed-range";
    case PS_ERR_SOURCE_UNREADABLE: return "source-unreadable";
    case PS_ERR_EMPTY_SNAPSHOT: return "empty-snapshot";
    case PS_ERR_PACKAGE_NOT_FOUND: return "package-not-found";
    case PS_ERR_NO_SATISFYING_VERSION: return "no-satisfying-version";
    case PS_ERR_SINK_UNWRITABLE: return "sink-unwritable";
    case PS_ERR_NETWORK: return "network";
    case PS_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case PS_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void ps_string_free(char* s) { std::free(s); }

ps_status ps_store_open(const char* path, ps_snapshot_format format, ps_store** out) {
  if (!path || !out) return fail(PS_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto snapshot = std::make_unique<peerspin::registry::SnapshotStore>(
        peerspin::registry::SnapshotStore::import(path, to_format(format)));
    auto store = std::make_unique<ps_store>();
    store->snapshot = snapshot.get();
    store->source = std::move(snapshot);
    *out = store.release();
    return PS_OK;
  });
}

ps_status ps_store_open_remote(const char* base_url, const char* cache_dir, ps_store** out) {
  if (!base_url || !out) return fail(PS_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto store = std::make_unique<ps_store>();
    store->source = std::make_unique<peerspin::registry::RemoteRegistry>(base_url, cache_dir ? cache_dir : "");
    *out = store.release();
    return PS_OK;
  });
}

size_t ps_store_skipped(const ps_store* store) {
  return store && store->snapshot ? store->snapshot->skipped() : 0;
}

const char* ps_store_diagnostic(const ps_store* store, size_t index) {
  if (!store || !store->snapshot || index >= store->snapshot->diagnostics().size()) return nullptr;
  return store->snapshot->diagnostics()[index].c_str();
}

void ps_store_free(ps_store* store) { delete store; }

ps_status ps_resolve(const ps_store* store, const char* name, const char* range_or_tag, const ps_config* config,
                     ps_outcome** out) {
  if (!store || !name || !range_or_tag || !out) return fail(PS_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto outcome = std::make_unique<ps_outcome>();
    outcome->outcome = peerspin::resolve(*store->source, name, range_or_tag, to_config(config));
    *out = outcome.release();
    return PS_OK;
  });
}

ps_verdict ps_outcome_verdict(const ps_outcome* outcome) {
  switch (outcome->outcome.verdict()) {
    case peerspin::Verdict::Clean: return PS_VERDICT_CLEAN;
    case peerspin::Verdict::PeerSpin: return PS_VERDICT_PEERSPIN;
    case peerspin::Verdict::Unresolvable: return PS_VERDICT_UNRESOLVABLE;
    case peerspin::Verdict::IterationLimit: return PS_VERDICT_ITERATION_LIMIT;
  }
  return PS_VERDICT_UNRESOLVABLE;
}

uint64_t ps_outcome_iterations(const ps_outcome* outcome) { return outcome ? outcome->outcome.iterations : 0; }

ps_status ps_outcome_render(const ps_outcome* outcome, ps_format format, int include_tree, char** out) {
  if (!outcome || !out) return fail(PS_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto f = format == PS_FORMAT_TREE_TEXT ? peerspin::render::Format::TreeText
             : format == PS_FORMAT_NDJSON  ? peerspin::render::Format::Ndjson
                                           : peerspin::render::Format::Json;
    *out = dup_string(peerspin::render::outcome(outcome->outcome, f, include_tree != 0));
    return PS_OK;
  });
}

ps_status ps_outcome_write_log(const ps_outcome* outcome, const char* path) {
  if (!outcome || !path) return fail(PS_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << peerspin::render::placement_log_ndjson(outcome->outcome.log);
    f.flush();
    if (!f) return fail(PS_ERR_SINK_UNWRITABLE, std::string("cannot write ") + path);
    return PS_OK;
  });
}

void ps_outcome_free(ps_outcome* outcome) { delete outcome; }

ps_status ps_scan(const ps_store* store, const char* const* tasks, size_t n_tasks, unsigned jobs,
                  const ps_config* config, const char* out_path, ps_scan_summary* summary) {
  if (!store || (n_tasks > 0 && !tasks)) return fail(PS_ERR_INVALID_ARGUMENT, "null argument");
  if (jobs == 0) return fail(PS_ERR_INVALID_ARGUMENT, "jobs must be positive");
  return guarded([&] {
    std::vector<peerspin::scanner::ScanTask> list;
    for (size_t i = 0; i < n_tasks; ++i) list.push_back(parse_task(tasks[i]));
    if (n_tasks == 0) {
      if (!store->snapshot) return fail(PS_ERR_INVALID_ARGUMENT, "scanning every package needs a snapshot");
      for (const auto& name : store->snapshot->names()) list.push_back({name, "all"});
    }
    std::ofstream file;
    std::ostream* sink_stream = &std::cout;
    if (out_path) {
      file.open(out_path, std::ios::binary | std::ios::trunc);
      if (!file) return fail(PS_ERR_SINK_UNWRITABLE, std::string("cannot open ") + out_path);
      sink_stream = &file;
    }
    auto s = peerspin::scanner::scan_batch(*store->source, list, jobs, to_config(config),
                                           peerspin::scanner::ndjson_sink(*sink_stream));
    if (summary) *summary = {s.peerspin, s.clean, s.unresolvable, s.error, s.iteration_limit};
    return PS_OK;
  });
}

ps_status ps_stats(const ps_store* store, const char* results_path, size_t top_n, char** json_out) {
  if (!store || !json_out) return fail(PS_ERR_INVALID_ARGUMENT, "null argument");
  if (!store->snapshot) return fail(PS_ERR_INVALID_ARGUMENT, "statistics need a snapshot store");
  return guarded([&] {
    namespace sc = peerspin::scanner;
    std::vector<sc::ScanResult> results;
    if (results_path) {
      std::ifstream in(results_path, std::ios::binary);
      if (!in) return fail(PS_ERR_SOURCE_UNREADABLE, std::string("cannot read ") + results_path);
      results = sc::read_results(in);
    }
    const auto& snapshot = *store->snapshot;
    auto usage = sc::peer_usage_stats(snapshot);
    auto yearly = sc::yearly_affected_counts(snapshot, results);
    auto top = sc::top_peer_dependents(snapshot, top_n);

    nlohmann::ordered_json j;
    j["packages"] = usage.packages;
    j["packagesWithPeers"] = usage.packages_with_peers;
    j["peerUsageFraction"] = usage.peer_usage_fraction;
    j["versions"] = usage.versions;
    nlohmann::ordered_json by_cat = nlohmann::ordered_json::object();
    for (const auto& [cat, count] : usage.versions_by_category) by_cat[category_name(cat)] = count;
    j["versionsByCategory"] = by_cat;
    nlohmann::ordered_json years = nlohmann::ordered_json::object();
    for (const auto& [year, b] : yearly.yearly) {
      years[std::to_string(year)] = {
          {"released", b.released}, {"withPeers", b.with_peers}, {"peerspinAffected", b.peerspin_affected}};
    }
    j["yearly"] = years;
    j["skippedUndated"] = yearly.skipped_undated;
    j["skippedAffected"] = yearly.skipped_affected;
    auto ranks = nlohmann::ordered_json::array();
    for (const auto& r : top) ranks.push_back({{"name", r.name}, {"version", r.version.to_string()}, {"count", r.count}});
    j["topPeerDependents"] = ranks;
    *json_out = dup_string(j.dump(2) + "\n");
    return PS_OK;
  });
}

ps_status ps_gen_fixture(const char* kind, unsigned intermediates, const char* out_path, ps_snapshot_format format,
                         char** descriptor_json) {
  if (!kind || !out_path) return fail(PS_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    namespace sc = peerspin::scanner;
    sc::FixtureDescriptor d;
    std::string k = kind;
    peerspin::registry::SnapshotStore store;
    if (k == "A" || k == "a") store = sc::gen_pattern_fixture(sc::Pattern::A, intermediates, &d);
    else if (k == "B" || k == "b") store = sc::gen_pattern_fixture(sc::Pattern::B, intermediates, &d);
    else if (k == "motivating") store = sc::gen_motivating_fixture(&d);
    else return fail(PS_ERR_INVALID_ARGUMENT, "unknown fixture kind '" + k + "' (expected A, B or motivating)");
    store.save(out_path, to_format(format));
    if (descriptor_json) {
      nlohmann::ordered_json j{{"root", d.root_name},
                               {"version", d.root_version},
                               {"cyclePackage", d.cycle_package},
                               {"expected", d.expect_peerspin ? "peerspin" : "clean"},
                               {"packages", d.packages},
                               {"versions", d.versions}};
      *descriptor_json = dup_string(j.dump(2) + "\n");
    }
    return PS_OK;
  });
}

ps_status ps_semver_satisfies(const char* version, const char* range, int* out) {
  if (!version || !range || !out) return fail(PS_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = peerspin::semver::satisfies(peerspin::semver::parse_version(version),
                                       peerspin::semver::parse_range(range))
               ? 1
               : 0;
    return PS_OK;
  });
}

}  // extern "C"
