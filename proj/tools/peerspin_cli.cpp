// Command-line front end. Talks to the library only through peerspin.h.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "peerspin/peerspin.h"

namespace {

enum Exit { kOk = 0, kFailure = 1, kPeerSpin = 2, kUnresolvable = 3, kIterationLimit = 4 };

struct Source {
  std::string snapshot;
  std::string snapshot_format;
  std::string registry_url;
  std::string cache;
};

struct Options {
  Source source;
  std::string format = "json";
  unsigned jobs = 0;
  std::uint64_t max_iterations = 10000;
  std::string emit_log;
  std::string out;
};

int report_error(const std::string& what) {
  std::cerr << "peerspin: " << what << '\n';
  return kFailure;
}

int report_status(ps_status status) {
  return report_error(std::string(ps_status_name(status)) + ": " + ps_last_error());
}

void add_source_flags(CLI::App* cmd, Source& s) {
  cmd->add_option("--snapshot", s.snapshot, "Snapshot path (NDJSON file or directory of <name>.json)");
  cmd->add_option("--snapshot-format", s.snapshot_format, "ndjson or directory (default: from the path)")
      ->check(CLI::IsMember({"ndjson", "directory"}));
  cmd->add_option("--registry-url", s.registry_url, "http:// registry base URL instead of a snapshot");
  cmd->add_option("--cache", s.cache, "Cache directory for --registry-url");
}

// Exactly one registry source.
ps_store* open_store(const Source& s, int& exit_code) {
  exit_code = kOk;
  if (s.snapshot.empty() == s.registry_url.empty()) {
    exit_code = report_error("give exactly one of --snapshot or --registry-url");
    return nullptr;
  }
  ps_store* store = nullptr;
  ps_status st;
  if (!s.snapshot.empty()) {
    ps_snapshot_format fmt = std::filesystem::is_directory(s.snapshot) ? PS_SNAPSHOT_DIRECTORY : PS_SNAPSHOT_NDJSON;
    if (s.snapshot_format == "ndjson") fmt = PS_SNAPSHOT_NDJSON;
    if (s.snapshot_format == "directory") fmt = PS_SNAPSHOT_DIRECTORY;
    st = ps_store_open(s.snapshot.c_str(), fmt, &store);
    if (st == PS_OK) {
      for (size_t i = 0; i < ps_store_skipped(store); ++i) {
        std::cerr << "peerspin: skipped: " << ps_store_diagnostic(store, i) << '\n';
      }
    }
  } else {
    st = ps_store_open_remote(s.registry_url.c_str(), s.cache.empty() ? nullptr : s.cache.c_str(), &store);
  }
  if (st != PS_OK) {
    exit_code = report_status(st);
    return nullptr;
  }
  return store;
}

std::pair<std::string, std::string> split_spec(const std::string& text) {
  auto at = text.rfind('@');
  if (at == std::string::npos || at == 0) return {text, "latest"};
  return {text.substr(0, at), text.substr(at + 1)};
}

ps_format format_of(const std::string& f) {
  if (f == "tree-text") return PS_FORMAT_TREE_TEXT;
  if (f == "ndjson") return PS_FORMAT_NDJSON;
  return PS_FORMAT_JSON;
}

bool write_output(const std::string& path, const char* text) {
  if (path.empty()) {
    std::fputs(text, stdout);
    return std::fflush(stdout) == 0;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  f.flush();
  return static_cast<bool>(f);
}

int run_resolution(const Options& o, const std::string& spec, bool include_tree) {
  int code = kOk;
  ps_store* store = open_store(o.source, code);
  if (!store) return code;
  auto [name, range] = split_spec(spec);
  ps_config cfg;
  ps_config_init(&cfg);
  cfg.max_iterations = o.max_iterations;
  cfg.emit_placement_log = o.emit_log.empty() ? 0 : 1;
  ps_outcome* outcome = nullptr;
  auto st = ps_resolve(store, name.c_str(), range.c_str(), &cfg, &outcome);
  if (st != PS_OK) {
    ps_store_free(store);
    return report_status(st);
  }
  char* text = nullptr;
  st = ps_outcome_render(outcome, format_of(o.format), include_tree ? 1 : 0, &text);
  if (st != PS_OK) {
    code = report_status(st);
  } else {
    if (!write_output(o.out, text)) code = report_error("cannot write output");
    ps_string_free(text);
  }
  if (code == kOk && !o.emit_log.empty()) {
    st = ps_outcome_write_log(outcome, o.emit_log.c_str());
    if (st != PS_OK) code = report_status(st);
  }
  if (code == kOk) {
    switch (ps_outcome_verdict(outcome)) {
      case PS_VERDICT_CLEAN: code = kOk; break;
      case PS_VERDICT_PEERSPIN: code = kPeerSpin; break;
      case PS_VERDICT_UNRESOLVABLE: code = kUnresolvable; break;
      case PS_VERDICT_ITERATION_LIMIT: code = kIterationLimit; break;
    }
  }
  ps_outcome_free(outcome);
  ps_store_free(store);
  return code;
}

int run_scan(const Options& o, const std::vector<std::string>& tasks) {
  int code = kOk;
  ps_store* store = open_store(o.source, code);
  if (!store) return code;
  ps_config cfg;
  ps_config_init(&cfg);
  cfg.max_iterations = o.max_iterations;
  std::vector<const char*> raw;
  for (const auto& t : tasks) raw.push_back(t.c_str());
  unsigned jobs = o.jobs ? o.jobs : std::max(1u, std::thread::hardware_concurrency());
  ps_scan_summary summary{};
  auto st = ps_scan(store, raw.data(), raw.size(), jobs, &cfg, o.out.empty() ? nullptr : o.out.c_str(), &summary);
  ps_store_free(store);
  if (st != PS_OK) return report_status(st);
  std::cerr << "scanned " << (summary.peerspin + summary.clean + summary.unresolvable + summary.error +
                              summary.iteration_limit)
            << ": peerspin " << summary.peerspin << ", clean " << summary.clean << ", unresolvable "
            << summary.unresolvable << ", error " << summary.error << ", iteration-limit "
            << summary.iteration_limit << '\n';
  return summary.peerspin > 0 ? kPeerSpin : kOk;
}

int run_stats(const Options& o, const std::string& results, std::size_t top) {
  int code = kOk;
  ps_store* store = open_store(o.source, code);
  if (!store) return code;
  char* json = nullptr;
  auto st = ps_stats(store, results.empty() ? nullptr : results.c_str(), top, &json);
  ps_store_free(store);
  if (st != PS_OK) return report_status(st);
  if (!write_output(o.out, json)) code = report_error("cannot write output");
  ps_string_free(json);
  return code;
}

int run_gen_fixture(const Options& o, const std::string& kind, unsigned intermediates) {
  if (o.out.empty()) return report_error("gen-fixture needs --out <path>");
  ps_snapshot_format fmt = o.source.snapshot_format == "ndjson" ? PS_SNAPSHOT_NDJSON : PS_SNAPSHOT_DIRECTORY;
  char* descriptor = nullptr;
  auto st = ps_gen_fixture(kind.c_str(), intermediates, o.out.c_str(), fmt, &descriptor);
  if (st != PS_OK) return report_status(st);
  std::fputs(descriptor, stdout);
  ps_string_free(descriptor);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Peer-dependency resolution simulator and PeerSpin detector"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* cmd) {
    add_source_flags(cmd, o.source);
    cmd->add_option("--format", o.format, "json, tree-text or ndjson")
        ->check(CLI::IsMember({"json", "tree-text", "ndjson"}));
    cmd->add_option("--max-iterations", o.max_iterations, "Queue pops before giving up")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out, "Write output here instead of standard output");
  };

  std::string spec;
  auto* resolve = app.add_subcommand("resolve", "Resolve one package version and print the tree");
  resolve->add_option("package", spec, "name[@range-or-tag]")->required();
  add_common(resolve);
  resolve->add_option("--emit-log", o.emit_log, "Write the placement log (NDJSON) here");

  auto* detect = app.add_subcommand("detect", "Resolve one package version and report PeerSpin");
  detect->add_option("package", spec, "name[@range-or-tag]")->required();
  add_common(detect);
  detect->add_option("--emit-log", o.emit_log, "Write the placement log (NDJSON) here");

  std::vector<std::string> tasks;
  auto* scan = app.add_subcommand("scan", "Detect across many packages, one NDJSON result per version");
  scan->add_option("tasks", tasks, "name@version or name (all versions); default every package");
  add_common(scan);
  scan->add_option("--jobs", o.jobs, "Worker threads (default: logical processors)")->check(CLI::PositiveNumber);

  std::string results;
  std::size_t top = 5;
  auto* stats = app.add_subcommand("stats", "Peer-dependency usage, yearly and top-dependent statistics");
  add_common(stats);
  stats->add_option("--results", results, "Scan results (NDJSON) for the yearly affected counts");
  stats->add_option("--top", top, "Number of top peer-dependent versions");

  std::string kind;
  unsigned intermediates = 0;
  auto* gen = app.add_subcommand("gen-fixture", "Write a Pattern A/B or motivating-example snapshot");
  gen->add_option("kind", kind, "A, B or motivating")->required();
  gen->add_option("--intermediates", intermediates, "Pass-through packages (0-8)")->check(CLI::Range(0u, 8u));
  gen->add_option("--snapshot-format", o.source.snapshot_format, "ndjson or directory (default directory)")
      ->check(CLI::IsMember({"ndjson", "directory"}));
  gen->add_option("--out", o.out, "Snapshot destination")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "peerspin: " << e.what() << "\nRun 'peerspin --help' for usage.\n";
    return kFailure;
  }

  if (resolve->parsed()) return run_resolution(o, spec, true);
  if (detect->parsed()) return run_resolution(o, spec, false);
  if (scan->parsed()) return run_scan(o, tasks);
  if (stats->parsed()) return run_stats(o, results, top);
  if (gen->parsed()) return run_gen_fixture(o, kind, intermediates);
  return kFailure;
}
