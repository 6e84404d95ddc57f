#include "peerspin/scanner.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "json_detail.hpp"

namespace peerspin::scanner {

const char* to_string(ScanVerdict verdict) noexcept {
  switch (verdict) {
    case ScanVerdict::PeerSpin: return "peerspin";
    case ScanVerdict::Clean: return "clean";
    case ScanVerdict::Unresolvable: return "unresolvable";
    case ScanVerdict::Error: return "error";
    case ScanVerdict::IterationLimit: return "iteration-limit";
  }
  return "?";
}

namespace {

std::optional<ScanVerdict> verdict_from(std::string_view text) {
  for (auto v : {ScanVerdict::PeerSpin, ScanVerdict::Clean, ScanVerdict::Unresolvable, ScanVerdict::Error,
                 ScanVerdict::IterationLimit}) {
    if (text == to_string(v)) return v;
  }
  return std::nullopt;
}

}  // namespace

void ScanSummary::add(ScanVerdict v) noexcept {
  switch (v) {
    case ScanVerdict::PeerSpin: ++peerspin; break;
    case ScanVerdict::Clean: ++clean; break;
    case ScanVerdict::Unresolvable: ++unresolvable; break;
    case ScanVerdict::Error: ++error; break;
    case ScanVerdict::IterationLimit: ++iteration_limit; break;
  }
}

std::vector<ScanTask> expand_tasks(const registry::PackumentSource& source, const std::vector<ScanTask>& tasks) {
  std::vector<ScanTask> out;
  for (const auto& t : tasks) {
    if (t.version != "all") {
      out.push_back(t);
      continue;
    }
    auto packument = source.find(t.name);
    if (!packument) {
      out.push_back(t);
      continue;
    }
    auto versions = packument->sorted_versions();
    for (auto it = versions.rbegin(); it != versions.rend(); ++it) out.push_back({t.name, it->to_string()});
  }
  return out;
}

ScanResult scan_one(const registry::PackumentSource& source, const ScanTask& task, const ResolutionConfig& config) {
  ScanResult r;
  r.name = task.name;
  r.version = task.version;
  auto started = std::chrono::steady_clock::now();
  try {
    auto root = registry::select_version(source, task.name, task.version);
    auto outcome = resolve(source, root, config);
    switch (outcome.verdict()) {
      case Verdict::Clean: r.verdict = ScanVerdict::Clean; break;
      case Verdict::PeerSpin:
        r.verdict = ScanVerdict::PeerSpin;
        r.report = std::get<PeerSpin>(outcome.result).report;
        break;
      case Verdict::Unresolvable:
        r.verdict = ScanVerdict::Unresolvable;
        r.diagnostic = std::get<Unresolvable>(outcome.result).diagnostic;
        break;
      case Verdict::IterationLimit:
        r.verdict = ScanVerdict::IterationLimit;
        r.diagnostic = "stopped after " + std::to_string(outcome.iterations) + " iterations";
        break;
    }
  } catch (const std::exception& e) {
    r.verdict = ScanVerdict::Error;
    r.report.reset();
    r.diagnostic = e.what();
  }
  r.elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - started);
  return r;
}

ScanSummary scan_batch(const registry::PackumentSource& source, const std::vector<ScanTask>& tasks, unsigned jobs,
                       const ResolutionConfig& config, const ResultSink& sink) {
  if (jobs == 0) throw Error(ErrorCode::InvalidArgument, "jobs must be positive");
  auto expanded = expand_tasks(source, tasks);
  ScanSummary summary;
  std::mutex sink_mutex;
  std::exception_ptr failure;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};

  auto worker = [&] {
    while (!stop.load()) {
      auto i = next.fetch_add(1);
      if (i >= expanded.size()) return;
      auto result = scan_one(source, expanded[i], config);
      std::lock_guard lock(sink_mutex);
      if (failure) return;
      try {
        if (sink) sink(result);
        summary.add(result.verdict);
      } catch (...) {
        failure = std::current_exception();
        stop = true;
      }
    }
  };

  auto threads = std::min<std::size_t>(jobs, std::max<std::size_t>(expanded.size(), 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return summary;
}

std::string result_to_json(const ScanResult& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["version"] = r.version;
  j["verdict"] = to_string(r.verdict);
  j["elapsed_ms"] = std::chrono::duration<double, std::milli>(r.elapsed).count();
  if (r.report) j["report"] = detail::report_to_json(*r.report);
  if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
  return j.dump();
}

ResultSink ndjson_sink(std::ostream& out) {
  return [&out](const ScanResult& r) {
    out << result_to_json(r) << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::SinkUnwritable, "cannot write scan result for " + r.name + "@" + r.version);
  };
}

std::vector<ScanResult> read_results(std::istream& in) {
  std::vector<ScanResult> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      ScanResult r;
      r.name = j.at("name").get<std::string>();
      r.version = j.at("version").get<std::string>();
      auto verdict = verdict_from(j.at("verdict").get<std::string>());
      if (!verdict) throw Error(ErrorCode::SourceUnreadable, "unknown verdict");
      r.verdict = *verdict;
      r.elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(
          std::chrono::duration<double, std::milli>(j.value("elapsed_ms", 0.0)));
      if (j.contains("report")) r.report = detail::report_from_json(j["report"]);
      r.diagnostic = j.value("diagnostic", "");
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::SourceUnreadable, "results line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace peerspin::scanner
