#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "peerspin/scanner.hpp"
#include "test_support.hpp"

using namespace peerspin;
using namespace peerspin::scanner;
using peerspin::testing::merge_prefixed;

namespace {

struct Collected {
  std::vector<ScanResult> results;
  ResultSink sink() {
    return [this](const ScanResult& r) { results.push_back(r); };
  }
};

std::vector<std::string> verdict_lines(std::vector<ScanResult> results) {
  std::vector<std::string> out;
  for (const auto& r : results) out.push_back(r.name + "@" + r.version + " " + to_string(r.verdict));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("scan_batch over two spinning roots and a clean one") {
  auto a = gen_pattern_fixture(Pattern::A, 0, nullptr);
  auto b = gen_pattern_fixture(Pattern::B, 0, nullptr);
  auto clean = StoreBuilder().version("root", "1.0.0", {{"leaf", "^1.0.0"}}).version("leaf", "1.0.0").build();
  auto store = merge_prefixed({{"a-", &a}, {"b-", &b}, {"c-", &clean}});
  Collected got;
  auto summary = scan_batch(store, {{"a-A", "1.0.0"}, {"b-A", "1.0.0"}, {"c-root", "1.0.0"}}, 2, {}, got.sink());
  CHECK(summary.peerspin == 2);
  CHECK(summary.clean == 1);
  CHECK(summary.total() == 3);
  REQUIRE(got.results.size() == 3);
  for (const auto& r : got.results) {
    if (r.verdict == ScanVerdict::PeerSpin) {
      REQUIRE(r.report);
      CHECK((r.report->package == "a-B" || r.report->package == "b-C"));
    }
  }
}

TEST_CASE("an empty task list scans nothing") {
  auto store = gen_motivating_fixture(nullptr);
  Collected got;
  auto summary = scan_batch(store, {}, 4, {}, got.sink());
  CHECK(summary == ScanSummary{});
  CHECK(got.results.empty());
  CHECK_THROWS_AS(scan_batch(store, {}, 0, {}, got.sink()), Error);
}

TEST_CASE("every task yields exactly one result") {
  auto store = gen_pattern_fixture(Pattern::A, 1, nullptr);
  Collected got;
  std::vector<ScanTask> tasks{{"A", "1.0.0"}, {"missing", "1.0.0"}, {"B", "9.0.0"}, {"B", "all"}};
  auto summary = scan_batch(store, tasks, 3, {}, got.sink());
  CHECK(got.results.size() == 5);
  CHECK(summary.total() == 5);
  CHECK(summary.peerspin == 1);
  CHECK(summary.error == 2);
  auto expanded = expand_tasks(store, {{"B", "all"}});
  REQUIRE(expanded.size() == 2);
  CHECK(expanded[0].version == "2.0.0");
  CHECK(expanded[1].version == "1.0.0");
}

TEST_CASE("verdicts do not depend on the worker count") {
  std::mt19937_64 rng(21);
  std::vector<registry::SnapshotStore> parts;
  for (int i = 0; i < 100; ++i) {
    RandomFixtureOptions opt;
    opt.conflict_free = i % 2 == 0;
    opt.peer_probability = 0.4;
    parts.push_back(gen_random_fixture(rng, opt, nullptr));
  }
  for (int i = 0; i < 6; ++i) parts.push_back(gen_pattern_fixture(i % 2 ? Pattern::A : Pattern::B, i / 2, nullptr));
  std::vector<std::pair<std::string, const registry::SnapshotStore*>> named;
  std::vector<ScanTask> tasks;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    auto prefix = "f" + std::to_string(i) + "-";
    named.emplace_back(prefix, &parts[i]);
    tasks.push_back({prefix + (i < 100 ? "root" : "A"), "1.0.0"});
  }
  auto store = merge_prefixed(named);
  Collected one, eight;
  auto s1 = scan_batch(store, tasks, 1, {}, one.sink());
  auto s8 = scan_batch(store, tasks, 8, {}, eight.sink());
  CHECK(s1 == s8);
  CHECK(s1.peerspin >= 6);
  CHECK(verdict_lines(one.results) == verdict_lines(eight.results));
}

TEST_CASE("sink failures surface as SinkUnwritable") {
  auto store = gen_pattern_fixture(Pattern::A, 0, nullptr);
  std::ostringstream broken;
  broken.setstate(std::ios::badbit);
  try {
    scan_batch(store, {{"A", "1.0.0"}, {"B", "all"}}, 2, {}, ndjson_sink(broken));
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SinkUnwritable);
  }
}

TEST_CASE("results round-trip through NDJSON") {
  auto store = gen_motivating_fixture(nullptr);
  std::ostringstream out;
  auto summary = scan_batch(store, {{"xydesign", "1.0.0"}, {"react", "all"}, {"ghost", "1.0.0"}}, 2, {},
                            ndjson_sink(out));
  CHECK(summary.total() == 4);
  std::istringstream in(out.str() + "\n");
  auto back = read_results(in);
  REQUIRE(back.size() == 4);
  CHECK(verdict_lines(back) ==
        std::vector<std::string>{"ghost@1.0.0 error", "react@16.14.0 clean", "react@18.2.0 clean",
                                 "xydesign@1.0.0 peerspin"});
  for (const auto& r : back) {
    if (r.verdict == ScanVerdict::PeerSpin) {
      REQUIRE(r.report);
      CHECK(r.report->package == "react");
      CHECK(r.report->peer_entry.name == "antd");
      CHECK(result_to_json(r).find("\"report\"") != std::string::npos);
    }
    if (r.verdict == ScanVerdict::Error) CHECK_FALSE(r.diagnostic.empty());
  }
  std::istringstream bad("{\"name\": 3}\n");
  CHECK_THROWS_AS(read_results(bad), Error);
}

TEST_CASE("peer usage fraction") {
  auto store = StoreBuilder()
                   .version("a", "1.0.0", {}, {{"b", "^1.0.0"}})
                   .version("b", "1.0.0", {{"c", "^1.0.0"}})
                   .version("c", "1.0.0")
                   .version("c", "2.0.0", {}, {{"a", "^1.0.0"}})
                   .version("d", "1.0.0")
                   .build();
  auto stats = peer_usage_stats(store);
  CHECK(stats.packages == 4);
  CHECK(stats.packages_with_peers == 2);
  CHECK(stats.peer_usage_fraction == doctest::Approx(0.5));
  CHECK(stats.versions == 5);
  CHECK(stats.versions_by_category.at(DepCategory::HasPeer) == 2);
  CHECK(stats.versions_by_category.at(DepCategory::RegularOnly) == 1);
  CHECK(stats.versions_by_category.at(DepCategory::None) == 2);

  CHECK(peer_usage_stats(StoreBuilder().version("x", "1.0.0").build()).peer_usage_fraction == 0.0);
  CHECK(peer_usage_stats(StoreBuilder().version("x", "1.0.0", {}, {{"y", "1"}}).build()).peer_usage_fraction ==
        1.0);
  CHECK(peer_usage_stats(registry::SnapshotStore{}).peer_usage_fraction == 0.0);
}

TEST_CASE("yearly affected counts") {
  auto store = StoreBuilder()
                   .version("p", "1.0.0")
                   .version("p", "2.0.0")
                   .version("q", "1.0.0", {}, {{"p", "^1.0.0"}})
                   .version("q", "2.0.0")
                   .time("p", "1.0.0", "2020-01-15T00:00:00.000Z")
                   .time("p", "2.0.0", "2020-11-30T23:59:59.000Z")
                   .time("q", "1.0.0", "2021-03-01T08:00:00Z")
                   .build();
  auto result = [](std::string n, std::string v, ScanVerdict verdict) {
    ScanResult r;
    r.name = std::move(n);
    r.version = std::move(v);
    r.verdict = verdict;
    return r;
  };
  std::vector<ScanResult> results{result("p", "1.0.0", ScanVerdict::PeerSpin),
                                  result("p", "2.0.0", ScanVerdict::PeerSpin),
                                  result("q", "1.0.0", ScanVerdict::PeerSpin),
                                  result("q", "2.0.0", ScanVerdict::PeerSpin),
                                  result("p", "1.0.0", ScanVerdict::PeerSpin)};
  auto stats = yearly_affected_counts(store, results);
  REQUIRE(stats.yearly.size() == 2);
  CHECK(stats.yearly.at(2020) == YearBucket{2, 0, 2});
  CHECK(stats.yearly.at(2021) == YearBucket{1, 1, 1});
  CHECK(stats.skipped_undated == 1);
  CHECK(stats.skipped_affected == 1);
}

TEST_CASE("top peer dependents") {
  auto store = StoreBuilder()
                   .version("react", "16.14.0")
                   .version("react", "18.2.0")
                   .version("ui", "1.0.0", {}, {{"react", "^18.0.0"}})
                   .version("forms", "1.0.0", {}, {{"react", ">=16.8.0"}})
                   .version("charts", "2.0.0", {}, {{"react", "18.x"}})
                   .version("vue-thing", "1.0.0", {}, {{"vue", "^3.0.0"}})
                   .version("vue", "3.0.0")
                   .build();
  auto top = top_peer_dependents(store, 5);
  REQUIRE(top.size() == 3);
  CHECK(top[0].name == "react");
  CHECK(top[0].version.to_string() == "18.2.0");
  CHECK(top[0].count == 3);
  CHECK(top[1].name == "react");
  CHECK(top[1].count == 1);
  CHECK(top[2].name == "vue");
  CHECK(top_peer_dependents(store, 0).empty());
  CHECK(top_peer_dependents(StoreBuilder().version("solo", "1.0.0").build(), 5).empty());
}

TEST_CASE("statistics agree with brute-force oracles on random stores") {
  std::mt19937_64 rng(99);
  for (int round = 0; round < 60; ++round) {
    auto f = peerspin::testing::random_stats_fixture(rng, std::uniform_int_distribution<int>(1, 50)(rng));
    CHECK(peer_usage_stats(f.store).peer_usage_fraction ==
          doctest::Approx(peerspin::testing::oracle_peer_fraction(f.store)));
    CHECK(yearly_affected_counts(f.store, f.results).yearly == peerspin::testing::oracle_yearly(f));
    for (std::size_t n : {0u, 1u, 5u, 1000u}) {
      auto got = top_peer_dependents(f.store, n);
      auto want = peerspin::testing::oracle_top_dependents(f.store, n);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].name == want[i].name);
        CHECK(got[i].version == want[i].version);
        CHECK(got[i].count == want[i].count);
      }
    }
  }
}

TEST_CASE("fixture shapes") {
  FixtureDescriptor d;
  auto a0 = gen_pattern_fixture(Pattern::A, 0, &d);
  CHECK(d.packages == 3);
  CHECK(d.versions == 4);
  CHECK(d.cycle_package == "B");
  CHECK(d.expect_peerspin);
  gen_pattern_fixture(Pattern::B, 0, &d);
  CHECK(d.packages == 4);
  CHECK(d.cycle_package == "C");
  auto a2 = gen_pattern_fixture(Pattern::A, 2, &d);
  CHECK(d.packages == 5);
  CHECK(resolve(a2, "A", "1.0.0").verdict() == Verdict::PeerSpin);
  CHECK_THROWS_AS(gen_pattern_fixture(Pattern::A, 9, nullptr), Error);
  gen_motivating_fixture(&d);
  CHECK(d.root_name == "xydesign");
  CHECK(d.packages == 5);
  CHECK(d.versions == 6);
  (void)a0;
}
