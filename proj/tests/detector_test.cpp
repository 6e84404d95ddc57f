#include <doctest.h>

#include <random>

#include "peerspin/detector.hpp"
#include "peerspin/resolver.hpp"
#include "peerspin/scanner.hpp"

using namespace peerspin;
using depmodel::NodeId;
using depmodel::NodeTree;
using depmodel::TreePosition;
using scanner::StoreBuilder;

namespace {

registry::Selection pick(const registry::PackumentSource& s, const std::string& name, const std::string& v) {
  return registry::select_version(s, name, v);
}

// Replaces the root-level `name` with `version` by hand and revalidates.
NodeId swap_at_root(NodeTree& tree, const registry::PackumentSource& store, const std::string& name,
                    const std::string& version) {
  std::set<std::string> touched{name};
  if (auto it = tree.node(tree.root()).children.find(name); it != tree.node(tree.root()).children.end()) {
    for (NodeId gone : tree.remove_subtree(it->second)) touched.insert(tree.node(gone).name);
  }
  NodeId fresh = tree.add_child(tree.root(), pick(store, name, version));
  tree.revalidate_edges(touched);
  return fresh;
}

PlacementLogEntry entry(PlacementType action, std::string name, int major, TreePosition pos) {
  return {0, action, std::move(name), semver::parse_version(std::to_string(major) + ".0.0"), std::move(pos)};
}

std::string key(const PlacementLogEntry& e) {
  return std::string(to_string(e.action)) + " " + e.name + "@" + e.version.to_string() + " " +
         depmodel::to_string(e.position);
}

// Serializes entries into keys and compares the two trailing windows as strings.
bool brute_loop(const std::vector<PlacementLogEntry>& log, std::size_t max_window) {
  std::vector<std::string> keys;
  for (const auto& e : log) keys.push_back(key(e));
  for (std::size_t w = 1; w <= max_window; ++w) {
    if (2 * w > keys.size()) break;
    std::string last, before;
    bool replace = false;
    for (std::size_t i = keys.size() - w; i < keys.size(); ++i) {
      last += keys[i] + "\n";
      replace = replace || log[i].action == PlacementType::Replace;
    }
    for (std::size_t i = keys.size() - 2 * w; i < keys.size() - w; ++i) before += keys[i] + "\n";
    if (last == before && replace) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("ledger counts per (name, version, position)") {
  RiskLedger ledger;
  auto v1 = semver::parse_version("1.0.0");
  auto v2 = semver::parse_version("2.0.0");
  TreePosition root_b{depmodel::kRootLabel, "B"};
  TreePosition nested_b{depmodel::kRootLabel, "X", "B"};
  CHECK(ledger.count("B", v1, root_b) == 0);
  CHECK(ledger.record_position("B", v1, root_b) == 1);
  CHECK(ledger.record_position("B", v1, root_b) == 2);
  CHECK(ledger.record_position("B", v1, nested_b) == 1);
  CHECK(ledger.record_position("B", v2, root_b) == 1);
  CHECK(ledger.count("B", v1, root_b) == 2);
  // Build metadata does not split a key.
  CHECK(ledger.count("B", semver::parse_version("1.0.0+x"), root_b) == 2);
}

TEST_CASE("check_risky recognizes both patterns") {
  SUBCASE("pattern A: the source loses its entry") {
    auto store = scanner::gen_pattern_fixture(scanner::Pattern::A, 0, nullptr);
    NodeTree tree(store, pick(store, "A", "1.0.0"));
    tree.add_child(tree.root(), pick(store, "B", "2.0.0"));
    tree.add_child(tree.root(), pick(store, "C", "1.0.0"));
    tree.revalidate_all();
    NodeId b1 = swap_at_root(tree, store, "B", "1.0.0");
    // B@1 is its own entry: the root's ^2 edge to it no longer holds.
    auto check = check_risky(tree, b1);
    CHECK(check.risky);
    CHECK(check.hint == PatternHint::A);
    CHECK(check.entry == b1);
    CHECK(check.source == tree.root());
  }
  SUBCASE("pattern B: the entry's peer requirement breaks") {
    auto store = scanner::gen_pattern_fixture(scanner::Pattern::B, 0, nullptr);
    NodeTree tree(store, pick(store, "A", "1.0.0"));
    NodeId b = tree.add_child(tree.root(), pick(store, "B", "1.0.0"));
    tree.add_child(tree.root(), pick(store, "C", "2.0.0"));
    tree.add_child(tree.root(), pick(store, "D", "1.0.0"));
    tree.revalidate_all();
    NodeId c1 = swap_at_root(tree, store, "C", "1.0.0");
    auto check = check_risky(tree, c1);
    CHECK(check.risky);
    CHECK(check.hint == PatternHint::B);
    CHECK(check.entry == b);
    CHECK(check.source == tree.root());
  }
  SUBCASE("a swap every dependent accepts is not risky") {
    auto store = StoreBuilder()
                     .version("root", "1.0.0", {{"e", "^1.0.0"}})
                     .version("e", "1.0.0", {}, {{"x", "^1.0.0"}})
                     .version("x", "1.0.0")
                     .version("x", "1.1.0")
                     .build();
    NodeTree tree(store, pick(store, "root", "1.0.0"));
    tree.add_child(tree.root(), pick(store, "e", "1.0.0"));
    tree.add_child(tree.root(), pick(store, "x", "1.0.0"));
    tree.revalidate_all();
    NodeId x = swap_at_root(tree, store, "x", "1.1.0");
    CHECK_FALSE(check_risky(tree, x).risky);

    RiskLedger ledger;
    auto report = on_replace({"x", semver::parse_version("1.0.0")}, x, tree, ledger, 1, 1);
    CHECK_FALSE(report);
    CHECK(ledger.count("x", semver::parse_version("1.1.0"), tree.position(x)) == 0);
    REQUIRE(ledger.trace().size() == 1);
    CHECK_FALSE(ledger.trace()[0].risky);
  }
}

TEST_CASE("on_replace reports on the second risky replacement") {
  auto store = scanner::gen_pattern_fixture(scanner::Pattern::A, 0, nullptr);
  NodeTree tree(store, pick(store, "A", "1.0.0"));
  tree.add_child(tree.root(), pick(store, "B", "2.0.0"));
  tree.add_child(tree.root(), pick(store, "C", "1.0.0"));
  tree.revalidate_all();
  RiskLedger ledger;
  NodeId b1 = swap_at_root(tree, store, "B", "1.0.0");
  CHECK_FALSE(on_replace({"B", semver::parse_version("2.0.0")}, b1, tree, ledger, 5, 3));
  CHECK(ledger.count("B", semver::parse_version("1.0.0"), tree.position(b1)) == 1);

  // The same swap again (the loop came back around).
  swap_at_root(tree, store, "B", "2.0.0");
  b1 = swap_at_root(tree, store, "B", "1.0.0");
  auto report = on_replace({"B", semver::parse_version("2.0.0")}, b1, tree, ledger, 9, 6);
  REQUIRE(report);
  CHECK(report->package == "B");
  CHECK(report->versions[0].to_string() == "1.0.0");
  CHECK(report->versions[1].to_string() == "2.0.0");
  CHECK(report->position == TreePosition{depmodel::kRootLabel, "B"});
  CHECK(report->peer_entry.name == "B");
  CHECK(report->peer_source.name == "A");
  CHECK(report->iterations == 6);
  CHECK(report->trace.size() == 2);
}

TEST_CASE("risky counts only grow during a run") {
  auto store = scanner::gen_motivating_fixture(nullptr);
  Resolver r(store, pick(store, "xydesign", "1.0.0"));
  std::map<std::string, std::uint32_t> last;
  while (r.step()) {
    for (const auto& e : r.ledger().trace()) {
      auto k = e.name + "@" + e.new_version.to_string() + " " + depmodel::to_string(e.position);
      auto c = r.ledger().count(e.name, e.new_version, e.position);
      CHECK(c >= last[k]);
      last[k] = c;
    }
  }
}

TEST_CASE("detection lands within three loop cycles") {
  for (auto pattern : {scanner::Pattern::A, scanner::Pattern::B}) {
    for (unsigned k = 0; k <= 3; ++k) {
      scanner::FixtureDescriptor d;
      auto store = scanner::gen_pattern_fixture(pattern, k, &d);
      auto detected = resolve(store, pick(store, "A", "1.0.0"));
      REQUIRE(detected.verdict() == Verdict::PeerSpin);
      auto detected_at = std::get<PeerSpin>(detected.result).report.iterations;

      ResolutionConfig off;
      off.detector_enabled = false;
      off.max_iterations = 400;
      Resolver r(store, pick(store, "A", "1.0.0"), off);
      std::vector<std::uint64_t> replace_iters;
      std::size_t seen = 0;
      while (r.step()) {
        for (; seen < r.log().size(); ++seen) {
          const auto& e = r.log()[seen];
          if (e.action == PlacementType::Replace && e.name == d.cycle_package) replace_iters.push_back(r.iterations());
        }
      }
      REQUIRE(replace_iters.size() >= 3);
      // The package alternates between two versions: one cycle spans two swaps.
      auto cycle = replace_iters[2] - replace_iters[0];
      CAPTURE(k);
      CHECK(detected_at <= replace_iters[0] + 3 * cycle);
    }
  }
}

TEST_CASE("loop_log_oracle examples") {
  TreePosition root_b{depmodel::kRootLabel, "B"};
  TreePosition root_c{depmodel::kRootLabel, "C"};
  std::vector<PlacementLogEntry> spinning{
      entry(PlacementType::Add, "B", 2, root_b), entry(PlacementType::Add, "C", 1, root_c),
      entry(PlacementType::Replace, "B", 1, root_b), entry(PlacementType::Replace, "B", 2, root_b),
      entry(PlacementType::Add, "C", 1, root_c), entry(PlacementType::Replace, "B", 1, root_b),
      entry(PlacementType::Replace, "B", 2, root_b), entry(PlacementType::Add, "C", 1, root_c),
      entry(PlacementType::Replace, "B", 1, root_b)};
  CHECK(loop_log_oracle(spinning, 256));
  CHECK_FALSE(loop_log_oracle(spinning, 2));

  std::vector<PlacementLogEntry> keeps{entry(PlacementType::Keep, "B", 1, root_b),
                                       entry(PlacementType::Keep, "B", 1, root_b)};
  CHECK_FALSE(loop_log_oracle(keeps, 256));
  CHECK_FALSE(loop_log_oracle({}, 256));

  auto store = scanner::gen_motivating_fixture(nullptr);
  auto clean = scanner::gen_pattern_fixture(scanner::Pattern::A, 0, nullptr);
  auto ok = resolve(clean, pick(clean, "B", "2.0.0"));
  REQUIRE(ok.verdict() == Verdict::Clean);
  CHECK_FALSE(loop_log_oracle(ok.log, 256));
}

TEST_CASE("loop_log_oracle agrees with a brute-force window scan") {
  std::mt19937_64 rng(3);
  const std::vector<TreePosition> positions{{depmodel::kRootLabel, "a"}, {depmodel::kRootLabel, "b"}};
  for (int round = 0; round < 3000; ++round) {
    std::vector<PlacementLogEntry> log;
    auto len = std::uniform_int_distribution<int>(0, 30)(rng);
    auto random_entry = [&] {
      auto action = static_cast<PlacementType>(std::uniform_int_distribution<int>(0, 2)(rng));
      auto name = std::bernoulli_distribution(0.5)(rng) ? "a" : "b";
      return entry(action, name, std::uniform_int_distribution<int>(1, 2)(rng),
                   positions[std::uniform_int_distribution<int>(0, 1)(rng)]);
    };
    for (int i = 0; i < len; ++i) log.push_back(random_entry());
    // Plant a repetition half the time.
    if (std::bernoulli_distribution(0.5)(rng) && !log.empty()) {
      auto w = std::uniform_int_distribution<std::size_t>(1, log.size())(rng);
      std::vector<PlacementLogEntry> tail(log.end() - static_cast<std::ptrdiff_t>(w), log.end());
      log.insert(log.end(), tail.begin(), tail.end());
    }
    auto max_window = std::uniform_int_distribution<std::size_t>(1, 20)(rng);
    CAPTURE(round);
    CHECK(loop_log_oracle(log, max_window) == brute_loop(log, max_window));
  }
}
