#include <doctest.h>

#include <functional>
#include <random>

#include "peerspin/render.hpp"
#include "peerspin/resolver.hpp"
#include "peerspin/scanner.hpp"

using namespace peerspin;
using depmodel::kNoNode;
using depmodel::NodeId;
using depmodel::NodeTree;
using scanner::StoreBuilder;

namespace {

registry::Selection pick(const registry::PackumentSource& s, const std::string& name, const std::string& v) {
  return registry::select_version(s, name, v);
}

std::optional<NodeId> find_live(const NodeTree& tree, const std::string& name) {
  for (NodeId id : tree.live_nodes()) {
    if (tree.node(id).name == name) return id;
  }
  return std::nullopt;
}

const NodeTree& success_tree(const ResolutionOutcome& o) {
  REQUIRE(o.verdict() == Verdict::Clean);
  return *std::get<Success>(o.result).tree;
}

// Copies `from` into a fresh tree, leaving out the subtree of `skip`.
NodeTree copy_without(const registry::PackumentSource& store, const NodeTree& from, NodeId skip,
                      std::map<NodeId, NodeId>& mapping) {
  NodeTree out(store, from.node(from.root()).source);
  mapping[from.root()] = out.root();
  std::function<void(NodeId)> walk = [&](NodeId id) {
    for (const auto& [_, child] : from.node(id).children) {
      if (child == skip) continue;
      mapping[child] = out.add_child(mapping.at(id), from.node(child).source);
      walk(child);
    }
  };
  walk(from.root());
  out.revalidate_all();
  return out;
}

bool all_edges_valid(const NodeTree& tree) {
  for (NodeId id : tree.live_nodes()) {
    for (const auto& e : tree.node(id).edges_out) {
      if (e.status != depmodel::EdgeStatus::Valid) return false;
    }
  }
  return true;
}

// Shallowest directory on the requester's ancestor path at which an empty-slot
// add of the node (with its subtree) leaves every edge in the tree valid.
NodeId shallowest_valid_dir(const registry::PackumentSource& store, const NodeTree& tree, NodeId node) {
  NodeId requester = kNoNode;
  for (const auto& ref : tree.in_edges(node)) {
    if (tree.edge(ref).kind == depmodel::EdgeKind::Regular) {
      requester = ref.from;
      break;
    }
  }
  REQUIRE(requester != kNoNode);
  std::vector<NodeId> dirs;
  for (NodeId d = requester; d != kNoNode; d = tree.node(d).parent) dirs.push_back(d);
  std::reverse(dirs.begin(), dirs.end());
  for (NodeId dir : dirs) {
    std::map<NodeId, NodeId> mapping;
    auto copy = copy_without(store, tree, node, mapping);
    if (copy.node(mapping.at(dir)).children.contains(tree.node(node).name)) continue;
    // The node moves together with its nested dependencies.
    std::function<void(NodeId, NodeId)> graft = [&](NodeId src, NodeId parent) {
      NodeId id = copy.add_child(parent, tree.node(src).source);
      for (const auto& [_, child] : tree.node(src).children) graft(child, id);
    };
    graft(node, mapping.at(dir));
    copy.revalidate_all();
    if (all_edges_valid(copy)) return dir;
  }
  return kNoNode;
}

Candidate candidate(const registry::Selection& sel, const semver::VersionRange& req) { return {sel, &req, nullptr}; }

}  // namespace

TEST_CASE("pattern fixtures and the motivating example spin") {
  for (auto pattern : {scanner::Pattern::A, scanner::Pattern::B}) {
    for (unsigned k = 0; k <= 3; ++k) {
      scanner::FixtureDescriptor d;
      auto store = scanner::gen_pattern_fixture(pattern, k, &d);
      auto o = resolve(store, pick(store, d.root_name, d.root_version));
      REQUIRE(o.verdict() == Verdict::PeerSpin);
      const auto& report = std::get<PeerSpin>(o.result).report;
      CHECK(report.package == d.cycle_package);
      CHECK(report.versions.size() == 2);
      CHECK(report.pattern_hint == (pattern == scanner::Pattern::A ? PatternHint::A : PatternHint::B));
    }
  }
  scanner::FixtureDescriptor d;
  auto store = scanner::gen_motivating_fixture(&d);
  auto o = resolve(store, pick(store, "xydesign", "1.0.0"));
  REQUIRE(o.verdict() == Verdict::PeerSpin);
  const auto& report = std::get<PeerSpin>(o.result).report;
  CHECK(report.package == "react");
  CHECK(report.versions[0].to_string() == "16.14.0");
  CHECK(report.versions[1].to_string() == "18.2.0");
  CHECK(report.peer_source.name == "xydesign");
  CHECK(report.peer_entry.name == "antd");
  CHECK(report.position == depmodel::TreePosition{depmodel::kRootLabel, "react"});
}

TEST_CASE("trivial trees") {
  auto store = StoreBuilder().version("solo", "1.0.0").version("host", "1.0.0", {{"dep", "^1.0.0"}})
                   .version("dep", "1.0.0").build();
  auto solo = resolve(store, pick(store, "solo", "1.0.0"));
  CHECK(success_tree(solo).live_count() == 1);
  auto host = resolve(store, pick(store, "host", "1.0.0"));
  const auto& tree = success_tree(host);
  CHECK(tree.live_count() == 2);
  CHECK(tree.node(tree.root()).children.contains("dep"));

  auto missing = resolve(store, "nope", "latest");
  CHECK(missing.verdict() == Verdict::Unresolvable);
  CHECK_THROWS_AS(Resolver(store, pick(store, "solo", "1.0.0"), ResolutionConfig{0}), Error);
}

TEST_CASE("load_nodes on Pattern A binds the visible version") {
  auto store = scanner::gen_pattern_fixture(scanner::Pattern::A, 0, nullptr);
  Resolver r(store, pick(store, "A", "1.0.0"));
  REQUIRE(r.step());
  NodeId b = r.tree().node(r.tree().root()).children.at("B");
  CHECK(r.tree().node(b).version.to_string() == "2.0.0");
  auto groups = r.load_nodes(b);
  REQUIRE(groups.size() == 1);
  const auto& set = groups[0].peer_set;
  CHECK(set.entry.manifest->name == "C");
  CHECK(set.members.empty());
  REQUIRE(set.context_bound.contains("B"));
  CHECK(set.context_bound.at("B").to_string() == "2.0.0");
  REQUIRE(set.conflicts.size() == 1);
  CHECK(set.conflicts[0].to == "B");

  CHECK(r.load_nodes(r.tree().root()).empty());
}

TEST_CASE("can_place classifications") {
  auto store = StoreBuilder()
                   .version("root", "1.0.0", {{"x", "^1.0.0"}})
                   .version("x", "1.0.0")
                   .version("x", "1.1.0")
                   .version("x", "2.0.0")
                   .version("y", "1.0.0")
                   .build();
  Resolver r(store, pick(store, "root", "1.0.0"));
  r.run();
  const auto& tree = r.tree();
  NodeId root = tree.root();
  NodeId x = tree.node(root).children.at("x");
  CHECK(tree.node(x).version.to_string() == "1.1.0");

  auto caret1 = semver::parse_range("^1.0.0");
  auto caret2 = semver::parse_range("^2.0.0");
  auto x1 = pick(store, "x", "1.0.0");
  auto x2 = pick(store, "x", "2.0.0");
  auto y = pick(store, "y", "1.0.0");
  CHECK(r.can_place(candidate(x1, caret1), root, root) == PlacementType::Keep);
  CHECK(r.can_place(candidate(x2, caret2), root, root) == PlacementType::Replace);
  CHECK(r.can_place(candidate(y, caret1), root, root) == PlacementType::Add);
  // Hoisting x@2 above x would evict a version the root still needs.
  CHECK(r.can_place(candidate(x2, caret2), root, x) == PlacementType::Conflict);
  CHECK(r.can_place(candidate(x2, caret2), x, x) == PlacementType::Add);
}

TEST_CASE("nodes land in the shallowest valid directory") {
  std::vector<std::pair<registry::SnapshotStore, std::string>> cases;
  cases.emplace_back(StoreBuilder()
                         .version("A", "1.0.0", {{"B", "^1.0.0"}})
                         .version("B", "1.0.0", {{"C", "^1.0.0"}})
                         .version("C", "1.0.0", {{"E", "^1.0.0"}})
                         .version("E", "1.0.0")
                         .build(),
                     "A");
  cases.emplace_back(StoreBuilder()
                         .version("R", "1.0.0", {{"B", "^1.0.0"}, {"C", "^1.0.0"}})
                         .version("B", "1.0.0", {{"C", "^2.0.0"}})
                         .version("C", "1.0.0")
                         .version("C", "2.0.0")
                         .build(),
                     "R");
  cases.emplace_back(StoreBuilder()
                         .version("R", "1.0.0", {{"B", "^1.0.0"}, {"D", "^1.0.0"}})
                         .version("B", "1.0.0", {{"C", "^1.0.0"}})
                         .version("D", "1.0.0", {{"C", "^2.0.0"}, {"F", "^1.0.0"}})
                         .version("F", "1.0.0", {{"C", "^2.0.0"}})
                         .version("C", "1.0.0")
                         .version("C", "2.0.0")
                         .build(),
                     "R");
  for (const auto& [store, root] : cases) {
    auto o = resolve(store, pick(store, root, "1.0.0"));
    const auto& tree = success_tree(o);
    for (NodeId id : tree.live_nodes()) {
      if (id == tree.root()) continue;
      CAPTURE(depmodel::to_string(tree.position(id)));
      CHECK(tree.node(id).parent == shallowest_valid_dir(store, tree, id));
    }
  }
  // Case two: C@2 is nested under B, C@1 stays at the root.
  const auto& [store, root] = cases[1];
  auto o = resolve(store, pick(store, root, "1.0.0"));
  const auto& tree = success_tree(o);
  NodeId b = tree.node(tree.root()).children.at("B");
  CHECK(tree.node(tree.node(b).children.at("C")).version.to_string() == "2.0.0");
  CHECK(tree.node(tree.node(tree.root()).children.at("C")).version.to_string() == "1.0.0");
}

TEST_CASE("a KEEP placement leaves the tree untouched") {
  auto store = StoreBuilder()
                   .version("root", "1.0.0", {{"x", "^1.0.0"}, {"y", "^1.0.0"}})
                   .version("x", "1.0.0", {{"y", "^1.0.0"}})
                   .version("y", "1.0.0")
                   .version("y", "1.2.0")
                   .build();
  Resolver r(store, pick(store, "root", "1.0.0"));
  r.run();
  auto keep_alias = std::shared_ptr<const NodeTree>(&r.tree(), [](const NodeTree*) {});
  ResolutionOutcome o;
  o.result = Success{keep_alias};
  auto before = render::outcome(o, render::Format::Json);
  auto live_before = r.tree().live_count();

  auto req = semver::parse_range("^1.0.0");
  auto placed = r.place(candidate(pick(store, "y", "1.0.0"), req), r.tree().root());
  CHECK(placed.type == PlacementType::Keep);
  CHECK(r.tree().node(placed.node).version.to_string() == "1.2.0");
  CHECK(r.log().back().action == PlacementType::Keep);
  CHECK(render::outcome(o, render::Format::Json) == before);
  CHECK(r.tree().live_count() == live_before);
}

TEST_CASE("motivating example: the first REPLACE prunes react-dom and revisits antd") {
  auto store = scanner::gen_motivating_fixture(nullptr);
  Resolver r(store, pick(store, "xydesign", "1.0.0"));
  auto replaced = [&] {
    return std::any_of(r.log().begin(), r.log().end(),
                       [](const PlacementLogEntry& e) { return e.action == PlacementType::Replace; });
  };
  while (!replaced()) REQUIRE(r.step());
  const auto& tree = r.tree();
  CHECK_FALSE(find_live(tree, "react-dom"));
  NodeId react = tree.node(tree.root()).children.at("react");
  CHECK(tree.node(react).version.to_string() == "16.14.0");
  NodeId antd = tree.node(tree.root()).children.at("antd");
  CHECK(std::find(r.queue().begin(), r.queue().end(), antd) != r.queue().end());
  CHECK(r.ledger().trace().size() == 1);
  CHECK(r.ledger().trace()[0].risky);
}

TEST_CASE("prune cascades through peer-only members") {
  auto store = StoreBuilder()
                   .version("root", "1.0.0", {{"W", "^1.0.0"}})
                   .version("W", "1.0.0", {{"X", "^1.0.0"}})
                   .version("X", "1.0.0", {}, {{"V", "^1.0.0"}})
                   .version("V", "1.0.0", {}, {{"Y", "^1.0.0"}})
                   .version("Y", "1.0.0")
                   .version("Y", "2.0.0")
                   .build();
  Resolver r(store, pick(store, "root", "1.0.0"));
  auto caret1 = semver::parse_range("^1.0.0");
  auto caret2 = semver::parse_range("^2.0.0");
  const NodeId root = r.tree().root();
  for (const auto* name : {"W", "X", "V", "Y"}) {
    CHECK(r.place(candidate(pick(store, name, "1.0.0"), caret1), root).type == PlacementType::Add);
  }
  REQUIRE(all_edges_valid(r.tree()));
  NodeId x = r.tree().node(root).children.at("X");
  NodeId v = r.tree().node(root).children.at("V");

  auto placed = r.place(candidate(pick(store, "Y", "2.0.0"), caret2), root);
  CHECK(placed.type == PlacementType::Replace);
  CHECK_FALSE(placed.report);
  CHECK_FALSE(r.tree().alive(v));
  CHECK(r.tree().alive(x));
  CHECK(r.invalidated().contains(x));
  // Nothing reaches the new Y once V is gone.
  CHECK_FALSE(find_live(r.tree(), "Y"));
  CHECK(r.tree().check_well_formed().empty());

  r.update_queue({}, r.invalidated());
  CHECK(std::count(r.queue().begin(), r.queue().end(), x) == 1);
}

TEST_CASE("update_queue skips nodes already pending") {
  auto store = StoreBuilder().version("root", "1.0.0", {{"a", "^1.0.0"}, {"b", "^1.0.0"}})
                   .version("a", "1.0.0").version("b", "1.0.0").build();
  Resolver r(store, pick(store, "root", "1.0.0"));
  REQUIRE(r.step());
  auto size = r.queue().size();
  CHECK(size == 2);
  NodeId a = r.tree().node(r.tree().root()).children.at("a");
  NodeId b = r.tree().node(r.tree().root()).children.at("b");
  r.update_queue({a, b, a}, {a});
  CHECK(r.queue().size() == size);
  // Position order: a before b.
  CHECK(r.queue()[0] == a);
  CHECK(r.queue()[1] == b);
}

TEST_CASE("resolution is deterministic") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 40; ++i) {
    scanner::RandomFixtureOptions opt;
    opt.peer_probability = 0.4;
    auto store = scanner::gen_random_fixture(rng, opt, nullptr);
    auto a = resolve(store, pick(store, "root", "1.0.0"));
    auto b = resolve(store, pick(store, "root", "1.0.0"));
    CHECK(a.verdict() == b.verdict());
    CHECK(render::placement_log_ndjson(a.log) == render::placement_log_ndjson(b.log));
    CHECK(render::outcome(a, render::Format::Json) == render::outcome(b, render::Format::Json));
  }
}

TEST_CASE("with the detector off, pattern fixtures loop until the cap") {
  ResolutionConfig cfg;
  cfg.detector_enabled = false;
  cfg.max_iterations = 2000;
  for (auto pattern : {scanner::Pattern::A, scanner::Pattern::B}) {
    auto store = scanner::gen_pattern_fixture(pattern, 1, nullptr);
    auto o = resolve(store, pick(store, "A", "1.0.0"), cfg);
    REQUIRE(o.verdict() == Verdict::IterationLimit);
    CHECK(o.iterations == 2000);
    CHECK_FALSE(std::get<IterationLimitExceeded>(o.result).tail.empty());
    CHECK(loop_log_oracle(o.log, 256));
  }
}

TEST_CASE("clean resolutions pass the success verifier") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    scanner::RandomFixtureOptions opt;
    opt.conflict_free = true;
    opt.peer_probability = 0.5;
    auto store = scanner::gen_random_fixture(rng, opt, nullptr);
    ResolutionConfig cfg;
    cfg.debug_checks = true;
    auto o = resolve(store, pick(store, "root", "1.0.0"), cfg);
    const auto& tree = success_tree(o);
    auto problems = verify_success_tree(tree);
    CHECK_MESSAGE(problems.empty(), (problems.empty() ? "" : problems.front()));
  }
}

TEST_CASE("the success verifier flags broken edges") {
  auto store = StoreBuilder().version("root", "1.0.0", {{"x", "^2.0.0"}}).version("x", "1.0.0").build();
  NodeTree tree(store, pick(store, "root", "1.0.0"));
  CHECK_FALSE(verify_success_tree(tree).empty());
  tree.add_child(tree.root(), pick(store, "x", "1.0.0"));
  tree.revalidate_all();
  auto problems = verify_success_tree(tree);
  REQUIRE(problems.size() == 1);
  CHECK(problems[0].find("invalid") != std::string::npos);
}
