#include <algorithm>

#include "peerspin/scanner.hpp"

namespace peerspin::scanner {

StoreBuilder& StoreBuilder::version(const std::string& name, const std::string& version,
                                    std::map<std::string, std::string> deps,
                                    std::map<std::string, std::string> peers,
                                    std::vector<std::string> optional_peers) {
  auto& p = packuments_[name];
  p.name = name;
  registry::Manifest m;
  m.name = name;
  m.version = semver::parse_version(version);
  for (const auto& [peer, _] : peers) deps.erase(peer);
  m.dependencies = std::move(deps);
  m.peer_dependencies = std::move(peers);
  for (const auto& opt : optional_peers) m.peer_optional[opt] = true;
  auto key = registry::version_key(m.version);
  p.versions[key] = std::move(m);
  return *this;
}

StoreBuilder& StoreBuilder::time(const std::string& name, const std::string& version, const std::string& iso) {
  auto t = registry::parse_timestamp(iso);
  if (!t) throw Error(ErrorCode::InvalidArgument, "bad timestamp " + iso);
  packuments_.at(name).times[registry::version_key(semver::parse_version(version))] = *t;
  return *this;
}

registry::SnapshotStore StoreBuilder::build() const {
  registry::SnapshotStore store;
  for (auto p : packuments_) {
    auto& packument = p.second;
    auto versions = packument.sorted_versions();
    if (!versions.empty()) packument.dist_tags["latest"] = registry::version_key(versions.back());
    store.add(std::move(packument));
  }
  return store;
}

namespace {

std::string mid_name(unsigned i) { return "I" + std::to_string(i); }

void describe(FixtureDescriptor* d, const registry::SnapshotStore& store, std::string root, std::string cycle,
              bool expect) {
  if (!d) return;
  d->root_name = std::move(root);
  d->root_version = "1.0.0";
  d->cycle_package = std::move(cycle);
  d->expect_peerspin = expect;
  d->packages = store.size();
  d->versions = 0;
  for (const auto& [_, p] : store.packuments()) d->versions += p->versions.size();
}

StoreBuilder pattern_builder(Pattern pattern, unsigned intermediates) {
  if (intermediates > 8) throw Error(ErrorCode::InvalidArgument, "at most 8 intermediates are supported");
  StoreBuilder b;
  if (pattern == Pattern::A) {
    // A -> B@^2 ; B@2 -> (I1 -> ... ->) C ; C peer-> B@^1
    b.version("A", "1.0.0", {{"B", "^2.0.0"}});
    std::string first = intermediates == 0 ? "C" : mid_name(1);
    b.version("B", "2.0.0", {{first, "1.0.0"}});
    b.version("B", "1.0.0");
    for (unsigned i = 1; i <= intermediates; ++i) {
      std::string next = i == intermediates ? "C" : mid_name(i + 1);
      b.version(mid_name(i), "1.0.0", {{next, "1.0.0"}});
    }
    b.version("C", "1.0.0", {}, {{"B", "^1.0.0"}});
  } else {
    // A -> B ; B peer-> C@^2 and (I1 peer-> ... peer->) D ; D peer-> C@^1
    b.version("A", "1.0.0", {{"B", "^1.0.0"}});
    std::string first = intermediates == 0 ? "D" : mid_name(1);
    b.version("B", "1.0.0", {}, {{"C", "^2.0.0"}, {first, "1.0.0"}});
    for (unsigned i = 1; i <= intermediates; ++i) {
      std::string next = i == intermediates ? "D" : mid_name(i + 1);
      b.version(mid_name(i), "1.0.0", {}, {{next, "1.0.0"}});
    }
    b.version("D", "1.0.0", {}, {{"C", "^1.0.0"}});
    b.version("C", "1.0.0");
    b.version("C", "2.0.0");
  }
  return b;
}

}  // namespace

registry::SnapshotStore gen_pattern_fixture(Pattern pattern, unsigned intermediates, FixtureDescriptor* descriptor) {
  auto store = pattern_builder(pattern, intermediates).build();
  describe(descriptor, store, "A", pattern == Pattern::A ? "B" : "C", true);
  return store;
}

registry::SnapshotStore gen_motivating_fixture(FixtureDescriptor* descriptor) {
  StoreBuilder b;
  b.version("xydesign", "1.0.0", {{"antd", "^5.0.0"}, {"draft-js", "^0.11.7"}});
  b.version("antd", "5.0.0", {}, {{"react-dom", "^18.0.0"}});
  b.version("react-dom", "18.2.0", {}, {{"react", "^18.2.0"}});
  b.version("draft-js", "0.11.7", {}, {{"react", "^16.0.0"}});
  b.version("react", "16.14.0");
  b.version("react", "18.2.0");
  auto store = b.build();
  describe(descriptor, store, "xydesign", "react", true);
  if (descriptor) descriptor->root_version = "1.0.0";
  return store;
}

namespace {

struct RandomPackage {
  std::string name;
  std::vector<std::string> versions;  // ascending
};

std::string pick_range(std::mt19937_64& rng, const RandomPackage& target, bool newest_only) {
  const auto& v = newest_only ? target.versions.back()
                              : target.versions[std::uniform_int_distribution<std::size_t>(0, target.versions.size() - 1)(rng)];
  return "^" + v;
}

}  // namespace

registry::SnapshotStore gen_random_fixture(std::mt19937_64& rng, const RandomFixtureOptions& options,
                                           FixtureDescriptor* descriptor) {
  std::vector<RandomPackage> pkgs;
  for (std::size_t i = 0; i < options.packages; ++i) {
    RandomPackage p;
    p.name = "pkg-" + std::to_string(i);
    auto count = std::uniform_int_distribution<std::size_t>(1, std::max<std::size_t>(1, options.max_versions))(rng);
    for (std::size_t v = 0; v < count; ++v) p.versions.push_back(std::to_string(v + 1) + ".0.0");
    pkgs.push_back(std::move(p));
  }

  std::bernoulli_distribution is_peer(options.peer_probability);
  auto edges_for = [&](std::size_t from_index) {
    std::map<std::string, std::string> deps, peers;
    if (from_index + 1 >= pkgs.size()) return std::pair{deps, peers};
    auto n = std::uniform_int_distribution<std::size_t>(0, options.max_deps)(rng);
    for (std::size_t k = 0; k < n; ++k) {
      auto target = std::uniform_int_distribution<std::size_t>(from_index + 1, pkgs.size() - 1)(rng);
      const auto& t = pkgs[target];
      if (deps.contains(t.name) || peers.contains(t.name)) continue;
      auto range = pick_range(rng, t, options.conflict_free);
      if (is_peer(rng)) peers[t.name] = range;
      else deps[t.name] = range;
    }
    return std::pair{deps, peers};
  };

  StoreBuilder b;
  // The root only has regular dependencies, on the first few packages.
  std::map<std::string, std::string> root_deps;
  auto root_n = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(3, pkgs.size()))(rng);
  for (std::size_t k = 0; k < root_n && !pkgs.empty(); ++k) {
    auto target = std::uniform_int_distribution<std::size_t>(0, std::min<std::size_t>(pkgs.size() - 1, 3))(rng);
    root_deps[pkgs[target].name] = pick_range(rng, pkgs[target], options.conflict_free);
  }
  b.version("root", "1.0.0", root_deps);
  for (std::size_t i = 0; i < pkgs.size(); ++i) {
    for (const auto& v : pkgs[i].versions) {
      auto [deps, peers] = edges_for(i);
      b.version(pkgs[i].name, v, deps, peers);
    }
  }
  auto store = b.build();
  describe(descriptor, store, "root", "", false);
  return store;
}

registry::SnapshotStore gen_noisy_pattern_fixture(std::mt19937_64& rng, Pattern pattern, unsigned intermediates,
                                                  std::size_t noise, FixtureDescriptor* descriptor) {
  auto b = pattern_builder(pattern, intermediates);
  // Noise: a clean chain/fan of regular dependencies hanging off the root.
  std::map<std::string, std::string> root_deps = pattern == Pattern::A
                                                     ? std::map<std::string, std::string>{{"B", "^2.0.0"}}
                                                     : std::map<std::string, std::string>{{"B", "^1.0.0"}};
  for (std::size_t i = 0; i < noise; ++i) {
    std::string name = "noise-" + std::to_string(i);
    std::map<std::string, std::string> deps;
    if (i + 1 < noise && std::bernoulli_distribution(0.5)(rng)) deps["noise-" + std::to_string(i + 1)] = "^1.0.0";
    b.version(name, "1.0.0", deps);
    b.version(name, "1.1.0", deps);
    if (std::bernoulli_distribution(0.4)(rng)) root_deps[name] = "^1.0.0";
  }
  b.version("A", "1.0.0", root_deps);
  auto store = b.build();
  describe(descriptor, store, "A", pattern == Pattern::A ? "B" : "C", true);
  return store;
}

}  // namespace peerspin::scanner
