#include <algorithm>
#include <set>

#include "peerspin/scanner.hpp"

namespace peerspin::scanner {

DepCategory categorize(const registry::Manifest& m) {
  if (!m.peer_dependencies.empty()) return DepCategory::HasPeer;
  if (!m.dependencies.empty()) return DepCategory::RegularOnly;
  return DepCategory::None;
}

UsageStats peer_usage_stats(const registry::SnapshotStore& store) {
  UsageStats s;
  for (auto c : {DepCategory::None, DepCategory::RegularOnly, DepCategory::HasPeer}) s.versions_by_category[c] = 0;
  for (const auto& [_, p] : store.packuments()) {
    ++s.packages;
    bool any_peer = false;
    for (const auto& [__, m] : p->versions) {
      ++s.versions;
      auto c = categorize(m);
      ++s.versions_by_category[c];
      any_peer = any_peer || c == DepCategory::HasPeer;
    }
    if (any_peer) ++s.packages_with_peers;
  }
  s.peer_usage_fraction = s.packages == 0 ? 0.0 : static_cast<double>(s.packages_with_peers) / s.packages;
  return s;
}

YearlyStats yearly_affected_counts(const registry::SnapshotStore& store, const std::vector<ScanResult>& results) {
  YearlyStats s;
  for (const auto& [_, p] : store.packuments()) {
    for (const auto& [key, m] : p->versions) {
      auto t = p->released_at(m.version);
      if (!t) {
        ++s.skipped_undated;
        continue;
      }
      auto& bucket = s.yearly[registry::year_of(*t)];
      ++bucket.released;
      if (categorize(m) == DepCategory::HasPeer) ++bucket.with_peers;
    }
  }
  // A version scanned twice still counts once.
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : results) {
    if (r.verdict != ScanVerdict::PeerSpin) continue;
    auto v = semver::try_parse_version(r.version);
    auto p = store.find(r.name);
    if (!v || !p || !p->find(*v)) continue;
    if (!seen.emplace(r.name, registry::version_key(*v)).second) continue;
    auto t = p->released_at(*v);
    if (!t) {
      ++s.skipped_affected;
      continue;
    }
    ++s.yearly[registry::year_of(*t)].peerspin_affected;
  }
  return s;
}

std::vector<PeerDependentRank> top_peer_dependents(const registry::SnapshotStore& store, std::size_t n) {
  std::map<std::pair<std::string, std::string>, PeerDependentRank> counts;
  for (const auto& [_, dependent] : store.packuments()) {
    for (const auto& [__, m] : dependent->versions) {
      for (const auto& [peer, spec] : m.peer_dependencies) {
        if (peer == m.name) continue;
        auto target = store.find(peer);
        if (!target) continue;
        auto range = semver::try_parse_range(spec);
        if (!range) continue;
        for (const auto& [key, tm] : target->versions) {
          if (!range->satisfied_by(tm.version)) continue;
          auto& slot = counts[{peer, key}];
          slot.name = peer;
          slot.version = tm.version;
          ++slot.count;
        }
      }
    }
  }
  std::vector<PeerDependentRank> ranked;
  for (auto& [_, r] : counts) ranked.push_back(std::move(r));
  std::sort(ranked.begin(), ranked.end(), [](const PeerDependentRank& a, const PeerDependentRank& b) {
    if (a.count != b.count) return a.count > b.count;
    if (a.name != b.name) return a.name < b.name;
    return a.version < b.version;
  });
  if (ranked.size() > n) ranked.resize(n);
  return ranked;
}

}  // namespace peerspin::scanner
