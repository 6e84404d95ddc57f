#include "peerspin/render.hpp"

#include <sstream>

#include "json_detail.hpp"

namespace peerspin {

namespace detail {

namespace {

nlohmann::ordered_json position_json(const depmodel::TreePosition& pos) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& p : pos) out.push_back(p);
  return out;
}

nlohmann::ordered_json ref_json(const PackageRef& ref) {
  return {{"name", ref.name}, {"version", ref.version.to_string()}};
}

}  // namespace

nlohmann::ordered_json report_to_json(const PeerSpinReport& report) {
  nlohmann::ordered_json j;
  j["package"] = report.package;
  auto versions = nlohmann::ordered_json::array();
  for (const auto& v : report.versions) versions.push_back(v.to_string());
  j["versions"] = versions;
  j["position"] = position_json(report.position);
  j["peerSource"] = ref_json(report.peer_source);
  j["peerEntry"] = ref_json(report.peer_entry);
  j["patternHint"] = to_string(report.pattern_hint);
  j["iterations"] = report.iterations;
  auto trace = nlohmann::ordered_json::array();
  for (const auto& e : report.trace) {
    trace.push_back({{"seq", e.seq},
                     {"name", e.name},
                     {"from", e.old_version.to_string()},
                     {"to", e.new_version.to_string()},
                     {"position", position_json(e.position)},
                     {"risky", e.risky}});
  }
  j["trace"] = trace;
  return j;
}

nlohmann::ordered_json log_entry_to_json(const PlacementLogEntry& entry) {
  return {{"seq", entry.seq},
          {"action", to_string(entry.action)},
          {"name", entry.name},
          {"version", entry.version.to_string()},
          {"position", position_json(entry.position)}};
}

namespace {

depmodel::TreePosition position_from(const nlohmann::json& j) { return j.get<depmodel::TreePosition>(); }

PackageRef ref_from(const nlohmann::json& j) {
  return {j.at("name").get<std::string>(), semver::parse_version(j.at("version").get<std::string>())};
}

}  // namespace

PeerSpinReport report_from_json(const nlohmann::json& j) {
  PeerSpinReport r;
  r.package = j.at("package").get<std::string>();
  for (const auto& v : j.at("versions")) r.versions.push_back(semver::parse_version(v.get<std::string>()));
  r.position = position_from(j.at("position"));
  r.peer_source = ref_from(j.at("peerSource"));
  r.peer_entry = ref_from(j.at("peerEntry"));
  auto hint = j.at("patternHint").get<std::string>();
  r.pattern_hint = hint == "A" ? PatternHint::A : hint == "B" ? PatternHint::B : PatternHint::Unknown;
  r.iterations = j.at("iterations").get<std::uint64_t>();
  for (const auto& e : j.at("trace")) {
    ReplacementEvent ev;
    ev.seq = e.at("seq").get<std::uint64_t>();
    ev.name = e.at("name").get<std::string>();
    ev.old_version = semver::parse_version(e.at("from").get<std::string>());
    ev.new_version = semver::parse_version(e.at("to").get<std::string>());
    ev.position = position_from(e.at("position"));
    ev.risky = e.at("risky").get<bool>();
    r.trace.push_back(std::move(ev));
  }
  return r;
}

}  // namespace detail

namespace render {

namespace {

using detail::report_to_json;
using depmodel::NodeId;
using depmodel::NodeTree;

nlohmann::ordered_json node_json(const NodeTree& tree, NodeId id) {
  const auto& n = tree.node(id);
  nlohmann::ordered_json j;
  j["name"] = n.name;
  j["version"] = n.version.to_string();
  auto edges = nlohmann::ordered_json::array();
  for (const auto& e : n.edges_out) {
    edges.push_back({{"name", e.to_name},
                     {"spec", e.spec},
                     {"kind", depmodel::to_string(e.kind)},
                     {"status", depmodel::to_string(e.status)}});
  }
  j["edges"] = edges;
  auto children = nlohmann::ordered_json::object();
  for (const auto& [name, child] : n.children) children[name] = node_json(tree, child);
  j["children"] = children;
  return j;
}

void tree_text(const NodeTree& tree, NodeId id, std::size_t depth, std::ostringstream& out) {
  const auto& n = tree.node(id);
  out << std::string(depth * 2, ' ') << n.name << '@' << n.version.to_string() << '\n';
  for (const auto& [_, child] : n.children) tree_text(tree, child, depth + 1, out);
}

void tree_ndjson(const NodeTree& tree, NodeId id, std::ostringstream& out) {
  const auto& n = tree.node(id);
  auto pos = nlohmann::ordered_json::array();
  for (const auto& p : tree.position(id)) pos.push_back(p);
  nlohmann::ordered_json line{{"position", pos}, {"name", n.name}, {"version", n.version.to_string()}};
  out << line.dump() << '\n';
  for (const auto& [_, child] : n.children) tree_ndjson(tree, child, out);
}

nlohmann::ordered_json payload_json(const ResolutionOutcome& o) {
  nlohmann::ordered_json j;
  if (const auto* s = std::get_if<PeerSpin>(&o.result)) return report_to_json(s->report);
  j["outcome"] = to_string(o.verdict());
  j["iterations"] = o.iterations;
  if (const auto* u = std::get_if<Unresolvable>(&o.result)) j["diagnostic"] = u->diagnostic;
  if (const auto* l = std::get_if<IterationLimitExceeded>(&o.result)) {
    auto tail = nlohmann::ordered_json::array();
    for (const auto& e : l->tail) tail.push_back(detail::log_entry_to_json(e));
    j["tail"] = tail;
  }
  return j;
}

}  // namespace

std::optional<Format> parse_format(std::string_view text) {
  if (text == "json") return Format::Json;
  if (text == "tree-text") return Format::TreeText;
  if (text == "ndjson") return Format::Ndjson;
  return std::nullopt;
}

std::string report_json(const PeerSpinReport& report, bool pretty) {
  return pretty ? report_to_json(report).dump(2) : report_to_json(report).dump();
}

std::string outcome(const ResolutionOutcome& o, Format format, bool include_tree) {
  const auto* success = std::get_if<Success>(&o.result);
  std::ostringstream out;
  if (!success || !include_tree) {
    if (format == Format::Json) return payload_json(o).dump(2) + "\n";
    if (format == Format::Ndjson) return payload_json(o).dump() + "\n";
    out << to_string(o.verdict());
    if (const auto* s = std::get_if<PeerSpin>(&o.result)) {
      const auto& r = s->report;
      out << ": " << r.package;
      for (std::size_t i = 0; i < r.versions.size(); ++i) out << (i ? " <-> " : " ") << r.versions[i].to_string();
      out << " at " << depmodel::to_string(r.position) << " (source " << r.peer_source.name << '@'
          << r.peer_source.version.to_string() << ", entry " << r.peer_entry.name << '@'
          << r.peer_entry.version.to_string() << ", pattern " << to_string(r.pattern_hint) << ")";
    } else if (const auto* u = std::get_if<Unresolvable>(&o.result)) {
      out << ": " << u->diagnostic;
    } else if (!success) {
      out << ": stopped after " << o.iterations << " iterations";
    }
    out << '\n';
    return out.str();
  }
  const auto& tree = *success->tree;
  switch (format) {
    case Format::Json: {
      nlohmann::ordered_json j;
      j["outcome"] = "clean";
      j["iterations"] = o.iterations;
      j["skippedOptional"] = o.skipped_optional;
      j["root"] = node_json(tree, tree.root());
      return j.dump(2) + "\n";
    }
    case Format::TreeText:
      tree_text(tree, tree.root(), 0, out);
      return out.str();
    case Format::Ndjson:
      tree_ndjson(tree, tree.root(), out);
      return out.str();
  }
  return {};
}

std::string placement_log_ndjson(std::span<const PlacementLogEntry> log) {
  std::string out;
  for (const auto& e : log) {
    out += detail::log_entry_to_json(e).dump();
    out += '\n';
  }
  return out;
}

}  // namespace render

}  // namespace peerspin
