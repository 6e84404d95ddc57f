#include "peerspin/registry.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace peerspin::registry {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::SourceUnreadable, "malformed packument: " + what);
}

std::map<std::string, std::string> string_map(const json& doc, const char* key,
                                              const std::string& where) {
  std::map<std::string, std::string> out;
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return out;
  if (!it->is_object()) malformed(where + "." + key + " is not an object");
  for (auto& [k, v] : it->items()) {
    if (!v.is_string()) malformed(where + "." + key + "." + k + " is not a string");
    out.emplace(k, v.get<std::string>());
  }
  return out;
}

Manifest parse_manifest(const std::string& package, const std::string& key, const json& doc) {
  const std::string where = package + "@" + key;
  if (!doc.is_object()) malformed(where + " is not an object");
  auto key_version = semver::try_parse_version(key);
  if (!key_version) malformed("invalid version key " + where);

  Manifest m;
  m.name = package;
  if (auto it = doc.find("name"); it != doc.end()) {
    if (!it->is_string() || it->get<std::string>() != package) malformed(where + " has a mismatched name");
  }
  m.version = *key_version;
  if (auto it = doc.find("version"); it != doc.end()) {
    if (!it->is_string()) malformed(where + ".version is not a string");
    auto v = semver::try_parse_version(it->get<std::string>());
    if (!v || version_key(*v) != version_key(*key_version)) malformed(where + " version field differs from key");
  }
  m.dependencies = string_map(doc, "dependencies", where);
  m.peer_dependencies = string_map(doc, "peerDependencies", where);
  for (const auto& [peer, _] : m.peer_dependencies) m.dependencies.erase(peer);

  if (auto it = doc.find("peerDependenciesMeta"); it != doc.end() && !it->is_null()) {
    if (!it->is_object()) malformed(where + ".peerDependenciesMeta is not an object");
    for (auto& [peer, meta] : it->items()) {
      if (!meta.is_object()) continue;
      auto opt = meta.find("optional");
      if (opt != meta.end() && opt->is_boolean()) m.peer_optional[peer] = opt->get<bool>();
    }
  }
  return m;
}

}  // namespace

std::string version_key(const semver::Version& v) {
  return semver::Version(v.major(), v.minor(), v.patch(), v.prerelease()).to_string();
}

std::vector<semver::Version> Packument::sorted_versions() const {
  std::vector<semver::Version> out;
  out.reserve(versions.size());
  for (const auto& [_, m] : versions) out.push_back(m.version);
  std::sort(out.begin(), out.end());
  return out;
}

const Manifest* Packument::find(const semver::Version& v) const {
  auto it = versions.find(version_key(v));
  return it == versions.end() ? nullptr : &it->second;
}

std::optional<std::int64_t> Packument::released_at(const semver::Version& v) const {
  auto it = times.find(version_key(v));
  if (it == times.end()) return std::nullopt;
  return it->second;
}

std::optional<std::int64_t> parse_timestamp(std::string_view text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  std::string buf(text);
  int consumed = 0;
  if (std::sscanf(buf.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &y, &mo, &d, &h, &mi, &s, &consumed) != 6) {
    return std::nullopt;
  }
  std::string_view rest = text.substr(static_cast<std::size_t>(consumed));
  if (!rest.empty() && rest.front() == '.') {
    rest.remove_prefix(1);
    while (!rest.empty() && rest.front() >= '0' && rest.front() <= '9') rest.remove_prefix(1);
  }
  if (rest != "Z" && rest != "+00:00" && !rest.empty()) return std::nullopt;
  using namespace std::chrono;
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) return std::nullopt;
  auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * 86400 + h * 3600 + mi * 60 + s;
}

int year_of(std::int64_t epoch_seconds) {
  using namespace std::chrono;
  auto days = epoch_seconds >= 0 ? epoch_seconds / 86400 : -((-epoch_seconds + 86399) / 86400);
  year_month_day ymd{sys_days{std::chrono::days{days}}};
  return static_cast<int>(ymd.year());
}

std::string encode_name(std::string_view name) {
  std::string out;
  for (char c : name) {
    if (c == '/') out += "%2f";
    else if (c == '%') out += "%25";
    else out += c;
  }
  return out;
}

std::string decode_name(std::string_view encoded) {
  std::string out;
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    if (encoded[i] == '%' && i + 2 < encoded.size()) {
      auto hex = std::string(encoded.substr(i + 1, 2));
      char* end = nullptr;
      long value = std::strtol(hex.c_str(), &end, 16);
      if (end == hex.c_str() + 2) {
        out += static_cast<char>(value);
        i += 2;
        continue;
      }
    }
    out += encoded[i];
  }
  return out;
}

Packument parse_packument(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    malformed(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) malformed("document is not an object");
  auto name_it = doc.find("name");
  if (name_it == doc.end() || !name_it->is_string() || name_it->get<std::string>().empty()) {
    malformed("missing name");
  }
  Packument p;
  p.name = name_it->get<std::string>();

  auto versions_it = doc.find("versions");
  if (versions_it == doc.end() || !versions_it->is_object()) malformed(p.name + ": missing versions");
  for (auto& [key, manifest] : versions_it->items()) {
    Manifest m = parse_manifest(p.name, key, manifest);
    auto canonical = version_key(m.version);
    if (!p.versions.emplace(canonical, std::move(m)).second) malformed(p.name + ": duplicate version " + key);
  }

  for (auto& [tag, target] : string_map(doc, "dist-tags", p.name)) {
    auto v = semver::try_parse_version(target);
    if (!v || !p.find(*v)) malformed(p.name + ": dist-tag " + tag + " points at unknown version " + target);
    p.dist_tags.emplace(tag, version_key(*v));
  }
  if (!p.dist_tags.empty() && !p.dist_tags.contains("latest")) malformed(p.name + ": dist-tags lacks latest");

  if (auto it = doc.find("time"); it != doc.end() && it->is_object()) {
    for (auto& [key, value] : it->items()) {
      auto v = semver::try_parse_version(key);
      if (!v || !value.is_string() || !p.find(*v)) continue;  // "created", "modified", junk
      if (auto t = parse_timestamp(value.get<std::string>())) p.times.emplace(version_key(*v), *t);
    }
  }
  return p;
}

namespace {

std::string format_timestamp(std::int64_t t) {
  using namespace std::chrono;
  auto days = t >= 0 ? t / 86400 : -((-t + 86399) / 86400);
  auto secs = t - days * 86400;
  year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.000Z", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(secs / 3600), static_cast<int>(secs / 60 % 60), static_cast<int>(secs % 60));
  return buf;
}

}  // namespace

std::string serialize_packument(const Packument& p) {
  json doc = json::object();
  doc["name"] = p.name;
  json versions = json::object();
  for (const auto& [key, m] : p.versions) {
    json mj = json::object();
    mj["name"] = m.name;
    mj["version"] = key;
    if (!m.dependencies.empty()) mj["dependencies"] = m.dependencies;
    if (!m.peer_dependencies.empty()) mj["peerDependencies"] = m.peer_dependencies;
    if (!m.peer_optional.empty()) {
      json meta = json::object();
      for (const auto& [peer, optional] : m.peer_optional) meta[peer] = {{"optional", optional}};
      mj["peerDependenciesMeta"] = meta;
    }
    versions[key] = mj;
  }
  doc["versions"] = versions;
  doc["dist-tags"] = p.dist_tags;
  json time = json::object();
  for (const auto& [key, t] : p.times) time[key] = format_timestamp(t);
  doc["time"] = time;
  return doc.dump();
}

std::shared_ptr<const Packument> PackumentSource::get(const std::string& name) const {
  auto p = find(name);
  if (!p) throw PackageNotFound(name);
  return p;
}

void SnapshotStore::add(Packument p) {
  auto name = p.name;
  index_[name] = std::make_shared<const Packument>(std::move(p));
}

std::shared_ptr<const Packument> SnapshotStore::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : it->second;
}

std::vector<std::string> SnapshotStore::names() const {
  std::vector<std::string> out;
  out.reserve(index_.size());
  for (const auto& [name, _] : index_) out.push_back(name);
  return out;
}

SnapshotStore SnapshotStore::import_ndjson(std::istream& in) {
  SnapshotStore store;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto p = parse_packument(line);
      if (store.index_.contains(p.name)) {
        store.diagnostics_.push_back("line " + std::to_string(line_no) + ": duplicate package " + p.name);
        continue;
      }
      store.add(std::move(p));
    } catch (const Error& e) {
      store.diagnostics_.push_back("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (in.bad()) throw Error(ErrorCode::SourceUnreadable, "read error in snapshot stream");
  if (store.index_.empty()) throw Error(ErrorCode::EmptySnapshot, "snapshot contains no valid packuments");
  return store;
}

SnapshotStore SnapshotStore::import(const std::filesystem::path& source, SnapshotFormat format) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (format == SnapshotFormat::Ndjson) {
    if (fs::is_directory(source, ec)) {
      throw Error(ErrorCode::SourceUnreadable, "snapshot is a directory: " + source.string());
    }
    std::ifstream in(source, std::ios::binary);
    if (!in) throw Error(ErrorCode::SourceUnreadable, "cannot open snapshot: " + source.string());
    return import_ndjson(in);
  }

  if (!fs::is_directory(source, ec)) {
    throw Error(ErrorCode::SourceUnreadable, "snapshot directory not readable: " + source.string());
  }
  std::vector<fs::path> files;
  for (fs::directory_iterator it(source, ec), end; !ec && it != end; it.increment(ec)) {
    if (it->is_regular_file() && it->path().extension() == ".json") files.push_back(it->path());
  }
  if (ec) throw Error(ErrorCode::SourceUnreadable, "cannot list " + source.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());

  SnapshotStore store;
  for (const auto& file : files) {
    std::ifstream in(file, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    if (!in) {
      store.diagnostics_.push_back(file.filename().string() + ": unreadable");
      continue;
    }
    try {
      auto p = parse_packument(buf.str());
      auto expected = decode_name(file.stem().string());
      if (p.name != expected) {
        store.diagnostics_.push_back(file.filename().string() + ": file name does not match package " + p.name);
        continue;
      }
      store.add(std::move(p));
    } catch (const Error& e) {
      store.diagnostics_.push_back(file.filename().string() + ": " + e.what());
    }
  }
  if (store.index_.empty()) throw Error(ErrorCode::EmptySnapshot, "snapshot contains no valid packuments");
  return store;
}

void SnapshotStore::save(const std::filesystem::path& target, SnapshotFormat format) const {
  namespace fs = std::filesystem;
  std::error_code ec;
  auto fail = [&](const fs::path& p) {
    throw Error(ErrorCode::SinkUnwritable, "cannot write " + p.string());
  };
  if (format == SnapshotFormat::Ndjson) {
    if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
    std::ofstream out(target, std::ios::binary | std::ios::trunc);
    if (!out) fail(target);
    for (const auto& [_, p] : index_) out << serialize_packument(*p) << '\n';
    if (!out) fail(target);
    return;
  }
  fs::create_directories(target, ec);
  for (const auto& [name, p] : index_) {
    auto file = target / (encode_name(name) + ".json");
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) fail(file);
    out << serialize_packument(*p) << '\n';
    if (!out) fail(file);
  }
}

namespace {

bool looks_like_tag(const std::string& s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s.front()))) return false;
  if (s.front() == 'v' || s.front() == 'x' || s.front() == 'X') {
    // "v1.2.3" / "x" are ranges; "vnext" or "xmas" are tags.
    if (s.size() == 1 || std::isdigit(static_cast<unsigned char>(s[1])) || s[1] == '.') return false;
  }
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
  });
}

}  // namespace

Selection select_version(const PackumentSource& source, const std::string& name,
                         const semver::VersionRange& range, const std::string& spec_text) {
  auto packument = source.get(name);
  const Manifest* best = nullptr;
  for (const auto& [_, m] : packument->versions) {
    if (!range.satisfied_by(m.version)) continue;
    if (!best || m.version > best->version) best = &m;
  }
  if (!best) throw NoSatisfyingVersion(name, spec_text);
  return {std::move(packument), best};
}

Selection select_version(const PackumentSource& source, const std::string& name,
                         const std::string& range_or_tag) {
  auto packument = source.get(name);
  if (auto tag = packument->dist_tags.find(range_or_tag); tag != packument->dist_tags.end()) {
    const Manifest* m = &packument->versions.at(tag->second);
    return {std::move(packument), m};
  }
  auto range = semver::try_parse_range(range_or_tag);
  if (!range) {
    if (looks_like_tag(range_or_tag)) throw NoSatisfyingVersion(name, range_or_tag);
    throw MalformedRange(range_or_tag);
  }
  return select_version(source, name, *range, range_or_tag);
}

}  // namespace peerspin::registry
