#include "peerspin/semver.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace peerspin::semver {

namespace {

// Numeric components above this are rejected, matching JavaScript's safe
// integer range used by the npm toolchain.
constexpr std::uint64_t kMaxSafeInteger = 9007199254740991ULL;
constexpr std::size_t kMaxLength = 256;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-'; }

// `0|[1-9]\d*`, bounded by kMaxSafeInteger.
std::optional<std::uint64_t> parse_numeric(std::string_view s) {
  if (s.empty() || s.size() > 16) return std::nullopt;
  if (!std::all_of(s.begin(), s.end(), is_digit)) return std::nullopt;
  if (s.size() > 1 && s.front() == '0') return std::nullopt;
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || value > kMaxSafeInteger) return std::nullopt;
  return value;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<std::vector<PrereleaseId>> parse_prerelease(std::string_view s) {
  std::vector<PrereleaseId> ids;
  for (auto part : split(s, '.')) {
    if (part.empty() || !std::all_of(part.begin(), part.end(), is_ident_char)) return std::nullopt;
    if (std::all_of(part.begin(), part.end(), is_digit)) {
      auto n = parse_numeric(part);
      if (!n) return std::nullopt;
      ids.push_back(PrereleaseId::from_number(*n));
    } else {
      ids.push_back(PrereleaseId{false, 0, std::string(part)});
    }
  }
  return ids;
}

std::optional<std::vector<std::string>> parse_build(std::string_view s) {
  std::vector<std::string> ids;
  for (auto part : split(s, '.')) {
    if (part.empty() || !std::all_of(part.begin(), part.end(), is_ident_char)) return std::nullopt;
    ids.emplace_back(part);
  }
  return ids;
}

// Splits "core-pre+build" into its three parts. Prerelease starts at the first
// '-' of the text before '+'.
struct VersionParts {
  std::string_view core;
  std::optional<std::string_view> prerelease;
  std::optional<std::string_view> build;
};

VersionParts split_version(std::string_view s) {
  VersionParts parts;
  if (auto plus = s.find('+'); plus != std::string_view::npos) {
    parts.build = s.substr(plus + 1);
    s = s.substr(0, plus);
  }
  if (auto dash = s.find('-'); dash != std::string_view::npos) {
    parts.prerelease = s.substr(dash + 1);
    s = s.substr(0, dash);
  }
  parts.core = s;
  return parts;
}

std::optional<Version> parse_strict(std::string_view text) {
  text = trim(text);
  if (text.empty() || text.size() > kMaxLength) return std::nullopt;
  if (text.front() == 'v') text.remove_prefix(1);
  auto parts = split_version(text);
  auto core = split(parts.core, '.');
  if (core.size() != 3) return std::nullopt;
  auto major = parse_numeric(core[0]);
  auto minor = parse_numeric(core[1]);
  auto patch = parse_numeric(core[2]);
  if (!major || !minor || !patch) return std::nullopt;
  std::vector<PrereleaseId> pre;
  if (parts.prerelease) {
    auto p = parse_prerelease(*parts.prerelease);
    if (!p) return std::nullopt;
    pre = std::move(*p);
  }
  std::vector<std::string> build;
  if (parts.build) {
    auto b = parse_build(*parts.build);
    if (!b) return std::nullopt;
    build = std::move(*b);
  }
  return Version(*major, *minor, *patch, std::move(pre), std::move(build));
}

// ---------------------------------------------------------------------------
// Range parsing

// A possibly partial version as written in a range: missing or wildcard
// components are nullopt. Prerelease is only legal with a full core.
struct Partial {
  std::optional<std::uint64_t> major, minor, patch;
  std::vector<PrereleaseId> prerelease;

  bool major_x() const { return !major; }
  bool minor_x() const { return !major || !minor; }
  bool patch_x() const { return !major || !minor || !patch; }
};

bool is_wild(std::string_view s) { return s == "x" || s == "X" || s == "*"; }

// Inside comparators only a `v` may precede the version; hyphen bounds also
// accept `=` there.
std::optional<Partial> parse_partial(std::string_view s, bool allow_eq = false) {
  if (allow_eq) {
    while (!s.empty() && (s.front() == 'v' || s.front() == '=')) s.remove_prefix(1);
  } else if (!s.empty() && s.front() == 'v') {
    s.remove_prefix(1);
  }
  if (s.empty()) return std::nullopt;
  auto parts = split_version(s);
  auto core = split(parts.core, '.');
  if (core.empty() || core.size() > 3) return std::nullopt;
  Partial p;
  std::optional<std::uint64_t>* slots[3] = {&p.major, &p.minor, &p.patch};
  bool seen_wild = false;
  for (std::size_t i = 0; i < core.size(); ++i) {
    if (is_wild(core[i])) {
      seen_wild = true;
      continue;
    }
    if (seen_wild) return std::nullopt;
    auto n = parse_numeric(core[i]);
    if (!n) return std::nullopt;
    *slots[i] = n;
  }
  if (parts.prerelease || parts.build) {
    if (core.size() != 3) return std::nullopt;
    if (parts.prerelease) {
      auto pre = parse_prerelease(*parts.prerelease);
      if (!pre) return std::nullopt;
      p.prerelease = std::move(*pre);
    }
    if (parts.build && !parse_build(*parts.build)) return std::nullopt;
  }
  return p;
}

Version release(std::uint64_t major, std::uint64_t minor, std::uint64_t patch) {
  return Version(major, minor, patch);
}

Comparator ge(Version v) { return {Op::Ge, std::move(v)}; }
Comparator lt(Version v) { return {Op::Lt, std::move(v)}; }

// `<0.0.0-0`: matches nothing.
Comparator null_comparator() { return {Op::Lt, Version(0, 0, 0, {PrereleaseId::from_number(0)})}; }

bool is_null_comparator(const Comparator& c) { return c == null_comparator(); }

Version full(const Partial& p) { return Version(*p.major, *p.minor, *p.patch, p.prerelease); }

void desugar_caret(const Partial& p, ComparatorSet& out) {
  if (p.major_x()) return;
  const auto M = *p.major;
  if (p.minor_x()) {
    out.push_back(ge(release(M, 0, 0)));
    out.push_back(lt(release(M + 1, 0, 0)));
    return;
  }
  const auto m = *p.minor;
  if (p.patch_x()) {
    out.push_back(ge(release(M, m, 0)));
    out.push_back(lt(M == 0 ? release(0, m + 1, 0) : release(M + 1, 0, 0)));
    return;
  }
  const auto pt = *p.patch;
  out.push_back(ge(full(p)));
  if (M == 0) {
    out.push_back(lt(m == 0 ? release(0, 0, pt + 1) : release(0, m + 1, 0)));
  } else {
    out.push_back(lt(release(M + 1, 0, 0)));
  }
}

void desugar_tilde(const Partial& p, ComparatorSet& out) {
  if (p.major_x()) return;
  const auto M = *p.major;
  if (p.minor_x()) {
    out.push_back(ge(release(M, 0, 0)));
    out.push_back(lt(release(M + 1, 0, 0)));
    return;
  }
  const auto m = *p.minor;
  out.push_back(ge(p.patch_x() ? release(M, m, 0) : full(p)));
  out.push_back(lt(release(M, m + 1, 0)));
}

// Comparators and bare (x-)versions. `op` is one of "", "=", "<", "<=", ">", ">=".
void desugar_xrange(std::string_view op, const Partial& p, ComparatorSet& out) {
  const bool any_x = p.patch_x();
  if (op == "=" && any_x) op = "";
  if (p.major_x()) {
    if (op == ">" || op == "<") out.push_back(null_comparator());
    return;
  }
  if (!op.empty() && any_x) {
    std::uint64_t M = *p.major;
    std::uint64_t m = p.minor_x() ? 0 : *p.minor;
    std::uint64_t pt = 0;
    if (op == ">") {
      if (p.minor_x()) {
        out.push_back(ge(release(M + 1, 0, 0)));
      } else {
        out.push_back(ge(release(M, m + 1, 0)));
      }
      return;
    }
    if (op == "<=") {
      out.push_back(lt(p.minor_x() ? release(M + 1, 0, 0) : release(M, m + 1, 0)));
      return;
    }
    if (op == "<") {
      out.push_back(lt(release(M, m, pt)));
      return;
    }
    out.push_back(ge(release(M, m, pt)));  // ">="
    return;
  }
  if (p.minor_x()) {
    out.push_back(ge(release(*p.major, 0, 0)));
    out.push_back(lt(release(*p.major + 1, 0, 0)));
    return;
  }
  if (p.patch_x()) {
    out.push_back(ge(release(*p.major, *p.minor, 0)));
    out.push_back(lt(release(*p.major, *p.minor + 1, 0)));
    return;
  }
  Op o = Op::Eq;
  if (op == "<") o = Op::Lt;
  else if (op == "<=") o = Op::Le;
  else if (op == ">") o = Op::Gt;
  else if (op == ">=") o = Op::Ge;
  out.push_back({o, full(p)});
}

void desugar_hyphen(const Partial& from, const Partial& to, ComparatorSet& out) {
  if (!from.major_x()) {
    if (from.minor_x()) out.push_back(ge(release(*from.major, 0, 0)));
    else if (from.patch_x()) out.push_back(ge(release(*from.major, *from.minor, 0)));
    else out.push_back(ge(full(from)));
  }
  if (!to.major_x()) {
    if (to.minor_x()) out.push_back(lt(release(*to.major + 1, 0, 0)));
    else if (to.patch_x()) out.push_back(lt(release(*to.major, *to.minor + 1, 0)));
    else out.push_back({Op::Le, full(to)});
  }
}

// Recognizes "<partial> - <partial>" spanning the whole comparator set.
std::optional<ComparatorSet> try_hyphen(std::string_view s) {
  std::size_t pos = 0;
  while (true) {
    pos = s.find(" - ", pos);
    if (pos == std::string_view::npos) return std::nullopt;
    auto left = trim(s.substr(0, pos));
    auto right = trim(s.substr(pos + 3));
    if (left.find(' ') == std::string_view::npos && right.find(' ') == std::string_view::npos) {
      auto from = parse_partial(left, true);
      auto to = parse_partial(right, true);
      if (!from || !to) return std::nullopt;
      ComparatorSet out;
      desugar_hyphen(*from, *to, out);
      return out;
    }
    pos += 3;
  }
}

std::optional<ComparatorSet> parse_comparator_set(std::string_view s) {
  s = trim(s);
  ComparatorSet out;
  if (s.empty()) return out;
  if (auto hyphen = try_hyphen(s)) return hyphen;

  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    if (i >= s.size()) break;
    std::string_view op;
    auto rest = s.substr(i);
    for (std::string_view candidate : {"~>", "<=", ">=", "<", ">", "=", "~", "^"}) {
      if (rest.starts_with(candidate)) {
        op = candidate;
        break;
      }
    }
    i += op.size();
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t start = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    auto token = s.substr(start, i - start);
    if (token.empty()) return std::nullopt;
    auto partial = parse_partial(token);
    if (!partial) return std::nullopt;
    if (op == "^") desugar_caret(*partial, out);
    else if (op == "~" || op == "~>") desugar_tilde(*partial, out);
    else desugar_xrange(op, *partial, out);
  }

  // A null comparator swallows the whole set; duplicates collapse.
  if (std::any_of(out.begin(), out.end(), is_null_comparator)) return ComparatorSet{null_comparator()};
  ComparatorSet unique;
  for (auto& c : out) {
    if (std::find(unique.begin(), unique.end(), c) == unique.end()) unique.push_back(std::move(c));
  }
  return unique;
}

std::optional<VersionRange> parse_range_impl(std::string_view raw) {
  if (raw.size() > kMaxLength) return std::nullopt;
  // Collapse whitespace runs so the hyphen form can be matched on " - ".
  std::string normalized;
  for (char c : trim(raw)) {
    if (is_space(c)) {
      if (normalized.empty() || normalized.back() != ' ') normalized += ' ';
    } else {
      normalized += c;
    }
  }
  std::string_view text = normalized;
  std::vector<ComparatorSet> sets;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find("||", start);
    auto alt = text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    auto set = parse_comparator_set(alt);
    if (!set) return std::nullopt;
    sets.push_back(std::move(*set));
    if (pos == std::string_view::npos) break;
    start = pos + 2;
  }
  if (sets.size() > 1) {
    auto first = sets.front();
    std::erase_if(sets, [](const ComparatorSet& s) { return s.size() == 1 && is_null_comparator(s[0]); });
    if (sets.empty()) {
      sets.push_back(std::move(first));
    } else if (sets.size() > 1) {
      if (std::any_of(sets.begin(), sets.end(), [](const ComparatorSet& s) { return s.empty(); })) {
        sets = {ComparatorSet{}};
      }
    }
  }
  return VersionRange(std::move(sets));
}

bool test_set(const ComparatorSet& set, const Version& v) {
  for (const auto& c : set) {
    if (!c.test(v)) return false;
  }
  if (v.is_prerelease()) {
    return std::any_of(set.begin(), set.end(), [&](const Comparator& c) {
      return c.version.is_prerelease() && c.version.same_core(v);
    });
  }
  return true;
}

}  // namespace

std::strong_ordering operator<=>(const PrereleaseId& a, const PrereleaseId& b) {
  if (a.numeric && b.numeric) return a.number <=> b.number;
  if (a.numeric) return std::strong_ordering::less;
  if (b.numeric) return std::strong_ordering::greater;
  return a.text.compare(b.text) <=> 0;
}

std::strong_ordering operator<=>(const Version& a, const Version& b) {
  if (auto c = a.major_ <=> b.major_; c != 0) return c;
  if (auto c = a.minor_ <=> b.minor_; c != 0) return c;
  if (auto c = a.patch_ <=> b.patch_; c != 0) return c;
  const auto& pa = a.prerelease_;
  const auto& pb = b.prerelease_;
  if (pa.empty() || pb.empty()) return pb.size() <=> pa.size();  // release sorts above prerelease
  return std::lexicographical_compare_three_way(pa.begin(), pa.end(), pb.begin(), pb.end());
}

std::string Version::to_string() const {
  std::string s = std::to_string(major_) + "." + std::to_string(minor_) + "." + std::to_string(patch_);
  for (std::size_t i = 0; i < prerelease_.size(); ++i) {
    s += i == 0 ? '-' : '.';
    s += prerelease_[i].text;
  }
  for (std::size_t i = 0; i < build_.size(); ++i) {
    s += i == 0 ? '+' : '.';
    s += build_[i];
  }
  return s;
}

bool Comparator::test(const Version& v) const {
  auto c = v <=> version;
  switch (op) {
    case Op::Eq: return c == 0;
    case Op::Lt: return c < 0;
    case Op::Le: return c <= 0;
    case Op::Gt: return c > 0;
    case Op::Ge: return c >= 0;
  }
  return false;
}

std::string Comparator::to_string() const {
  const char* prefix = "";
  switch (op) {
    case Op::Eq: prefix = ""; break;
    case Op::Lt: prefix = "<"; break;
    case Op::Le: prefix = "<="; break;
    case Op::Gt: prefix = ">"; break;
    case Op::Ge: prefix = ">="; break;
  }
  Version bare(version.major(), version.minor(), version.patch(), version.prerelease());
  return prefix + bare.to_string();
}

bool VersionRange::satisfied_by(const Version& v) const {
  return std::any_of(alternatives_.begin(), alternatives_.end(),
                     [&](const ComparatorSet& set) { return test_set(set, v); });
}

std::string VersionRange::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < alternatives_.size(); ++i) {
    if (i) out += "||";
    const auto& set = alternatives_[i];
    if (set.empty()) {
      out += "*";
      continue;
    }
    for (std::size_t j = 0; j < set.size(); ++j) {
      if (j) out += ' ';
      out += set[j].to_string();
    }
  }
  return out;
}

Version parse_version(std::string_view text) {
  if (auto v = parse_strict(text)) return std::move(*v);
  throw MalformedVersion(std::string(text));
}

std::optional<Version> try_parse_version(std::string_view text) noexcept {
  try {
    return parse_strict(text);
  } catch (...) {
    return std::nullopt;
  }
}

VersionRange parse_range(std::string_view text) {
  if (auto r = parse_range_impl(text)) return std::move(*r);
  throw MalformedRange(std::string(text));
}

std::optional<VersionRange> try_parse_range(std::string_view text) noexcept {
  try {
    return parse_range_impl(text);
  } catch (...) {
    return std::nullopt;
  }
}

bool satisfies(const Version& v, const VersionRange& r) { return r.satisfied_by(v); }

std::optional<Version> max_satisfying(std::span<const Version> versions, const VersionRange& r) {
  const Version* best = nullptr;
  for (const auto& v : versions) {
    if (!r.satisfied_by(v)) continue;
    if (!best || v > *best) best = &v;
  }
  if (!best) return std::nullopt;
  return *best;
}

}  // namespace peerspin::semver
