#include <atomic>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "httplib.h"
#include "peerspin/registry.hpp"

namespace peerspin::registry {

namespace fs = std::filesystem;

struct RemoteRegistry::State {
  std::string host;    // scheme://host[:port]
  std::string prefix;  // path prefix without trailing slash
  fs::path cache_dir;

  mutable std::mutex map_mutex;
  mutable std::unordered_map<std::string, std::shared_ptr<std::mutex>> name_locks;
  mutable std::unordered_map<std::string, std::shared_ptr<const Packument>> memo;
  mutable std::atomic<std::size_t> fetches{0};

  std::shared_ptr<std::mutex> lock_for(const std::string& name) const {
    std::lock_guard guard(map_mutex);
    auto& slot = name_locks[name];
    if (!slot) slot = std::make_shared<std::mutex>();
    return slot;
  }
};

RemoteRegistry::RemoteRegistry(std::string base_url, fs::path cache_dir)
    : state_(std::make_unique<State>()) {
  if (!base_url.starts_with("http://")) {
    throw Error(ErrorCode::InvalidArgument, "registry URL must start with http://: " + base_url);
  }
  auto slash = base_url.find('/', 7);
  state_->host = base_url.substr(0, slash);
  state_->prefix = slash == std::string::npos ? "" : base_url.substr(slash);
  while (!state_->prefix.empty() && state_->prefix.back() == '/') state_->prefix.pop_back();
  state_->cache_dir = std::move(cache_dir);
  if (!state_->cache_dir.empty()) {
    std::error_code ec;
    fs::create_directories(state_->cache_dir, ec);
    if (ec) throw Error(ErrorCode::SinkUnwritable, "cannot create cache " + state_->cache_dir.string());
  }
}

RemoteRegistry::~RemoteRegistry() = default;

std::size_t RemoteRegistry::fetches() const noexcept { return state_->fetches.load(); }

std::shared_ptr<const Packument> RemoteRegistry::find(const std::string& name) const {
  auto name_lock = state_->lock_for(name);
  std::lock_guard hold(*name_lock);
  {
    std::lock_guard guard(state_->map_mutex);
    if (auto it = state_->memo.find(name); it != state_->memo.end()) return it->second;
  }

  const auto encoded = encode_name(name);
  const fs::path cached = state_->cache_dir.empty() ? fs::path{} : state_->cache_dir / (encoded + ".json");
  std::string body;
  bool from_cache = false;
  if (!cached.empty() && fs::exists(cached)) {
    std::ifstream in(cached, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    body = buf.str();
    from_cache = static_cast<bool>(in);
  }

  if (!from_cache) {
    httplib::Client client(state_->host);
    client.set_connection_timeout(10);
    client.set_read_timeout(30);
    ++state_->fetches;
    auto res = client.Get(state_->prefix + "/" + encoded);
    if (!res) throw Error(ErrorCode::Network, "request for " + name + " failed: " + httplib::to_string(res.error()));
    if (res->status == 404) {
      std::lock_guard guard(state_->map_mutex);
      state_->memo[name] = nullptr;
      return nullptr;
    }
    if (res->status != 200) {
      throw Error(ErrorCode::Network, "request for " + name + " returned HTTP " + std::to_string(res->status));
    }
    body = std::move(res->body);
  }

  auto packument = std::make_shared<const Packument>(parse_packument(body));
  if (packument->name != name) throw Error(ErrorCode::Network, "registry returned " + packument->name + " for " + name);

  if (!from_cache && !cached.empty() && !fs::exists(cached)) {
    // Write to a temporary name and rename so readers never see partial files.
    auto tmp = cached;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << body;
      if (!out) throw Error(ErrorCode::SinkUnwritable, "cannot write cache entry " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, cached, ec);
    if (ec) throw Error(ErrorCode::SinkUnwritable, "cannot install cache entry " + cached.string());
  }

  std::lock_guard guard(state_->map_mutex);
  state_->memo[name] = packument;
  return packument;
}

}  // namespace peerspin::registry
