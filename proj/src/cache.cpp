#include "rankkit/cache.hpp"

#include <string>

#include "rankkit/errors.hpp"
#include "rankkit/sha256.hpp"

namespace rankkit {

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  if (std::filesystem::exists(path_)) {
    std::ifstream in(path_);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      nlohmann::json entry = nlohmann::json::parse(line, nullptr, false);
      if (entry.is_discarded() || !entry.contains("key") || !entry.contains("value")) {
        // A torn final line from an interrupted run is tolerated; anything
        // earlier means the file is corrupt.
        if (in.peek() == EOF) break;
        throw ValidationError("cache " + path_.string() + ":" +
                              std::to_string(lineno) + ": malformed entry");
      }
      entries_[entry["key"].get<std::string>()] = entry["value"];
    }
  }
  appender_.open(path_, std::ios::app);
  if (!appender_) throw ValidationError("cannot open cache file " + path_.string());
}

std::optional<nlohmann::json> ResponseCache::get(const std::string& key) const {
  std::lock_guard lock(mutex_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::put(const std::string& key, nlohmann::json value) {
  std::lock_guard lock(mutex_);
  if (appender_.is_open()) {
    nlohmann::json entry{{"key", key}, {"value", value}};
    appender_ << entry.dump() << "\n";
    appender_.flush();
  }
  entries_[key] = std::move(value);
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::string ResponseCache::make_key(const std::vector<std::string>& parts) {
  return sha256_hex(nlohmann::json(parts).dump());
}

}  // namespace rankkit
