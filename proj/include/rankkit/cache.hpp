#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include <json.hpp>

namespace rankkit {

// Append-only JSONL response cache keyed by SHA-256 of the canonical
// request. One {"key": ..., "value": ...} object per line; later entries
// win, so annotation runs are resumable and verdicts stay auditable.
class ResponseCache {
 public:
  ResponseCache() = default;  // in-memory only
  explicit ResponseCache(std::filesystem::path path);

  std::optional<nlohmann::json> get(const std::string& key) const;
  void put(const std::string& key, nlohmann::json value);

  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }

  // Canonical cache key: SHA-256 over the JSON-array dump of the parts.
  static std::string make_key(const std::vector<std::string>& parts);

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, nlohmann::json> entries_;
  std::ofstream appender_;
};

}  // namespace rankkit
