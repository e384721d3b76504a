#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace tunnel::cli {

/// Content-addressed store: one `<key>.json` per entry holding the payload
/// and its SHA-256. Entries are written to a temporary file and renamed into
/// place, so readers never observe a partial entry.
class Cache {
 public:
  explicit Cache(std::filesystem::path dir);

  /// nullopt on a miss; throws CacheCorruption if the stored digest does not
  /// match the payload.
  std::optional<nlohmann::json> load(const std::string& key) const;
  void store(const std::string& key, const std::string& kind, const nlohmann::json& payload) const;
  std::filesystem::path entry_path(const std::string& key) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

struct GcReport {
  int removed = 0;
  std::vector<std::string> unremovable;
};

/// Keeps the `keep_latest` most recently written entries; temporary files of
/// writers in flight are never touched.
GcReport cache_gc(const std::filesystem::path& dir, int keep_latest);

/// Writes `data` to `path` through a temporary file in the same directory.
void atomic_write(const std::filesystem::path& path, const std::string& data);

}  // namespace tunnel::cli
