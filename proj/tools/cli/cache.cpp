#include "cli/cache.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "tunnelsplit/digest.hpp"
#include "tunnelsplit/errors.hpp"

namespace tunnel::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string temp_name(const fs::path& target) {
  static std::atomic<unsigned long> counter{0};
  std::ostringstream os;
  os << '.' << target.filename().string() << '.' << ::getpid() << '.'
     << std::hash<std::thread::id>{}(std::this_thread::get_id()) << '.' << counter++ << ".tmp";
  return os.str();
}

bool is_entry(const fs::directory_entry& e) {
  const std::string name = e.path().filename().string();
  return e.is_regular_file() && !name.empty() && name[0] != '.' && e.path().extension() == ".json";
}

}  // namespace

void atomic_write(const fs::path& path, const std::string& data) {
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  fs::create_directories(dir);
  const fs::path tmp = dir / temp_name(path);
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + tmp.string());
    f.write(data.data(), static_cast<std::streamsize>(data.size()));
    f.flush();
    if (!f) throw Error(ErrorCode::InvalidArgument, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::InvalidArgument, "cannot rename into " + path.string());
  }
}

Cache::Cache(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

fs::path Cache::entry_path(const std::string& key) const { return dir_ / (key + ".json"); }

std::optional<json> Cache::load(const std::string& key) const {
  const fs::path p = entry_path(key);
  std::ifstream f(p, std::ios::binary);
  if (!f) return std::nullopt;
  std::stringstream ss;
  ss << f.rdbuf();
  json entry;
  try {
    entry = json::parse(ss.str());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CacheCorruption, p.string() + ": unparsable entry");
  }
  if (!entry.is_object() || !entry.contains("payload") || !entry.contains("payload_sha256") ||
      entry.value("key", std::string()) != key)
    throw Error(ErrorCode::CacheCorruption, p.string() + ": malformed entry");
  const std::string want = entry["payload_sha256"].get<std::string>();
  const std::string got = sha256_hex(entry["payload"].dump());
  if (want != got) throw Error(ErrorCode::CacheCorruption, p.string() + ": digest mismatch");
  return entry["payload"];
}

void Cache::store(const std::string& key, const std::string& kind, const json& payload) const {
  json entry;
  entry["schema_version"] = 1;
  entry["key"] = key;
  entry["kind"] = kind;
  entry["payload"] = payload;
  entry["payload_sha256"] = sha256_hex(payload.dump());
  atomic_write(entry_path(key), entry.dump());
}

GcReport cache_gc(const fs::path& dir, int keep_latest) {
  GcReport r;
  std::error_code ec;
  if (!fs::exists(dir, ec)) return r;
  struct Item {
    fs::path path;
    fs::file_time_type time;
  };
  std::vector<Item> items;
  for (const auto& e : fs::directory_iterator(dir, ec)) {
    if (!is_entry(e)) continue;
    std::error_code tec;
    const auto t = e.last_write_time(tec);
    if (tec) continue;  // vanished meanwhile
    items.push_back({e.path(), t});
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.time != b.time) return a.time > b.time;
    return a.path.filename() < b.path.filename();
  });
  for (std::size_t i = static_cast<std::size_t>(std::max(0, keep_latest)); i < items.size(); ++i) {
    std::error_code rec;
    if (fs::remove(items[i].path, rec))
      ++r.removed;
    else if (rec)
      r.unremovable.push_back(items[i].path.string() + ": " + rec.message());
  }
  return r;
}

}  // namespace tunnel::cli
