#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace synthweaver {

// File layout of one run directory.
struct RunPaths {
  std::filesystem::path root;

  std::filesystem::path tasks() const { return root / "tasks.jsonl"; }
  std::filesystem::path triplets() const { return root / "triplets.jsonl"; }
  std::filesystem::path raw() const { return root / "trajectories_raw.jsonl"; }
  std::filesystem::path refined() const { return root / "trajectories_refined.jsonl"; }
  std::filesystem::path drops() const { return root / "drops.jsonl"; }
  std::filesystem::path dataset() const { return root / "dataset.jsonl"; }
  std::filesystem::path observations() const { return root / "observations.jsonl"; }
  std::filesystem::path stats() const { return root / "stats.json"; }
  std::filesystem::path manifest() const { return root / "manifest.json"; }
  std::filesystem::path events() const { return root / "events.jsonl"; }
  std::filesystem::path ledger() const { return root / "ledger.jsonl"; }
  std::filesystem::path progress() const { return root / "progress.jsonl"; }
  std::filesystem::path screenshots() const { return root / "screenshots"; }
};

// Appends one JSON document per line and flushes it, so a crash loses at most
// the line being written. Safe to share between threads.
class JsonlWriter {
 public:
  explicit JsonlWriter(const std::filesystem::path& path);  // throws IoError
  void write(const nlohmann::json& record);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::mutex mu_;
  std::ofstream out_;
};

// Drops an unterminated final line left by an interrupted writer. Returns
// true when the file was truncated. Missing files are left alone.
bool repair_jsonl(const std::filesystem::path& path);

// Every complete line of `path` parsed as JSON; a missing file reads as
// empty. Throws SchemaError naming file and line for a corrupt line.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

template <typename T>
std::vector<T> read_records(const std::filesystem::path& path, const std::function<T(const nlohmann::json&)>& parse) {
  std::vector<T> out;
  for (const auto& j : read_jsonl(path)) out.push_back(parse(j));
  return out;
}

// Keeps only lines for which keep(record) is true, atomically via rename.
void filter_jsonl(const std::filesystem::path& path, const std::function<bool(const nlohmann::json&)>& keep);

// Order-insensitive digest: sha256 over the sorted per-line digests.
std::string set_hash(const std::filesystem::path& path);

// The string field `key` of every record in `path`.
std::set<std::string> field_values(const std::filesystem::path& path, const std::string& key);

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace synthweaver
