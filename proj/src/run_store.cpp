#include "synthweaver/run_store.hpp"

#include <algorithm>

#include "synthweaver/errors.hpp"
#include "synthweaver/hashing.hpp"

namespace synthweaver {

using nlohmann::json;
namespace fs = std::filesystem;

JsonlWriter::JsonlWriter(const fs::path& path) : path_(path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  repair_jsonl(path);
  out_.open(path, std::ios::binary | std::ios::app);
  if (!out_) throw IoError("cannot open " + path.string() + " for appending");
}

void JsonlWriter::write(const json& record) {
  const std::string line = record.dump() + "\n";
  std::lock_guard lock(mu_);
  out_ << line;
  out_.flush();
  if (!out_) throw IoError("write failed for " + path_.string());
}

bool repair_jsonl(const fs::path& path) {
  std::error_code ec;
  const auto size = fs::file_size(path, ec);
  if (ec || size == 0) return false;

  std::ifstream in(path, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  if (content.back() == '\n') return false;
  const auto last_newline = content.rfind('\n');
  const std::size_t keep = last_newline == std::string::npos ? 0 : last_newline + 1;
  fs::resize_file(path, keep, ec);
  if (ec) throw IoError("cannot truncate " + path.string() + ": " + ec.message());
  return true;
}

std::vector<json> read_jsonl(const fs::path& path) {
  std::vector<json> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (in.eof()) break;  // no trailing newline: an interrupted write, ignored
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw SchemaError(path.filename().string() + ":" + std::to_string(n) + ": not valid JSON");
    out.push_back(std::move(j));
  }
  return out;
}

void filter_jsonl(const fs::path& path, const std::function<bool(const json&)>& keep) {
  if (!fs::exists(path)) return;
  const auto records = read_jsonl(path);
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    for (const auto& r : records) {
      if (keep(r)) out << r.dump() << '\n';
    }
    if (!out) throw IoError("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string set_hash(const fs::path& path) {
  std::vector<std::string> digests;
  for (const auto& r : read_jsonl(path)) digests.push_back(sha256_hex(r.dump()));
  std::sort(digests.begin(), digests.end());
  Sha256 h;
  for (const auto& d : digests) h.update(d);
  return h.hex_digest();
}

std::set<std::string> field_values(const fs::path& path, const std::string& key) {
  std::set<std::string> out;
  for (const auto& r : read_jsonl(path)) {
    if (auto it = r.find(key); it != r.end() && it->is_string()) out.insert(it->get<std::string>());
  }
  return out;
}

void write_json_file(const fs::path& path, const json& doc) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace synthweaver
