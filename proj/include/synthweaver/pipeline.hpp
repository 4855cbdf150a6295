#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthweaver/collector.hpp"
#include "synthweaver/dataset.hpp"
#include "synthweaver/environment.hpp"
#include "synthweaver/explorer.hpp"
#include "synthweaver/oracle.hpp"
#include "synthweaver/run_store.hpp"

namespace synthweaver {

inline constexpr int kConfigSchemaVersion = 1;

struct SiteConfig {
  std::string name;
  std::optional<std::filesystem::path> site_graph_path;
  std::optional<std::string> browser_endpoint;
  std::string start_url;  // browser sites only
  std::string intro;
  std::string task_examples;
};

struct OracleConfig {
  std::string endpoint;
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
  Pricing pricing;
  std::optional<std::filesystem::path> mock_script_path;
  int max_in_flight = 4;
  int max_retries = 3;
  int reparse_attempts = 2;
  int backoff_base_ms = 1000;
  double temperature = 0.0;
  std::int64_t max_total_tokens = 0;
};

struct ExportConfig {
  int window = kDefaultContextWindow;
  std::string format = "jsonl";
  std::vector<std::filesystem::path> merge_runs;  // other run directories to concatenate
};

struct StatsConfig {
  bool judge_diversity = false;
  bool judge_quality = false;
};

struct RunConfig {
  std::filesystem::path runs_root = "runs";
  std::string run_id = "default";
  std::uint64_t seed = 0;
  int workers = 1;
  std::vector<SiteConfig> sites;
  OracleConfig oracle;
  CollectorConfig collector;
  ExplorerConfig explorer;
  ExportConfig export_options;
  StatsConfig stats;

  std::filesystem::path run_dir() const { return runs_root / run_id; }
};

// Relative paths resolve against base_dir. Throws ConfigError naming the
// offending field.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);
void validate_config(const RunConfig& config);

// Runs fn(i) for i in [0, n) on `workers` threads. After the first exception
// no new items start; that exception is rethrown once all threads finish.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

std::shared_ptr<ChatBackend> make_backend(const OracleConfig& config);
std::unique_ptr<EnvironmentFactory> make_environment(const SiteConfig& site, const RunPaths& paths);

struct StageReport {
  std::size_t produced = 0;
  std::size_t skipped = 0;  // already present from an earlier run
};

// The five stages over one run directory. Each reads the previous stage's
// files, appends its own and can resume after an interruption.
class Pipeline {
 public:
  explicit Pipeline(RunConfig config, std::shared_ptr<ChatBackend> backend = nullptr);

  StageReport explore();
  StageReport collect();
  StageReport refine();
  ExportManifest export_dataset();
  CorpusStats stats();

  const RunConfig& config() const { return config_; }
  const RunPaths& paths() const { return paths_; }
  Oracle& oracle() { return *oracle_; }

 private:
  void event(nlohmann::json e);
  const SiteConfig& site(const std::string& name) const;

  RunConfig config_;
  RunPaths paths_;
  std::unique_ptr<Oracle> oracle_;
  std::unique_ptr<JsonlWriter> events_;
  std::unique_ptr<JsonlWriter> ledger_;
};

}  // namespace synthweaver
