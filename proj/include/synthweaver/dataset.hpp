#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthweaver/model.hpp"
#include "synthweaver/oracle.hpp"
#include "synthweaver/refiner.hpp"

namespace synthweaver {

inline constexpr int kDatasetSchemaVersion = 1;
inline constexpr int kDefaultContextWindow = 3;

// One example per step. Example k carries the final task text, the previous
// min(k, window) (observation, action) pairs, step k's observation and its
// action as the target. Throws EmptyTrajectory.
std::vector<TrainingExample> split_examples(const Trajectory& t, int window = kDefaultContextWindow);

struct ExportManifest {
  int schema_version = kDatasetSchemaVersion;
  std::size_t n_records = 0;
  std::size_t n_observations = 0;
  std::string content_hash;  // sha256 over dataset then observations bytes

  friend bool operator==(const ExportManifest&, const ExportManifest&) = default;
};

nlohmann::json to_json(const ExportManifest& m);

// dataset.jsonl record for an example; observations appear as refs only.
nlohmann::json example_record(const TrainingExample& e);

// Writes both files (one JSON object per line) and returns their manifest.
// Each distinct observation is stored once in the sidecar, in order of first
// use. Throws IoError.
ExportManifest export_jsonl(const std::vector<TrainingExample>& examples, const std::filesystem::path& dataset_path,
                            const std::filesystem::path& observations_path);

// Inverse of export_jsonl. Throws IoError, SchemaError.
std::vector<TrainingExample> import_jsonl(const std::filesystem::path& dataset_path,
                                          const std::filesystem::path& observations_path);

std::string content_hash(const std::filesystem::path& dataset_path, const std::filesystem::path& observations_path);

struct SiteStats {
  std::size_t n_tasks = 0;
  std::size_t n_trajectories = 0;  // raw, the denominator for the percentages
  std::size_t n_refined = 0;
  std::size_t n_dropped = 0;
  std::size_t n_completed = 0;
  std::size_t n_failed = 0;
  std::size_t n_exceeded = 0;
  double completed_pct = 0;
  double failed_pct = 0;
  double exceeded_pct = 0;
  double mean_steps = 0;    // over refined trajectories
  double mean_refines = 0;  // over raw trajectories
  Money total_cost;
  std::optional<int> diversity_score;
  std::optional<double> mean_quality;
};

struct CorpusStats {
  SiteStats overall;
  std::map<std::string, SiteStats> sites;
};

nlohmann::json to_json(const SiteStats& s);
nlohmann::json to_json(const CorpusStats& s);

// Raw terminal classes map to Completed/Failed/Exceeded; costs come from the
// call records grouped by site.
CorpusStats compute_stats(const std::vector<Task>& tasks, const std::vector<Trajectory>& raw,
                          const std::vector<Trajectory>& refined, const std::vector<DropRecord>& drops,
                          const std::vector<CallRecord>& calls);

CallRecord call_record_from_json(const nlohmann::json& j);

inline constexpr std::size_t kDiversitySample = 100;

// Numbered task list for the diversity prompt.
std::string task_list_block(const std::vector<Task>& tasks);

// Judges up to kDiversitySample tasks, sampled with `seed` when there are
// more. Throws std::invalid_argument for fewer than two tasks.
DiversityReply judge_diversity(Oracle& oracle, const std::vector<Task>& tasks, std::uint64_t seed,
                               const std::string& site = {});

QualityReply judge_quality(Oracle& oracle, const Trajectory& t);

}  // namespace synthweaver
