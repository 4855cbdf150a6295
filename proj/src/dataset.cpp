#include "synthweaver/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_map>

#include "synthweaver/errors.hpp"
#include "synthweaver/hashing.hpp"
#include "synthweaver/rng.hpp"
#include "synthweaver/serde.hpp"

namespace synthweaver {

using nlohmann::json;

std::vector<TrainingExample> split_examples(const Trajectory& t, int window) {
  if (window <= 0) throw std::invalid_argument("window must be positive");
  if (t.steps.empty()) throw EmptyTrajectory("trajectory " + t.id + " has no steps");
  std::vector<TrainingExample> out;
  out.reserve(t.steps.size());
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    TrainingExample e;
    e.task_text = t.task.text;
    const std::size_t first = k > static_cast<std::size_t>(window) ? k - static_cast<std::size_t>(window) : 0;
    for (std::size_t h = first; h < k; ++h) e.history.push_back({t.steps[h].observation, t.steps[h].action});
    e.current_observation = t.steps[k].observation;
    e.target_action = t.steps[k].action;
    e.meta = {t.site, t.id, t.steps[k].index};
    out.push_back(std::move(e));
  }
  return out;
}

json to_json(const ExportManifest& m) {
  return {{"schema_version", m.schema_version},
          {"n_records", m.n_records},
          {"n_observations", m.n_observations},
          {"content_hash", m.content_hash}};
}

json example_record(const TrainingExample& e) {
  json history = json::array();
  for (const auto& h : e.history) history.push_back({{"obs_ref", observation_ref(h.observation)}, {"action", h.action}});
  return {{"task", e.task_text},
          {"history", history},
          {"observation_ref", observation_ref(e.current_observation)},
          {"target_action", e.target_action},
          {"meta", {{"site", e.meta.site}, {"trajectory_id", e.meta.trajectory_id}, {"step_index", e.meta.step_index}}}};
}

ExportManifest export_jsonl(const std::vector<TrainingExample>& examples, const std::filesystem::path& dataset_path,
                            const std::filesystem::path& observations_path) {
  std::ofstream data(dataset_path, std::ios::binary | std::ios::trunc);
  std::ofstream obs(observations_path, std::ios::binary | std::ios::trunc);
  if (!data) throw IoError("cannot write " + dataset_path.string());
  if (!obs) throw IoError("cannot write " + observations_path.string());

  ExportManifest m;
  std::set<std::string> written;
  auto store = [&](const Observation& o) {
    const std::string ref = observation_ref(o);
    if (written.insert(ref).second) {
      obs << json{{"observation_ref", ref}, {"observation", o}}.dump() << '\n';
      ++m.n_observations;
    }
  };
  for (const auto& e : examples) {
    for (const auto& h : e.history) store(h.observation);
    store(e.current_observation);
    data << example_record(e).dump() << '\n';
    ++m.n_records;
  }
  data.close();
  obs.close();
  if (!data || !obs) throw IoError("write failed for " + dataset_path.string());
  m.content_hash = content_hash(dataset_path, observations_path);
  return m;
}

namespace {

std::string read_all(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

template <typename Fn>
void for_each_line(const std::filesystem::path& p, Fn fn) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw SchemaError(p.filename().string() + ":" + std::to_string(n) + ": not valid JSON");
    try {
      fn(j);
    } catch (const json::exception& e) {
      throw SchemaError(p.filename().string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
}

}  // namespace

std::string content_hash(const std::filesystem::path& dataset_path, const std::filesystem::path& observations_path) {
  Sha256 h;
  h.update("dataset.jsonl\n");
  h.update(read_all(dataset_path));
  h.update("observations.jsonl\n");
  h.update(read_all(observations_path));
  return h.hex_digest();
}

std::vector<TrainingExample> import_jsonl(const std::filesystem::path& dataset_path,
                                          const std::filesystem::path& observations_path) {
  std::unordered_map<std::string, Observation> observations;
  for_each_line(observations_path, [&](const json& j) {
    observations.emplace(j.at("observation_ref").get<std::string>(), j.at("observation").get<Observation>());
  });
  auto lookup = [&](const std::string& ref) -> const Observation& {
    auto it = observations.find(ref);
    if (it == observations.end()) throw SchemaError("dangling observation_ref " + ref);
    return it->second;
  };

  std::vector<TrainingExample> out;
  for_each_line(dataset_path, [&](const json& j) {
    TrainingExample e;
    e.task_text = j.at("task").get<std::string>();
    for (const auto& h : j.at("history")) {
      e.history.push_back({lookup(h.at("obs_ref").get<std::string>()), h.at("action").get<Action>()});
    }
    e.current_observation = lookup(j.at("observation_ref").get<std::string>());
    e.target_action = j.at("target_action").get<Action>();
    const json& meta = j.at("meta");
    e.meta = {meta.at("site").get<std::string>(), meta.at("trajectory_id").get<std::string>(),
              meta.at("step_index").get<int>()};
    out.push_back(std::move(e));
  });
  return out;
}

json to_json(const SiteStats& s) {
  json j = {{"n_tasks", s.n_tasks},
            {"n_trajectories", s.n_trajectories},
            {"n_refined", s.n_refined},
            {"n_dropped", s.n_dropped},
            {"n_completed", s.n_completed},
            {"n_failed", s.n_failed},
            {"n_exceeded", s.n_exceeded},
            {"completed_pct", s.completed_pct},
            {"failed_pct", s.failed_pct},
            {"exceeded_pct", s.exceeded_pct},
            {"mean_steps", s.mean_steps},
            {"mean_refines", s.mean_refines},
            {"total_cost_usd", s.total_cost.to_string()}};
  j["diversity_score"] = s.diversity_score ? json(*s.diversity_score) : json(nullptr);
  j["mean_quality"] = s.mean_quality ? json(*s.mean_quality) : json(nullptr);
  return j;
}

json to_json(const CorpusStats& s) {
  json sites = json::object();
  for (const auto& [name, st] : s.sites) sites[name] = to_json(st);
  return {{"schema_version", kDatasetSchemaVersion}, {"overall", to_json(s.overall)}, {"sites", sites}};
}

CallRecord call_record_from_json(const json& j) {
  CallRecord r;
  const auto name = template_from_string(j.at("template").get<std::string>());
  if (!name) throw SchemaError("unknown template in ledger record");
  r.name = *name;
  r.fingerprint = j.value("fingerprint", std::string{});
  r.usage = {j.at("prompt_tokens").get<std::int64_t>(), j.at("completion_tokens").get<std::int64_t>()};
  r.cost = Money::parse(j.at("cost_usd").get<std::string>());
  r.site = j.value("site", std::string{});
  r.task_id = j.value("task_id", std::string{});
  r.scope = j.value("scope", std::string{});
  r.accepted = j.value("accepted", false);
  return r;
}

namespace {

struct Accumulator {
  SiteStats stats;
  std::size_t refined_steps = 0;
  std::size_t refines = 0;

  void finish() {
    SiteStats& s = stats;
    if (s.n_trajectories > 0) {
      const double n = static_cast<double>(s.n_trajectories);
      s.completed_pct = 100.0 * static_cast<double>(s.n_completed) / n;
      s.failed_pct = 100.0 * static_cast<double>(s.n_failed) / n;
      s.exceeded_pct = 100.0 * static_cast<double>(s.n_exceeded) / n;
      s.mean_refines = static_cast<double>(refines) / n;
    }
    if (s.n_refined > 0) s.mean_steps = static_cast<double>(refined_steps) / static_cast<double>(s.n_refined);
  }
};

}  // namespace

CorpusStats compute_stats(const std::vector<Task>& tasks, const std::vector<Trajectory>& raw,
                          const std::vector<Trajectory>& refined, const std::vector<DropRecord>& drops,
                          const std::vector<CallRecord>& calls) {
  Accumulator overall;
  std::map<std::string, Accumulator> sites;
  auto both = [&](const std::string& site, auto fn) {
    fn(overall);
    fn(sites[site]);
  };

  for (const auto& t : tasks) both(t.site, [](Accumulator& a) { ++a.stats.n_tasks; });
  for (const auto& t : raw) {
    both(t.site, [&](Accumulator& a) {
      ++a.stats.n_trajectories;
      a.refines += static_cast<std::size_t>(t.refine_count);
      switch (t.terminal) {
        case TerminalClass::CompletedNone: ++a.stats.n_completed; break;
        case TerminalClass::StoppedByAgent: ++a.stats.n_failed; break;
        case TerminalClass::BudgetExceeded: ++a.stats.n_exceeded; break;
      }
    });
  }
  for (const auto& t : refined) {
    both(t.site, [&](Accumulator& a) {
      ++a.stats.n_refined;
      a.refined_steps += t.steps.size();
    });
  }
  for (const auto& d : drops) both(d.site, [](Accumulator& a) { ++a.stats.n_dropped; });
  for (const auto& c : calls) both(c.site, [&](Accumulator& a) { a.stats.total_cost += c.cost; });

  CorpusStats out;
  overall.finish();
  out.overall = overall.stats;
  for (auto& [name, acc] : sites) {
    if (name.empty()) continue;  // calls not tied to a site count toward the overall total only
    acc.finish();
    out.sites[name] = acc.stats;
  }
  return out;
}

std::string task_list_block(const std::vector<Task>& tasks) {
  std::string out;
  for (std::size_t i = 0; i < tasks.size(); ++i) out += std::to_string(i + 1) + ". " + tasks[i].text + "\n";
  return out;
}

DiversityReply judge_diversity(Oracle& oracle, const std::vector<Task>& tasks, std::uint64_t seed,
                               const std::string& site) {
  if (tasks.size() < 2) throw std::invalid_argument("diversity needs at least two tasks");
  std::vector<Task> sample = tasks;
  if (sample.size() > kDiversitySample) {
    Rng rng(seed);
    sample = sample_without_replacement(std::move(sample), kDiversitySample, rng);
    std::sort(sample.begin(), sample.end(), [](const Task& a, const Task& b) { return a.id < b.id; });
  }
  PromptVars vars = {{"task_list_block", task_list_block(sample)},
                     {"_site", site},
                     {"_n", std::to_string(sample.size())}};
  return oracle.ask(TemplateName::JudgeDiversity, vars).as<DiversityReply>();
}

QualityReply judge_quality(Oracle& oracle, const Trajectory& t) {
  PromptVars vars = {{"high_level_task", t.task.text},
                     {"trajectory", summarize_trajectory(t)},
                     {"_site", t.site},
                     {"_task_id", t.task.id},
                     {"_scope", t.id}};
  return oracle.ask(TemplateName::JudgeQuality, vars).as<QualityReply>();
}

}  // namespace synthweaver
