#include "synthweaver/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <thread>

#include "synthweaver/backends.hpp"
#include "synthweaver/errors.hpp"
#include "synthweaver/refiner.hpp"
#include "synthweaver/rng.hpp"
#include "synthweaver/serde.hpp"
#include "synthweaver/simulator.hpp"
#include "synthweaver/site_graph.hpp"
#include "synthweaver/webdriver.hpp"

namespace synthweaver {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Typed lookup with a default; a present value of the wrong type is a
// ConfigError naming `where.key`.
template <typename T>
T opt(const json& obj, const char* key, T fallback, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type: " + it->dump());
  }
}

const json& section(const json& doc, const char* key) {
  static const json empty = json::object();
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return empty;
  if (!it->is_object()) throw ConfigError(std::string(key) + " must be an object");
  return *it;
}

Money price(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  const std::string text = it->is_string() ? it->get<std::string>() : it->dump();
  try {
    return Money::parse(text);
  } catch (const std::exception&) {
    throw ConfigError(std::string("oracle.pricing.") + key + " is not a decimal amount: " + text);
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string trajectory_id_for(const std::string& task_id) {
  std::string id = task_id;
  if (auto pos = id.rfind("-task-"); pos != std::string::npos) return id.replace(pos, 6, "-traj-");
  return id + "-traj";
}

Trajectory parse_trajectory(const json& j) { return record_from_json<Trajectory>(j, "trajectory"); }
Task parse_task(const json& j) { return record_from_json<Task>(j, "task"); }

DropRecord parse_drop(const json& j) {
  try {
    return j.get<DropRecord>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("drop record: ") + e.what());
  }
}

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

RunConfig parse_config(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  const int version = opt<int>(doc, "schema_version", kConfigSchemaVersion, "config");
  if (version != kConfigSchemaVersion) {
    throw ConfigError("unsupported config schema_version " + std::to_string(version));
  }

  RunConfig c;
  c.runs_root = resolve(base_dir, opt<std::string>(doc, "runs_root", "runs", "config"));
  c.run_id = opt<std::string>(doc, "run_id", c.run_id, "config");
  c.seed = opt<std::uint64_t>(doc, "seed", 0, "config");
  c.workers = opt<int>(doc, "workers", 1, "config");

  auto sites = doc.find("sites");
  if (sites == doc.end() || !sites->is_array()) throw ConfigError("sites must be a list");
  for (std::size_t i = 0; i < sites->size(); ++i) {
    const json& s = (*sites)[i];
    const std::string where = "sites[" + std::to_string(i) + "]";
    if (!s.is_object()) throw ConfigError(where + " must be an object");
    SiteConfig site;
    site.name = opt<std::string>(s, "name", "", where);
    if (auto p = opt<std::string>(s, "site_graph_path", "", where); !p.empty()) site.site_graph_path = resolve(base_dir, p);
    if (auto e = opt<std::string>(s, "browser_endpoint", "", where); !e.empty()) site.browser_endpoint = e;
    site.start_url = opt<std::string>(s, "start_url", "", where);
    site.intro = opt<std::string>(s, "intro", "", where);
    site.task_examples = opt<std::string>(s, "task_examples", "", where);
    c.sites.push_back(std::move(site));
  }

  const json& o = section(doc, "oracle");
  c.oracle.endpoint = opt<std::string>(o, "endpoint", "", "oracle");
  c.oracle.model = opt<std::string>(o, "model", "", "oracle");
  c.oracle.api_key_env = opt<std::string>(o, "api_key_env", c.oracle.api_key_env, "oracle");
  if (o.contains("api_key")) throw ConfigError("oracle.api_key is not allowed; set oracle.api_key_env instead");
  if (auto m = opt<std::string>(o, "mock_script_path", "", "oracle"); !m.empty()) {
    c.oracle.mock_script_path = resolve(base_dir, m);
  }
  const json& pricing = section(o, "pricing");
  c.oracle.pricing.prompt_per_mtok = price(pricing, "prompt_usd_per_mtok");
  c.oracle.pricing.completion_per_mtok = price(pricing, "completion_usd_per_mtok");
  c.oracle.max_in_flight = opt<int>(o, "max_in_flight", c.oracle.max_in_flight, "oracle");
  c.oracle.max_retries = opt<int>(o, "max_retries", c.oracle.max_retries, "oracle");
  c.oracle.reparse_attempts = opt<int>(o, "reparse_attempts", c.oracle.reparse_attempts, "oracle");
  c.oracle.backoff_base_ms = opt<int>(o, "backoff_base_ms", c.oracle.backoff_base_ms, "oracle");
  c.oracle.temperature = opt<double>(o, "temperature", c.oracle.temperature, "oracle");
  c.oracle.max_total_tokens = opt<std::int64_t>(o, "max_total_tokens", 0, "oracle");

  const json& col = section(doc, "collector");
  c.collector.step_budget = opt<int>(col, "step_budget", c.collector.step_budget, "collector");
  c.collector.context_window = opt<int>(col, "context_window", c.collector.context_window, "collector");
  c.collector.stall_noop_threshold = opt<int>(col, "stall_noop_threshold", c.collector.stall_noop_threshold, "collector");
  c.collector.loop_repeat_threshold =
      opt<int>(col, "loop_repeat_threshold", c.collector.loop_repeat_threshold, "collector");
  c.collector.max_refines_per_task = opt<int>(col, "max_refines_per_task", c.collector.max_refines_per_task, "collector");

  const json& ex = section(doc, "explorer");
  c.explorer.max_pages = opt<int>(ex, "max_pages", c.explorer.max_pages, "explorer");
  c.explorer.max_tasks = opt<int>(ex, "max_tasks", c.explorer.max_tasks, "explorer");
  c.explorer.per_category = opt<int>(ex, "per_category", c.explorer.per_category, "explorer");

  const json& exp = section(doc, "export");
  c.export_options.window = opt<int>(exp, "window", c.export_options.window, "export");
  c.export_options.format = opt<std::string>(exp, "format", c.export_options.format, "export");
  for (const auto& m : opt<std::vector<std::string>>(exp, "merge", {}, "export")) {
    c.export_options.merge_runs.push_back(resolve(base_dir, m));
  }

  const json& st = section(doc, "stats");
  c.stats.judge_diversity = opt<bool>(st, "judge_diversity", false, "stats");
  c.stats.judge_quality = opt<bool>(st, "judge_quality", false, "stats");

  validate_config(c);
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

void validate_config(const RunConfig& c) {
  if (c.run_id.empty() || c.run_id.find('/') != std::string::npos) throw ConfigError("run_id must be a plain name");
  if (c.workers < 1) throw ConfigError("workers must be at least 1");
  if (c.sites.empty()) throw ConfigError("at least one site is required");
  std::set<std::string> names;
  for (const auto& s : c.sites) {
    if (s.name.empty()) throw ConfigError("every site needs a name");
    if (!names.insert(s.name).second) throw ConfigError("duplicate site name " + s.name);
    if (s.site_graph_path.has_value() == s.browser_endpoint.has_value()) {
      throw ConfigError("site " + s.name + " needs exactly one of site_graph_path and browser_endpoint");
    }
    if (s.browser_endpoint && s.start_url.empty()) throw ConfigError("browser site " + s.name + " needs start_url");
  }
  if (!c.oracle.mock_script_path && c.oracle.endpoint.empty()) {
    throw ConfigError("oracle needs an endpoint or a mock_script_path");
  }
  if (c.oracle.max_in_flight < 1 || c.oracle.max_in_flight > 1024) throw ConfigError("oracle.max_in_flight out of range");
  if (c.oracle.max_retries < 0 || c.oracle.reparse_attempts < 0 || c.oracle.backoff_base_ms < 0) {
    throw ConfigError("oracle retry settings must be non-negative");
  }
  try {
    validate_collector_config(c.collector);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("collector: ") + e.what());
  }
  if (c.explorer.max_pages <= 0 || c.explorer.max_tasks <= 0 || c.explorer.per_category <= 0) {
    throw ConfigError("explorer budgets must be positive");
  }
  if (c.export_options.window <= 0) throw ConfigError("export.window must be positive");
  if (c.export_options.format != "jsonl") throw ConfigError("export.format must be jsonl");
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      while (!failed) {
        const std::size_t i = next++;
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!first) first = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first) std::rethrow_exception(first);
}

std::shared_ptr<ChatBackend> make_backend(const OracleConfig& config) {
  if (config.mock_script_path) {
    try {
      return std::make_shared<MockBackend>(MockBackend::from_file(*config.mock_script_path));
    } catch (const SchemaError& e) {
      throw ConfigError(e.what());
    } catch (const IoError& e) {
      throw ConfigError(e.what());
    }
  }
  HttpBackendSettings s;
  s.endpoint = config.endpoint;
  s.model = config.model;
  s.temperature = config.temperature;
  if (const char* key = std::getenv(config.api_key_env.c_str())) s.api_key = key;
  return std::make_shared<HttpChatBackend>(std::move(s));
}

std::unique_ptr<EnvironmentFactory> make_environment(const SiteConfig& site, const RunPaths& paths) {
  if (site.site_graph_path) {
    auto graph = std::make_shared<const SiteGraph>(load_site_graph(*site.site_graph_path));
    return std::make_unique<SimulatedSiteFactory>(std::move(graph));
  }
  BrowserConfig b;
  b.endpoint_url = *site.browser_endpoint;
  b.start_url = site.start_url;
  b.screenshot_dir = paths.screenshots();
  return std::make_unique<WebDriverFactory>(std::move(b));
}

Pipeline::Pipeline(RunConfig config, std::shared_ptr<ChatBackend> backend)
    : config_(std::move(config)), paths_{config_.run_dir()} {
  validate_config(config_);
  if (!backend) backend = make_backend(config_.oracle);
  OracleSettings settings;
  settings.pricing = config_.oracle.pricing;
  settings.max_retries = config_.oracle.max_retries;
  settings.reparse_attempts = config_.oracle.reparse_attempts;
  settings.backoff_base = std::chrono::milliseconds(config_.oracle.backoff_base_ms);
  settings.max_in_flight = config_.oracle.max_in_flight;
  settings.max_total_tokens = config_.oracle.max_total_tokens;
  oracle_ = std::make_unique<Oracle>(std::move(backend), settings);

  fs::create_directories(paths_.root);
  events_ = std::make_unique<JsonlWriter>(paths_.events());
  ledger_ = std::make_unique<JsonlWriter>(paths_.ledger());
  oracle_->ledger().set_sink([this](const CallRecord& r) { ledger_->write(to_json(r)); });
}

void Pipeline::event(json e) {
  e["ts_ms"] = now_ms();
  events_->write(e);
}

const SiteConfig& Pipeline::site(const std::string& name) const {
  for (const auto& s : config_.sites) {
    if (s.name == name) return s;
  }
  throw ConfigError("record refers to unknown site " + name);
}

StageReport Pipeline::explore() {
  std::set<std::string> done;
  for (const auto& p : read_jsonl(paths_.progress())) {
    if (p.value("stage", "") == "explore" && p.value("status", "") == "done") done.insert(p.value("site", ""));
  }
  std::vector<const SiteConfig*> todo;
  for (const auto& s : config_.sites) {
    if (!done.contains(s.name)) todo.push_back(&s);
  }

  StageReport report;
  report.skipped = config_.sites.size() - todo.size();
  // A site interrupted mid-exploration starts over; drop its partial records.
  for (const SiteConfig* s : todo) {
    auto other_site = [&](const json& r) { return r.value("site", "") != s->name; };
    filter_jsonl(paths_.tasks(), other_site);
    filter_jsonl(paths_.triplets(), other_site);
  }

  JsonlWriter tasks(paths_.tasks());
  JsonlWriter triplets(paths_.triplets());
  JsonlWriter progress(paths_.progress());
  std::atomic<std::size_t> produced{0};

  parallel_for(todo.size(), config_.workers, [&](std::size_t i) {
    const SiteConfig& s = *todo[i];
    event({{"stage", "explore"}, {"site", s.name}, {"type", "start"}});
    auto env = make_environment(s, paths_)->open();
    ExploreSinks sinks;
    sinks.on_triplet = [&](const InteractionTriplet& t) { triplets.write(t); };
    sinks.on_task = [&](const Task& t) { tasks.write(t); };
    sinks.on_diagnostic = [&](const std::string& d) {
      event({{"stage", "explore"}, {"site", s.name}, {"type", "diagnostic"}, {"message", d}});
    };
    const auto result = synthweaver::explore(*env, *oracle_, {s.name, s.intro, s.task_examples}, config_.explorer,
                                             derive_seed(config_.seed, "explore:" + s.name), sinks);
    produced += result.tasks.size();
    progress.write({{"stage", "explore"},
                    {"site", s.name},
                    {"status", "done"},
                    {"n_tasks", result.tasks.size()},
                    {"n_triplets", result.triplets.size()},
                    {"n_pages", result.pool.visited().size()}});
    event({{"stage", "explore"}, {"site", s.name}, {"type", "done"}, {"n_tasks", result.tasks.size()}});
  });
  report.produced = produced;
  return report;
}

StageReport Pipeline::collect() {
  repair_jsonl(paths_.raw());
  repair_jsonl(paths_.drops());
  const auto tasks = read_records<Task>(paths_.tasks(), parse_task);
  std::set<std::string> done = field_values(paths_.raw(), "id");
  for (const auto& id : field_values(paths_.drops(), "trajectory_id")) done.insert(id);

  std::vector<const Task*> todo;
  for (const auto& t : tasks) {
    if (!done.contains(trajectory_id_for(t.id))) todo.push_back(&t);
  }
  StageReport report;
  report.skipped = tasks.size() - todo.size();

  std::map<std::string, std::unique_ptr<EnvironmentFactory>> factories;
  for (const Task* t : todo) {
    if (!factories.contains(t->site)) factories.emplace(t->site, make_environment(site(t->site), paths_));
  }

  JsonlWriter raw(paths_.raw());
  JsonlWriter drops(paths_.drops());
  std::atomic<std::size_t> produced{0};
  parallel_for(todo.size(), config_.workers, [&](std::size_t i) {
    const Task& task = *todo[i];
    const std::string id = trajectory_id_for(task.id);
    CollectHooks hooks;
    hooks.on_event = [&](json e) {
      e["stage"] = "collect";
      event(std::move(e));
    };
    try {
      auto env = factories.at(task.site)->open();
      const Trajectory traj = synthweaver::collect(*env, *oracle_, task, config_.collector, id, hooks);
      raw.write(traj);
      ++produced;
    } catch (const EnvironmentFailure& e) {
      drops.write(DropRecord{id, task.site, task.id, std::string("environment failure: ") + e.what()});
      event({{"stage", "collect"}, {"trajectory_id", id}, {"type", "dropped"}, {"message", e.what()}});
    }
  });
  report.produced = produced;
  return report;
}

StageReport Pipeline::refine() {
  repair_jsonl(paths_.refined());
  repair_jsonl(paths_.drops());
  const auto raw = read_records<Trajectory>(paths_.raw(), parse_trajectory);
  std::set<std::string> done = field_values(paths_.refined(), "id");
  for (const auto& id : field_values(paths_.drops(), "trajectory_id")) done.insert(id);

  std::vector<const Trajectory*> todo;
  for (const auto& t : raw) {
    if (!done.contains(t.id)) todo.push_back(&t);
  }
  StageReport report;
  report.skipped = raw.size() - todo.size();

  JsonlWriter refined(paths_.refined());
  JsonlWriter drops(paths_.drops());
  std::atomic<std::size_t> produced{0};
  parallel_for(todo.size(), config_.workers, [&](std::size_t i) {
    const Trajectory& t = *todo[i];
    const RefineOutcome outcome = synthweaver::refine(*oracle_, t);
    json e = {{"stage", "refine"}, {"trajectory_id", t.id}};
    if (outcome.refined) {
      refined.write(*outcome.refined);
      e["type"] = outcome.reply ? std::string(to_string(outcome.reply->decision)) : "refine";
      e["steps_before"] = t.steps.size();
      e["steps_after"] = outcome.refined->steps.size();
      ++produced;
    } else {
      drops.write(*outcome.drop);
      e["type"] = "drop";
      e["reason"] = outcome.drop->reason;
    }
    event(std::move(e));
  });
  report.produced = produced;
  return report;
}

ExportManifest Pipeline::export_dataset() {
  std::vector<Trajectory> refined = read_records<Trajectory>(paths_.refined(), parse_trajectory);
  for (const auto& dir : config_.export_options.merge_runs) {
    if (!fs::exists(RunPaths{dir}.refined())) throw IoError("merge source " + dir.string() + " has no refined file");
    auto more = read_records<Trajectory>(RunPaths{dir}.refined(), parse_trajectory);
    refined.insert(refined.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  }
  std::sort(refined.begin(), refined.end(), [](const Trajectory& a, const Trajectory& b) { return a.id < b.id; });
  const auto dup = std::adjacent_find(refined.begin(), refined.end(),
                                      [](const Trajectory& a, const Trajectory& b) { return a.id == b.id; });
  if (dup != refined.end()) throw IoError("trajectory id " + dup->id + " appears in more than one merged run");

  std::vector<TrainingExample> examples;
  for (const auto& t : refined) {
    auto ex = split_examples(t, config_.export_options.window);
    examples.insert(examples.end(), std::make_move_iterator(ex.begin()), std::make_move_iterator(ex.end()));
  }
  ExportManifest m = export_jsonl(examples, paths_.dataset(), paths_.observations());
  json doc = to_json(m);
  doc["n_trajectories"] = refined.size();
  doc["window"] = config_.export_options.window;
  doc["format"] = config_.export_options.format;
  doc["files"] = {paths_.dataset().filename().string(), paths_.observations().filename().string()};
  write_json_file(paths_.manifest(), doc);
  event({{"stage", "export"}, {"type", "done"}, {"n_records", m.n_records}, {"content_hash", m.content_hash}});
  return m;
}

CorpusStats Pipeline::stats() {
  const auto tasks = read_records<Task>(paths_.tasks(), parse_task);
  const auto raw = read_records<Trajectory>(paths_.raw(), parse_trajectory);
  const auto refined = read_records<Trajectory>(paths_.refined(), parse_trajectory);
  const auto drops = read_records<DropRecord>(paths_.drops(), parse_drop);

  std::map<std::string, int> diversity;
  std::map<std::string, double> quality;
  if (config_.stats.judge_diversity) {
    std::map<std::string, std::vector<Task>> by_site;
    for (const auto& t : tasks) by_site[t.site].push_back(t);
    by_site[""] = tasks;  // the whole corpus
    for (const auto& [name, list] : by_site) {
      if (list.size() < 2) continue;
      try {
        diversity[name] = judge_diversity(*oracle_, list, derive_seed(config_.seed, "diversity:" + name), name).score;
      } catch (const OracleError& e) {
        event({{"stage", "stats"}, {"type", "diagnostic"}, {"message", e.what()}});
      }
    }
  }
  if (config_.stats.judge_quality) {
    std::map<std::string, std::pair<double, int>> sums;
    for (const auto& t : refined) {
      try {
        const double score = judge_quality(*oracle_, t).score;
        sums[t.site].first += score;
        sums[t.site].second += 1;
        sums[""].first += score;
        sums[""].second += 1;
      } catch (const OracleError& e) {
        event({{"stage", "stats"}, {"type", "diagnostic"}, {"message", e.what()}});
      }
    }
    for (const auto& [name, s] : sums) quality[name] = s.first / s.second;
  }

  std::vector<CallRecord> calls;
  for (const auto& j : read_jsonl(paths_.ledger())) {
    try {
      calls.push_back(call_record_from_json(j));
    } catch (const std::exception& e) {
      throw SchemaError(std::string("ledger record: ") + e.what());
    }
  }
  CorpusStats s = compute_stats(tasks, raw, refined, drops, calls);
  auto fill = [&](const std::string& name, SiteStats& st) {
    if (auto it = diversity.find(name); it != diversity.end()) st.diversity_score = it->second;
    if (auto it = quality.find(name); it != quality.end()) st.mean_quality = it->second;
  };
  fill("", s.overall);
  for (auto& [name, st] : s.sites) fill(name, st);
  write_json_file(paths_.stats(), to_json(s));
  event({{"stage", "stats"}, {"type", "done"}});
  return s;
}

}  // namespace synthweaver
