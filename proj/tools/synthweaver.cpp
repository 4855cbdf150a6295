#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "synthweaver/errors.hpp"
#include "synthweaver/pipeline.hpp"

namespace sw = synthweaver;

namespace {

struct Options {
  std::string config;
  std::optional<std::string> run;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> mock;
  std::optional<int> window;
  std::string format = "jsonl";
  std::vector<std::string> merge;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "Run configuration file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--run", o.run, "Run id (directory under runs_root)");
  cmd->add_option("--seed", o.seed, "Root seed");
  cmd->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--mock", o.mock, "Scripted oracle replies instead of a live endpoint")->check(CLI::ExistingFile);
}

sw::RunConfig effective_config(const Options& o) {
  sw::RunConfig c = sw::load_config(o.config);
  if (o.run) c.run_id = *o.run;
  if (o.seed) c.seed = *o.seed;
  if (o.workers) c.workers = *o.workers;
  if (o.mock) c.oracle.mock_script_path = std::filesystem::absolute(*o.mock);
  if (o.window) c.export_options.window = *o.window;
  c.export_options.format = o.format;
  for (const auto& m : o.merge) c.export_options.merge_runs.emplace_back(std::filesystem::absolute(m));
  sw::validate_config(c);
  return c;
}

void report(const char* stage, const sw::StageReport& r) {
  std::printf("%s: %zu new, %zu already done\n", stage, r.produced, r.skipped);
}

void print_cost(sw::Pipeline& p) {
  const auto& ledger = p.oracle().ledger();
  if (ledger.n_calls() == 0) return;
  std::printf("oracle: %zu calls, %lld tokens, $%s\n", ledger.n_calls(), static_cast<long long>(ledger.total_tokens()),
              ledger.total_cost().to_string().c_str());
}

int run_stage(const std::string& stage, const Options& o) {
  sw::Pipeline p(effective_config(o));
  std::printf("run directory: %s\n", p.paths().root.string().c_str());
  const bool all = stage == "run";
  if (all || stage == "explore") report("explore", p.explore());
  if (all || stage == "collect") report("collect", p.collect());
  if (all || stage == "refine") report("refine", p.refine());
  if (all || stage == "export") {
    const auto m = p.export_dataset();
    std::printf("export: %zu examples, %zu observations, content hash %s\n", m.n_records, m.n_observations,
                m.content_hash.c_str());
  }
  if (all || stage == "stats") {
    const auto s = p.stats();
    std::printf("stats: %zu trajectories, completed %.1f%%, failed %.1f%%, exceeded %.1f%%\n", s.overall.n_trajectories,
                s.overall.completed_pct, s.overall.failed_pct, s.overall.exceeded_pct);
  }
  print_cost(p);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthesize web-agent trajectories from a site graph or live browser"};
  app.require_subcommand(1);
  Options o;

  const std::vector<std::pair<std::string, std::string>> stages = {
      {"explore", "Discover pages and propose tasks"},
      {"collect", "Roll out the agent on every task"},
      {"refine", "Judge and edit raw trajectories"},
      {"export", "Write the training dataset"},
      {"stats", "Compute corpus statistics"},
      {"run", "All stages in order"},
  };
  std::string chosen;
  for (const auto& [name, help] : stages) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_common(cmd, o);
    if (name == "export" || name == "run") {
      cmd->add_option("--window", o.window, "History steps per example")->check(CLI::PositiveNumber);
      cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"jsonl"}));
      cmd->add_option("--merge", o.merge, "Other run directories whose refined trajectories are appended")
          ->check(CLI::ExistingDirectory);
    }
    cmd->callback([&chosen, name = name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return run_stage(chosen, o);
  } catch (const sw::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
