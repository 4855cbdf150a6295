#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "synthweaver/environment.hpp"
#include "synthweaver/model.hpp"
#include "synthweaver/oracle.hpp"

namespace synthweaver {

struct CategoryPlan {
  std::string page_url;
  std::map<std::string, std::vector<Action>> categories;
  std::vector<std::int64_t> uninteractive;
  std::vector<std::string> diagnostics;
};

// Pages discovered so far, in discovery order, with BFS depth labels.
class UrlPool {
 public:
  // Adds url at `depth` unless already known. Returns true when added.
  bool discover(const std::string& url, int depth);
  void mark_visited(const std::string& url);

  // First discovered url not yet visited.
  std::optional<std::pair<std::string, int>> next_unvisited() const;
  std::optional<int> depth_of(const std::string& url) const;

  const std::vector<std::pair<std::string, int>>& discovered() const { return discovered_; }
  const std::set<std::string>& visited() const { return visited_; }

 private:
  std::vector<std::pair<std::string, int>> discovered_;
  std::map<std::string, int> depth_;
  std::set<std::string> visited_;
};

// Element ids already interacted with, per page url.
class VisitLedger {
 public:
  bool visited(const std::string& url, std::int64_t id) const;
  void mark(const std::string& url, std::int64_t id);
  std::size_t size(const std::string& url) const;

 private:
  std::map<std::string, std::set<std::int64_t>> seen_;
};

struct Interaction {
  std::string category;
  Action action;
};

struct SiteContext {
  std::string name;
  std::string intro;
  std::string task_examples;
};

struct ExplorerConfig {
  int max_pages = 50;
  int max_tasks = 500;
  int per_category = 2;
};

// Assigns the next `<site>-trip-NNNN` / `<site>-task-NNNN` ids.
class IdSequence {
 public:
  IdSequence(std::string site, std::string kind) : prefix_(std::move(site) + "-" + std::move(kind) + "-") {}
  std::string next();
  std::string peek() const;  // the id next() will return

 private:
  std::string prefix_;
  int n_ = 0;
};

// Sends the Categorize prompt and validates the plan against obs. Elements
// the reply leaves out are appended to the uninteractive list with a
// diagnostic. Throws EmptyPlan when no interactive element is categorized.
CategoryPlan categorize_page(Oracle& oracle, const Observation& obs, const PromptVars& meta = {});

// Up to per_category unvisited elements per category, uniformly without
// replacement. Categories are visited in name order.
std::vector<Interaction> sample_interactions(const CategoryPlan& plan, const VisitLedger& ledger, std::uint64_t seed,
                                             int per_category = 2);

// Executes each interaction from `before`'s page, restoring that page with a
// goto between interactions. Newly reached urls join the pool at depth + 1.
// ElementNotFound skips the interaction and adds a diagnostic.
std::vector<InteractionTriplet> collect_triplets(Environment& env, const Observation& before,
                                                 const std::vector<Interaction>& interactions, int depth,
                                                 UrlPool& pool, VisitLedger& ledger, IdSequence& ids,
                                                 const std::string& site, std::vector<std::string>& diagnostics);

// Best-effort task type from the leading verb, used when a proposal does not
// state one.
TaskType infer_task_type(const std::string& task_text);

// Text handed to the proposal prompt as the current action: the action,
// its instruction and both page views.
std::string describe_triplet(const InteractionTriplet& t);

Task propose_task(Oracle& oracle, const InteractionTriplet& triplet, const SiteContext& site,
                  const std::string& task_id);

struct ExploreSinks {
  std::function<void(const InteractionTriplet&)> on_triplet;
  std::function<void(const Task&)> on_task;
  std::function<void(const std::string&)> on_diagnostic;
};

struct ExploreResult {
  std::vector<InteractionTriplet> triplets;
  std::vector<Task> tasks;
  std::vector<std::string> diagnostics;
  UrlPool pool;
};

// Breadth-first exploration of one site until max_pages pages have been
// categorized or max_tasks tasks proposed. Oracle failures on a page or
// triplet become diagnostics; BudgetExhausted propagates.
ExploreResult explore(Environment& env, Oracle& oracle, const SiteContext& site, const ExplorerConfig& config,
                      std::uint64_t seed, const ExploreSinks& sinks = {});

}  // namespace synthweaver
