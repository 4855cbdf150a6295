#include "synthweaver/explorer.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "synthweaver/errors.hpp"
#include "synthweaver/replies.hpp"
#include "synthweaver/rng.hpp"

namespace synthweaver {

namespace {

std::string element_list(const Observation& obs) {
  std::string out;
  for (const auto& e : obs.elements) {
    out += "[" + std::to_string(e.id) + "] " + e.role + " \"" + e.name + "\"";
    if (!e.interactive) out += " (static)";
    out += "\n";
  }
  return out;
}

bool starts_with_word(const std::string& text, std::string_view word) {
  if (text.size() < word.size()) return false;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(text[i])) != std::tolower(static_cast<unsigned char>(word[i]))) {
      return false;
    }
  }
  return text.size() == word.size() || !std::isalpha(static_cast<unsigned char>(text[word.size()]));
}

}  // namespace

bool UrlPool::discover(const std::string& url, int depth) {
  if (depth_.contains(url)) return false;
  depth_.emplace(url, depth);
  discovered_.emplace_back(url, depth);
  return true;
}

void UrlPool::mark_visited(const std::string& url) {
  if (!depth_.contains(url)) throw std::logic_error("visiting undiscovered url " + url);
  visited_.insert(url);
}

std::optional<std::pair<std::string, int>> UrlPool::next_unvisited() const {
  for (const auto& entry : discovered_) {
    if (!visited_.contains(entry.first)) return entry;
  }
  return std::nullopt;
}

std::optional<int> UrlPool::depth_of(const std::string& url) const {
  auto it = depth_.find(url);
  if (it == depth_.end()) return std::nullopt;
  return it->second;
}

bool VisitLedger::visited(const std::string& url, std::int64_t id) const {
  auto it = seen_.find(url);
  return it != seen_.end() && it->second.contains(id);
}

void VisitLedger::mark(const std::string& url, std::int64_t id) { seen_[url].insert(id); }

std::size_t VisitLedger::size(const std::string& url) const {
  auto it = seen_.find(url);
  return it == seen_.end() ? 0 : it->second.size();
}

std::string IdSequence::peek() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d", n_ + 1);
  return prefix_ + buf;
}

std::string IdSequence::next() {
  std::string id = peek();
  ++n_;
  return id;
}

CategoryPlan categorize_page(Oracle& oracle, const Observation& obs, const PromptVars& meta) {
  if (obs.elements.empty()) throw EmptyPlan("page " + obs.url + " has no elements");
  PromptVars vars = meta;
  vars["url"] = obs.url;
  vars["page_context"] = obs.accessibility_tree;
  vars["elements"] = element_list(obs);
  vars["element_num"] = std::to_string(obs.elements.size());
  vars["const_uninteractive_category"] = kUninteractiveCategory;

  ReplyContext ctx;
  ctx.element_ids.emplace();
  for (const auto& e : obs.elements) ctx.element_ids->insert(e.id);

  std::vector<std::string> images;
  if (obs.screenshot_ref) images.push_back(*obs.screenshot_ref);
  const auto reply = oracle.ask(TemplateName::Categorize, vars, ctx, std::move(images)).as<CategorizationReply>();

  CategoryPlan plan;
  plan.page_url = obs.url;
  plan.categories = reply.categories;
  plan.uninteractive = reply.uninteractive;

  std::set<std::int64_t> covered(plan.uninteractive.begin(), plan.uninteractive.end());
  for (const auto& [name, actions] : plan.categories) {
    for (const auto& a : actions) covered.insert(*a.element_id);
  }
  for (const auto& e : obs.elements) {
    if (!covered.contains(e.id)) {
      plan.uninteractive.push_back(e.id);
      plan.diagnostics.push_back("element " + std::to_string(e.id) + " on " + obs.url +
                                 " was not categorized; treated as uninteractive");
    }
  }
  if (plan.categories.empty()) throw EmptyPlan("no interactive element categorized on " + obs.url);
  return plan;
}

std::vector<Interaction> sample_interactions(const CategoryPlan& plan, const VisitLedger& ledger, std::uint64_t seed,
                                             int per_category) {
  Rng rng(seed);
  std::vector<Interaction> out;
  for (const auto& [name, actions] : plan.categories) {
    std::vector<Action> unvisited;
    for (const auto& a : actions) {
      if (!ledger.visited(plan.page_url, *a.element_id)) unvisited.push_back(a);
    }
    for (auto& a : sample_without_replacement(std::move(unvisited), static_cast<std::size_t>(per_category), rng)) {
      out.push_back({name, std::move(a)});
    }
  }
  return out;
}

std::vector<InteractionTriplet> collect_triplets(Environment& env, const Observation& before,
                                                 const std::vector<Interaction>& interactions, int depth,
                                                 UrlPool& pool, VisitLedger& ledger, IdSequence& ids,
                                                 const std::string& site, std::vector<std::string>& diagnostics) {
  std::vector<InteractionTriplet> out;
  for (std::size_t i = 0; i < interactions.size(); ++i) {
    const Interaction& it = interactions[i];
    if (i > 0) {
      env.execute(Action::go_to(before.url));
    }
    const Observation current = i == 0 ? before : env.observe();
    try {
      env.execute(it.action);
    } catch (const ElementNotFound& e) {
      diagnostics.push_back("skipped " + render_action(it.action) + " on " + before.url + ": " + e.what());
      continue;
    }
    ledger.mark(before.url, *it.action.element_id);

    InteractionTriplet t;
    t.id = ids.next();
    t.site = site;
    t.category = it.category;
    t.depth = depth;
    t.before = current;
    t.action = it.action;
    t.after = env.observe();
    if (t.after.url != before.url) pool.discover(t.after.url, depth + 1);
    out.push_back(std::move(t));
  }
  if (!interactions.empty()) env.execute(Action::go_to(before.url));
  return out;
}

TaskType infer_task_type(const std::string& text) {
  static constexpr std::string_view kNavigate[] = {"navigate", "go to", "open", "visit", "browse", "return to"};
  static constexpr std::string_view kModify[] = {"create", "add", "post", "update", "delete", "remove", "change",
                                                 "edit", "set", "submit", "log in", "sign", "register", "subscribe",
                                                 "write", "save", "rename", "cancel"};
  const std::string t = normalize_whitespace(text);
  for (auto w : kNavigate) {
    if (starts_with_word(t, w)) return TaskType::SiteNavigation;
  }
  for (auto w : kModify) {
    if (starts_with_word(t, w)) return TaskType::ContentModification;
  }
  return TaskType::InformationSeeking;
}

std::string describe_triplet(const InteractionTriplet& t) {
  std::string out = render_action(t.action);
  if (!t.action.low_level_instruction.empty()) out += " (" + t.action.low_level_instruction + ")";
  if (t.action.element_id) {
    if (const Element* e = t.before.find(*t.action.element_id)) out += " on " + e->role + " \"" + e->name + "\"";
  }
  out += "\nBefore-action page: " + t.before.url + "\n" + t.before.accessibility_tree;
  if (!out.ends_with("\n")) out += "\n";
  out += "After-action page: " + t.after.url + "\n" + t.after.accessibility_tree;
  return out;
}

Task propose_task(Oracle& oracle, const InteractionTriplet& triplet, const SiteContext& site,
                  const std::string& task_id) {
  PromptVars vars;
  vars["website_intro"] = site.intro;
  vars["task_examples"] = site.task_examples;
  vars["current_action_str"] = describe_triplet(triplet);
  vars["website_name"] = site.name;
  vars["_site"] = site.name;
  vars["_task_id"] = task_id;
  vars["_category"] = triplet.category;
  vars["_action"] = render_action(triplet.action);
  vars["_url_before"] = triplet.before.url;
  vars["_url_after"] = triplet.after.url;

  std::vector<std::string> images;
  if (triplet.before.screenshot_ref) images.push_back(*triplet.before.screenshot_ref);
  if (triplet.after.screenshot_ref) images.push_back(*triplet.after.screenshot_ref);
  const auto reply = oracle.ask(TemplateName::ProposeTask, vars, {}, std::move(images)).as<TaskProposal>();

  Task task;
  task.id = task_id;
  task.site = site.name;
  task.triplet_id = triplet.id;
  task.text = reply.high_level_instruction;
  task.category = triplet.category;
  task.task_type = reply.task_type.value_or(infer_task_type(reply.high_level_instruction));
  return task;
}

ExploreResult explore(Environment& env, Oracle& oracle, const SiteContext& site, const ExplorerConfig& config,
                      std::uint64_t seed, const ExploreSinks& sinks) {
  if (config.max_pages <= 0 || config.max_tasks <= 0 || config.per_category <= 0) {
    throw std::invalid_argument("explorer budgets must be positive");
  }
  ExploreResult result;
  VisitLedger ledger;
  IdSequence triplet_ids(site.name, "trip");
  IdSequence task_ids(site.name, "task");
  std::set<std::string> seen_texts;
  auto diagnose = [&](std::string msg) {
    if (sinks.on_diagnostic) sinks.on_diagnostic(msg);
    result.diagnostics.push_back(std::move(msg));
  };

  env.reset();
  result.pool.discover(env.observe().url, 0);
  int pages = 0;

  while (pages < config.max_pages && static_cast<int>(result.tasks.size()) < config.max_tasks) {
    const auto next = result.pool.next_unvisited();
    if (!next) break;
    const auto& [url, depth] = *next;
    result.pool.mark_visited(url);

    const auto nav = env.execute(Action::go_to(url));
    if (nav.error) {
      diagnose("cannot revisit " + url + ": " + *nav.error);
      continue;
    }
    const Observation obs = env.observe();
    if (obs.elements.empty()) {
      diagnose("page " + url + " has no elements");
      continue;
    }
    ++pages;

    CategoryPlan plan;
    try {
      plan = categorize_page(oracle, obs, {{"_site", site.name}});
    } catch (const BudgetExhausted&) {
      throw;
    } catch (const OracleError& e) {
      diagnose("categorize " + url + ": " + e.what());
      continue;
    } catch (const EmptyPlan& e) {
      diagnose(e.what());
      continue;
    }
    for (auto& d : plan.diagnostics) diagnose(std::move(d));

    const auto interactions =
        sample_interactions(plan, ledger, derive_seed(seed, "page:" + url), config.per_category);
    std::vector<std::string> diags;
    auto triplets = collect_triplets(env, obs, interactions, depth, result.pool, ledger, triplet_ids, site.name, diags);
    for (auto& d : diags) diagnose(std::move(d));

    for (auto& t : triplets) {
      if (sinks.on_triplet) sinks.on_triplet(t);
      result.triplets.push_back(t);
      if (static_cast<int>(result.tasks.size()) >= config.max_tasks) continue;
      Task task;
      try {
        task = propose_task(oracle, t, site, task_ids.peek());
      } catch (const BudgetExhausted&) {
        throw;
      } catch (const OracleError& e) {
        diagnose("propose task for " + t.id + ": " + e.what());
        continue;
      }
      if (!seen_texts.insert(normalize_whitespace(task.text)).second) {
        diagnose("duplicate task text from " + t.id + " dropped");
        continue;
      }
      task_ids.next();
      if (sinks.on_task) sinks.on_task(task);
      result.tasks.push_back(std::move(task));
    }
  }
  return result;
}

}  // namespace synthweaver
