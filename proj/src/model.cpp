#include "synthweaver/model.hpp"

#include <nlohmann/json.hpp>

#include "synthweaver/errors.hpp"
#include "synthweaver/hashing.hpp"

namespace synthweaver {

const Element* Observation::find(std::int64_t id) const {
  for (const auto& e : elements) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

std::string canonical_observation(const Observation& obs) {
  nlohmann::json elements = nlohmann::json::array();
  for (const auto& e : obs.elements) {
    elements.push_back({{"id", e.id}, {"role", e.role}, {"name", e.name}, {"interactive", e.interactive}});
  }
  nlohmann::json j = {{"url", obs.url}, {"tree", obs.accessibility_tree}, {"elements", elements}};
  return j.dump();
}

std::string observation_ref(const Observation& obs) {
  Sha256 h;
  h.update(canonical_observation(obs));
  if (obs.screenshot_ref) {
    h.update("\n");
    h.update(*obs.screenshot_ref);
  }
  return h.hex_digest();
}

std::string_view to_string(TaskType t) {
  switch (t) {
    case TaskType::InformationSeeking: return "information_seeking";
    case TaskType::SiteNavigation: return "site_navigation";
    case TaskType::ContentModification: return "content_modification";
  }
  return "information_seeking";
}

TaskType task_type_from_string(std::string_view s) {
  if (s == "information_seeking") return TaskType::InformationSeeking;
  if (s == "site_navigation") return TaskType::SiteNavigation;
  if (s == "content_modification") return TaskType::ContentModification;
  throw SchemaError("unknown task type '" + std::string(s) + "'");
}

std::string_view to_string(ConflictTrigger t) {
  switch (t) {
    case ConflictTrigger::ExistsUI: return "exists_ui";
    case ConflictTrigger::MissingArgs: return "missing_args";
    case ConflictTrigger::Stall: return "stall";
  }
  return "exists_ui";
}

ConflictTrigger conflict_trigger_from_string(std::string_view s) {
  if (s == "exists_ui") return ConflictTrigger::ExistsUI;
  if (s == "missing_args") return ConflictTrigger::MissingArgs;
  if (s == "stall") return ConflictTrigger::Stall;
  throw SchemaError("unknown conflict trigger '" + std::string(s) + "'");
}

const std::string& Task::original_text() const {
  return lineage.empty() ? text : lineage.front().prior_text;
}

void Task::refine(int step_index, std::string new_text, ConflictTrigger trigger) {
  if (!lineage.empty() && step_index < lineage.back().step_index) {
    throw InvalidTrajectory("task lineage must be ordered by step index");
  }
  lineage.push_back({step_index, text, trigger});
  text = std::move(new_text);
}

std::string_view to_string(TerminalClass t) {
  switch (t) {
    case TerminalClass::CompletedNone: return "completed_none";
    case TerminalClass::StoppedByAgent: return "stopped_by_agent";
    case TerminalClass::BudgetExceeded: return "budget_exceeded";
  }
  return "completed_none";
}

TerminalClass terminal_from_string(std::string_view s) {
  if (s == "completed_none") return TerminalClass::CompletedNone;
  if (s == "stopped_by_agent") return TerminalClass::StoppedByAgent;
  if (s == "budget_exceeded") return TerminalClass::BudgetExceeded;
  throw SchemaError("unknown terminal class '" + std::string(s) + "'");
}

TerminalClass classify_terminal(const std::vector<Step>& steps, int step_budget) {
  if (steps.empty()) throw InvalidTrajectory("trajectory has no steps");
  const Action& last = steps.back().action;
  if (last.kind == ActionKind::None && !last.value.empty()) return TerminalClass::CompletedNone;
  if (last.kind == ActionKind::Stop) return TerminalClass::StoppedByAgent;
  if (static_cast<int>(steps.size()) == step_budget) return TerminalClass::BudgetExceeded;
  throw InvalidTrajectory("trajectory of " + std::to_string(steps.size()) +
                          " steps ends without none/stop and below the step budget of " +
                          std::to_string(step_budget));
}

std::string trajectory_violation(const Trajectory& t) {
  if (t.steps.empty()) return "trajectory has no steps";
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const Step& s = t.steps[i];
    if (s.index != static_cast<int>(i)) return "step index " + std::to_string(s.index) + " at position " + std::to_string(i);
    if (s.task_snapshot.empty()) return "empty task snapshot at step " + std::to_string(i);
    if (auto why = action_violation(s.action); !why.empty()) return "step " + std::to_string(i) + ": " + why;
  }
  TerminalClass expected;
  try {
    expected = classify_terminal(t.steps, t.step_budget);
  } catch (const InvalidTrajectory& e) {
    return e.what();
  }
  if (expected != t.terminal) return "terminal class does not match the steps";
  if (t.refine_count != static_cast<int>(t.task.lineage.size())) return "refine_count differs from lineage length";
  if (t.cost < Money{}) return "negative cost";
  return {};
}

std::string normalize_whitespace(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace synthweaver
