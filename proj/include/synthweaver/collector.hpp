#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthweaver/environment.hpp"
#include "synthweaver/model.hpp"
#include "synthweaver/oracle.hpp"

namespace synthweaver {

struct CollectorConfig {
  int step_budget = 30;
  int context_window = 3;
  int stall_noop_threshold = 3;
  int loop_repeat_threshold = 2;
  int max_refines_per_task = 4;
  int signature_memory = 16;  // how many recent (url, error) signatures are kept
};

// Throws std::invalid_argument naming the first non-positive field.
void validate_collector_config(const CollectorConfig& c);

using LoopSignature = std::pair<std::string, std::string>;

// (url without fragment or trailing slash, first line of the error).
LoopSignature loop_signature(const std::string& url, const std::string& error);

struct StallState {
  int consecutive_noops = 0;
  std::deque<LoopSignature> recent_signatures;  // oldest first

  void reset() {
    consecutive_noops = 0;
    recent_signatures.clear();
  }
};

// Folds one transition into `stall` and reports whether the agent is stuck:
// at least stall_noop_threshold no-ops in a row, or the outcome's error
// signature seen loop_repeat_threshold times among the remembered ones.
// Transitions without an error leave the signature list alone.
bool check_stall(StallState& stall, const TransitionOutcome& outcome, const Observation& after,
                 const CollectorConfig& config);

struct ActionDecision {
  Action action;
  std::string reasoning;
  std::string state_summary;
  bool reasked = false;
  std::string invalid_reference;  // set when the element stayed missing after the re-ask
};

// `history` is the last W steps, oldest first.
std::string format_history(const std::vector<Step>& history);
std::string history_hint(std::size_t shown, std::size_t total, bool stalled = false);
std::string screenshot_note(const Observation& obs);

// Asks NextAction. An element id missing from obs triggers one corrective
// re-ask; if that also misses, the decision carries invalid_reference.
ActionDecision next_action(Oracle& oracle, const Task& task, const std::vector<Step>& history, std::size_t total_steps,
                           const Observation& obs, const PromptVars& meta = {});

struct ConflictResult {
  bool triggered = false;
  ConflictTrigger trigger = ConflictTrigger::ExistsUI;
  std::optional<std::string> refined_text;
  std::string diagnostic;
};

// Trigger label for a RefineTask "yes": Stall when the mechanical predicate
// fired, otherwise MissingArgs when the analysis talks about missing or
// insufficient detail, otherwise ExistsUI.
ConflictTrigger classify_trigger(bool stalled, const std::string& analysis);

// One RefineTask call. OracleError other than BudgetExhausted is reported as
// not triggered, with the error in `diagnostic`.
ConflictResult check_conflict(Oracle& oracle, const Task& task, const std::vector<Step>& history,
                              std::size_t total_steps, const Observation& obs, bool stalled,
                              const PromptVars& meta = {});

struct CollectHooks {
  std::function<void(const nlohmann::json&)> on_event;
};

// Runs one episode on a freshly reset session. The trajectory's cost is what
// the ledger charged to this trajectory id. EnvironmentFailure and
// BudgetExhausted propagate.
Trajectory collect(Environment& env, Oracle& oracle, Task task, const CollectorConfig& config,
                   const std::string& trajectory_id, const CollectHooks& hooks = {});

}  // namespace synthweaver
