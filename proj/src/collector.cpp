#include "synthweaver/collector.hpp"

#include <algorithm>
#include <cctype>

#include "synthweaver/errors.hpp"
#include "synthweaver/replies.hpp"
#include "synthweaver/serde.hpp"

namespace synthweaver {

namespace {

std::string element_list(const Observation& obs) {
  std::string out;
  for (const auto& e : obs.elements) {
    if (!e.interactive) continue;
    out += "[" + std::to_string(e.id) + "] " + e.role + " \"" + e.name + "\"\n";
  }
  return out.empty() ? "(none)" : out;
}

std::vector<Step> tail(const std::vector<Step>& steps, int window) {
  const std::size_t w = static_cast<std::size_t>(window);
  return {steps.begin() + static_cast<std::ptrdiff_t>(steps.size() > w ? steps.size() - w : 0), steps.end()};
}

// Stop values follow the wire grammar: one line, no ']'.
std::string wire_safe(std::string text) {
  for (char& c : text) {
    if (c == ']') c = ')';
    if (c == '\n' || c == '\r') c = ' ';
  }
  if (text.size() > 240) text.resize(240);
  return text;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

void validate_collector_config(const CollectorConfig& c) {
  if (c.step_budget <= 0) throw std::invalid_argument("step_budget must be positive");
  if (c.context_window <= 0) throw std::invalid_argument("context_window must be positive");
  if (c.stall_noop_threshold <= 0) throw std::invalid_argument("stall_noop_threshold must be positive");
  if (c.loop_repeat_threshold <= 0) throw std::invalid_argument("loop_repeat_threshold must be positive");
  if (c.max_refines_per_task <= 0) throw std::invalid_argument("max_refines_per_task must be positive");
  if (c.signature_memory < c.loop_repeat_threshold) {
    throw std::invalid_argument("signature_memory must be at least loop_repeat_threshold");
  }
}

LoopSignature loop_signature(const std::string& url, const std::string& error) {
  std::string u = url.substr(0, url.find('#'));
  while (u.size() > 1 && u.back() == '/') u.pop_back();
  return {u, error.substr(0, error.find('\n'))};
}

bool check_stall(StallState& stall, const TransitionOutcome& outcome, const Observation& after,
                 const CollectorConfig& config) {
  stall.consecutive_noops = outcome.changed ? 0 : stall.consecutive_noops + 1;

  bool looped = false;
  if (outcome.error && !outcome.error->empty()) {
    const LoopSignature sig = loop_signature(after.url, *outcome.error);
    stall.recent_signatures.push_back(sig);
    while (stall.recent_signatures.size() > static_cast<std::size_t>(config.signature_memory)) {
      stall.recent_signatures.pop_front();
    }
    looped = std::count(stall.recent_signatures.begin(), stall.recent_signatures.end(), sig) >=
             config.loop_repeat_threshold;
  }
  return looped || stall.consecutive_noops >= config.stall_noop_threshold;
}

std::string format_history(const std::vector<Step>& history) {
  if (history.empty()) return "None (this is the first step).";
  std::string out;
  for (const Step& s : history) {
    out += "Step " + std::to_string(s.index) + ":\n";
    out += "- URL: " + s.observation.url + "\n";
    if (!s.state_summary.empty()) out += "- State: " + s.state_summary + "\n";
    out += "- Action: " + render_action(s.action);
    if (!s.action.low_level_instruction.empty()) out += " (" + s.action.low_level_instruction + ")";
    out += "\n";
    if (!s.outcome_error.empty()) out += "- Outcome: " + s.outcome_error + "\n";
  }
  return out;
}

std::string history_hint(std::size_t shown, std::size_t total, bool stalled) {
  std::string hint = total == 0 ? "no actions taken yet"
                                : "the last " + std::to_string(shown) + " of " + std::to_string(total) + " steps";
  if (stalled) hint += "; progress has stalled: repeated no-op actions or the same error page";
  return hint;
}

std::string screenshot_note(const Observation& obs) {
  return obs.screenshot_ref ? "<image is provided in the attachment>"
                            : "(no screenshot available; rely on the accessibility tree)";
}

ActionDecision next_action(Oracle& oracle, const Task& task, const std::vector<Step>& history, std::size_t total_steps,
                           const Observation& obs, const PromptVars& meta) {
  PromptVars vars = meta;
  vars["high_level_task"] = task.text;
  vars["url"] = obs.url;
  vars["page_context"] = obs.accessibility_tree;
  vars["elements"] = element_list(obs);
  vars["img_info"] = screenshot_note(obs);
  vars["hint_for_history"] = history_hint(history.size(), total_steps);
  vars["previous_state_action"] = format_history(history);

  std::vector<std::string> images;
  if (obs.screenshot_ref) images.push_back(*obs.screenshot_ref);
  RenderedPrompt prompt = render(TemplateName::NextAction, vars, images);

  ActionDecision out;
  auto adopt = [&](const NextActionReply& r) {
    out.action = r.action;
    out.reasoning = r.reasoning;
    out.state_summary = r.state_summary;
  };
  adopt(oracle.call(prompt).as<NextActionReply>());
  if (!out.action.element_id || obs.contains(*out.action.element_id)) return out;

  const std::string missing = std::to_string(*out.action.element_id);
  RenderedPrompt again = prompt;
  again.text += "\n\nYour previous reply used element_id " + missing +
                ", which is not in the Elements list of the current view. Choose an element_id from that list.";
  again.vars["_reask"] = "1";
  out.reasked = true;
  adopt(oracle.call(again).as<NextActionReply>());
  if (out.action.element_id && !obs.contains(*out.action.element_id)) {
    out.invalid_reference = "element " + std::to_string(*out.action.element_id) + " is not on " + obs.url;
  }
  return out;
}

ConflictTrigger classify_trigger(bool stalled, const std::string& analysis) {
  if (stalled) return ConflictTrigger::Stall;
  const std::string a = lower(analysis);
  for (const char* w : {"missing", "insufficient", "lacks", "lack of", "not specified", "unspecified", "ambiguous"}) {
    if (a.find(w) != std::string::npos) return ConflictTrigger::MissingArgs;
  }
  return ConflictTrigger::ExistsUI;
}

ConflictResult check_conflict(Oracle& oracle, const Task& task, const std::vector<Step>& history,
                              std::size_t total_steps, const Observation& obs, bool stalled,
                              const PromptVars& meta) {
  std::string previous;
  for (const auto& r : task.lineage) previous += r.prior_text + "\n";

  PromptVars vars = meta;
  vars["current_high_level_task"] = task.text;
  vars["previous_high_level_tasks"] = previous.empty() ? "None" : previous;
  vars["hint_for_history"] = history_hint(history.size(), total_steps, stalled);
  vars["previous_state_action"] = format_history(history);
  vars["curr_url"] = obs.url;
  vars["curr_state_context"] = obs.accessibility_tree;
  vars["img_info"] = screenshot_note(obs);
  vars["_stalled"] = stalled ? "1" : "0";

  std::vector<std::string> images;
  if (obs.screenshot_ref) images.push_back(*obs.screenshot_ref);

  ConflictResult out;
  RefineTaskReply reply;
  try {
    reply = oracle.ask(TemplateName::RefineTask, vars, {}, std::move(images)).as<RefineTaskReply>();
  } catch (const BudgetExhausted&) {
    throw;
  } catch (const OracleError& e) {
    out.diagnostic = e.what();
    return out;
  }
  if (!reply.need_to_refine) return out;
  out.triggered = true;
  out.trigger = classify_trigger(stalled, reply.analysis);
  out.refined_text = reply.high_level_task;
  return out;
}

Trajectory collect(Environment& env, Oracle& oracle, Task task, const CollectorConfig& config,
                   const std::string& trajectory_id, const CollectHooks& hooks) {
  validate_collector_config(config);
  auto emit = [&](nlohmann::json event) {
    if (!hooks.on_event) return;
    event["trajectory_id"] = trajectory_id;
    hooks.on_event(event);
  };

  env.reset();
  Trajectory traj;
  traj.id = trajectory_id;
  traj.site = task.site;
  traj.step_budget = config.step_budget;

  StallState stall;
  int refines = 0;
  const PromptVars meta = {{"_site", task.site}, {"_task_id", task.id}, {"_scope", trajectory_id}};

  for (int i = 0; i < config.step_budget; ++i) {
    Step step;
    step.index = i;
    step.observation = env.observe();
    step.task_snapshot = task.text;

    PromptVars step_meta = meta;
    step_meta["_step"] = std::to_string(i);
    const auto window = tail(traj.steps, config.context_window);

    ActionDecision decision;
    try {
      decision = next_action(oracle, task, window, traj.steps.size(), step.observation, step_meta);
    } catch (const BudgetExhausted&) {
      throw;
    } catch (const OracleError& e) {
      decision.action = Action::stop(wire_safe(std::string("oracle error: ") + e.what()));
      emit({{"type", "diagnostic"}, {"step", i}, {"message", e.what()}});
    }
    step.action = decision.action;
    step.reasoning = decision.reasoning;
    step.state_summary = decision.state_summary;

    if (step.action.is_terminal()) {
      env.execute(step.action);
      traj.steps.push_back(std::move(step));
      emit({{"type", "step"}, {"step", i}, {"action", render_action(traj.steps.back().action)}});
      break;
    }

    TransitionOutcome outcome;
    if (!decision.invalid_reference.empty()) {
      step.outcome_error = "InvalidElementReference: " + decision.invalid_reference;
    } else {
      try {
        outcome = env.execute(step.action);
        if (outcome.error) step.outcome_error = *outcome.error;
      } catch (const ElementNotFound& e) {
        step.outcome_error = e.what();
      }
    }
    emit({{"type", "step"},
          {"step", i},
          {"action", render_action(step.action)},
          {"changed", outcome.changed},
          {"error", step.outcome_error}});
    traj.steps.push_back(std::move(step));

    const Observation after = env.observe();
    const bool stalled = check_stall(stall, outcome, after, config);
    if (refines >= config.max_refines_per_task || i + 1 >= config.step_budget) continue;

    const auto conflict = check_conflict(oracle, task, tail(traj.steps, config.context_window), traj.steps.size(),
                                         after, stalled, step_meta);
    if (!conflict.diagnostic.empty()) emit({{"type", "diagnostic"}, {"step", i}, {"message", conflict.diagnostic}});
    if (!conflict.triggered) continue;

    const std::string prior = task.text;
    task.refine(i, *conflict.refined_text, conflict.trigger);
    ++refines;
    if (conflict.trigger == ConflictTrigger::Stall) stall.reset();
    emit({{"type", "refine"},
          {"step", i},
          {"trigger", to_string(conflict.trigger)},
          {"from", prior},
          {"to", task.text}});
  }

  traj.task = std::move(task);
  traj.refine_count = refines;
  traj.terminal = classify_terminal(traj.steps, traj.step_budget);
  traj.cost = oracle.ledger().cost_for_scope(trajectory_id);
  return traj;
}

}  // namespace synthweaver
