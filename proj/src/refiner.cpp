#include "synthweaver/refiner.hpp"

#include "synthweaver/errors.hpp"

namespace synthweaver {

std::string summarize_trajectory(const Trajectory& t) {
  std::string out = "Length of trajectory: " + std::to_string(t.steps.size()) + "\n";
  out += "High-level task: " + t.task.text + "\n";
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const Step& s = t.steps[i];
    out += "Step " + std::to_string(i) + ":\n";
    out += "  Summary of state: " + (s.state_summary.empty() ? std::string("(no summary)") : s.state_summary) + "\n";
    out += "  Action: " + render_action(s.action);
    if (!s.action.low_level_instruction.empty()) out += " (" + s.action.low_level_instruction + ")";
    out += "\n";
  }
  return out;
}

RefineTrajectoryReply decide(Oracle& oracle, const Trajectory& t) {
  if (t.steps.empty()) throw EmptyTrajectory("trajectory " + t.id + " has no steps");
  PromptVars vars = {{"trajectory", summarize_trajectory(t)},
                     {"_site", t.site},
                     {"_task_id", t.task.id},
                     {"_scope", t.id},
                     {"_k", std::to_string(t.steps.size())},
                     {"_terminal", std::string(to_string(t.terminal))}};
  ReplyContext ctx;
  ctx.trajectory_length = t.steps.size();
  return oracle.ask(TemplateName::RefineTrajectory, vars, ctx).as<RefineTrajectoryReply>();
}

std::optional<Trajectory> apply_edits(const Trajectory& t, const RefineTrajectoryReply& reply) {
  if (auto why = refine_reply_violation(reply, t.steps.size()); !why.empty()) throw EditContractViolation(why);
  auto ends_in_answer = [](const std::vector<Step>& steps) {
    return !steps.empty() && steps.back().action.kind == ActionKind::None && !steps.back().action.value.empty();
  };

  switch (reply.decision) {
    case RefineDecision::Drop:
      return std::nullopt;
    case RefineDecision::Keep:
      if (!ends_in_answer(t.steps)) throw EditContractViolation("keep on a trajectory that does not end in none");
      return t;
    case RefineDecision::Refine:
      break;
  }

  if (reply.modify_end && reply.append_end) throw EditContractViolation("modify_end and append_end are both set");
  Trajectory out = t;
  out.steps.clear();
  for (int idx : reply.order) out.steps.push_back(t.steps[static_cast<std::size_t>(idx)]);
  if (out.steps.empty()) throw EditContractViolation("refine keeps no steps");

  const Action answer = Action::none(reply.final_none_value);
  if (reply.modify_end) {
    out.steps.back().action = answer;
  } else if (reply.append_end) {
    Step last;
    last.observation = out.steps.back().observation;
    last.action = answer;
    last.task_snapshot = t.task.text;
    out.steps.push_back(std::move(last));
  }
  if (auto why = action_violation(out.steps.back().action); !why.empty()) throw EditContractViolation(why);
  if (!ends_in_answer(out.steps)) throw EditContractViolation("refined trajectory does not end in none with a value");
  for (std::size_t i = 0; i + 1 < out.steps.size(); ++i) {
    if (out.steps[i].action.is_terminal()) {
      throw EditContractViolation("terminal action at step " + std::to_string(i) + " before the end");
    }
  }

  for (std::size_t i = 0; i < out.steps.size(); ++i) out.steps[i].index = static_cast<int>(i);
  out.terminal = TerminalClass::CompletedNone;
  return out;
}

void to_json(nlohmann::json& j, const DropRecord& d) {
  j = {{"trajectory_id", d.trajectory_id}, {"site", d.site}, {"task_id", d.task_id}, {"drop_reason", d.reason}};
}

void from_json(const nlohmann::json& j, DropRecord& d) {
  d.trajectory_id = j.at("trajectory_id").get<std::string>();
  d.site = j.value("site", std::string{});
  d.task_id = j.value("task_id", std::string{});
  d.reason = j.at("drop_reason").get<std::string>();
}

RefineOutcome refine(Oracle& oracle, const Trajectory& t) {
  RefineOutcome out;
  auto drop = [&](std::string reason) {
    out.refined.reset();
    out.drop = DropRecord{t.id, t.site, t.task.id, std::move(reason)};
    return out;
  };

  try {
    out.reply = decide(oracle, t);
  } catch (const BudgetExhausted&) {
    throw;
  } catch (const SchemaViolation&) {
    return drop("unparseable judge reply");
  } catch (const OracleError& e) {
    return drop(std::string("oracle failure: ") + e.what());
  } catch (const EmptyTrajectory& e) {
    return drop(e.what());
  }

  try {
    out.refined = apply_edits(t, *out.reply);
  } catch (const EditContractViolation& e) {
    return drop(e.what());
  }
  if (!out.refined) return drop(out.reply->drop_reason);
  return out;
}

}  // namespace synthweaver
