#include "synthweaver/replies.hpp"

#include <algorithm>
#include <cctype>

#include "synthweaver/errors.hpp"

namespace synthweaver {

using nlohmann::json;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

void require_object(const json& j, const char* what) {
  if (!j.is_object()) throw SchemaViolation(std::string(what) + " reply must be a JSON object");
}

const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaViolation(std::string("missing field \"") + key + "\"");
  return *it;
}

std::string string_field(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_string()) throw SchemaViolation(std::string("field \"") + key + "\" must be a string");
  return v.get<std::string>();
}

std::string optional_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_string()) throw SchemaViolation(std::string("field \"") + key + "\" must be a string");
  return it->get<std::string>();
}

int bounded_int(const json& j, const char* key, int lo, int hi) {
  const json& v = field(j, key);
  if (!v.is_number_integer()) throw SchemaViolation(std::string("field \"") + key + "\" must be an integer");
  const auto n = v.get<std::int64_t>();
  if (n < lo || n > hi) {
    throw SchemaViolation(std::string("field \"") + key + "\" = " + std::to_string(n) + " outside [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return static_cast<int>(n);
}

bool optional_bool(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return false;
  if (!it->is_boolean()) throw SchemaViolation(std::string("field \"") + key + "\" must be true or false");
  return it->get<bool>();
}

bool yes_no(const json& j, const char* key) {
  const std::string v = lower(trim(string_field(j, key)));
  if (v == "yes") return true;
  if (v == "no") return false;
  throw SchemaViolation(std::string("field \"") + key + "\" must be \"yes\" or \"no\", got \"" + v + "\"");
}

// element_id may arrive as an integer, a digit string, "" or null.
std::optional<std::int64_t> element_id_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (it->is_number_integer()) {
    const auto id = it->get<std::int64_t>();
    if (id < 0) throw SchemaViolation("element_id must be non-negative");
    return id;
  }
  if (it->is_string()) {
    const std::string s = trim(it->get<std::string>());
    if (s.empty()) return std::nullopt;
    if (!std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }) || s.size() > 18) {
      throw SchemaViolation("element_id \"" + s + "\" is not an integer");
    }
    return std::stoll(s);
  }
  throw SchemaViolation("element_id must be an integer or empty");
}

ActionKind kind_field(const std::string& raw) {
  std::string name = lower(trim(raw));
  std::replace(name.begin(), name.end(), '-', '_');
  if (name == "goback") name = "go_back";
  if (name == "goforward") name = "go_forward";
  auto kind = action_kind_from_wire(name);
  if (!kind) throw SchemaViolation("unknown action type \"" + raw + "\"");
  return *kind;
}

}  // namespace

std::string_view to_string(RefineDecision d) {
  switch (d) {
    case RefineDecision::Keep: return "keep";
    case RefineDecision::Refine: return "refine";
    case RefineDecision::Drop: return "drop";
  }
  return "keep";
}

CategorizationReply parse_categorization(const json& j, const ReplyContext& ctx) {
  require_object(j, "Categorize");
  CategorizationReply out;
  out.analysis = optional_string(j, "Analysis");
  const json& cats = field(j, "Categorization");
  if (!cats.is_object()) throw SchemaViolation("\"Categorization\" must be an object");

  std::set<std::int64_t> seen;
  auto claim = [&](std::int64_t id, const std::string& category) {
    if (ctx.element_ids && !ctx.element_ids->contains(id)) {
      throw SchemaViolation("category \"" + category + "\" references unknown element " + std::to_string(id));
    }
    if (!seen.insert(id).second) {
      throw SchemaViolation("element " + std::to_string(id) + " appears in more than one category");
    }
  };

  for (auto it = cats.begin(); it != cats.end(); ++it) {
    const std::string& name = it.key();
    if (!it->is_array()) throw SchemaViolation("category \"" + name + "\" must be a list");
    if (lower(name) == lower(kUninteractiveCategory)) {
      for (const auto& id : *it) {
        if (!id.is_number_integer() || id.get<std::int64_t>() < 0) {
          throw SchemaViolation("uninteractive ids must be non-negative integers");
        }
        claim(id.get<std::int64_t>(), name);
        out.uninteractive.push_back(id.get<std::int64_t>());
      }
      continue;
    }
    std::vector<Action> actions;
    for (const auto& item : *it) {
      if (!item.is_object()) throw SchemaViolation("category \"" + name + "\" entries must be objects");
      Action a;
      a.kind = kind_field(string_field(item, "action"));
      if (!takes_element(a.kind)) {
        throw SchemaViolation("category actions must be CLICK, TYPE or HOVER, got " + std::string(to_wire(a.kind)));
      }
      a.element_id = element_id_field(item, "element_id");
      if (!a.element_id) throw SchemaViolation("category \"" + name + "\" action lacks element_id");
      a.value = a.kind == ActionKind::Type ? optional_string(item, "value") : std::string{};
      a.low_level_instruction = optional_string(item, "low-level_instruction");
      if (auto why = action_violation(a); !why.empty()) throw SchemaViolation("category \"" + name + "\": " + why);
      claim(*a.element_id, name);
      actions.push_back(std::move(a));
    }
    if (!actions.empty()) out.categories.emplace(name, std::move(actions));
  }
  return out;
}

TaskProposal parse_task_proposal(const json& j) {
  require_object(j, "ProposeTask");
  TaskProposal out;
  out.sub_instruction = optional_string(j, "Sub-Instruction");
  out.analysis = optional_string(j, "Analysis");
  out.high_level_instruction = trim(string_field(j, "High-Level-Instruction"));
  if (out.high_level_instruction.empty()) throw SchemaViolation("\"High-Level-Instruction\" is empty");
  if (auto it = j.find("Task-Type"); it != j.end() && it->is_string()) {
    std::string t = lower(trim(it->get<std::string>()));
    std::replace(t.begin(), t.end(), ' ', '_');
    std::replace(t.begin(), t.end(), '-', '_');
    try {
      out.task_type = task_type_from_string(t);
    } catch (const SchemaError&) {
      throw SchemaViolation("unknown \"Task-Type\" \"" + it->get<std::string>() + "\"");
    }
  }
  return out;
}

NextActionReply parse_next_action(const json& j) {
  require_object(j, "NextAction");
  NextActionReply out;
  out.state_summary = optional_string(j, "state_observation_summary");
  out.reasoning = optional_string(j, "reasoning");
  const json& next = field(j, "next_action");
  if (!next.is_object()) throw SchemaViolation("\"next_action\" must be an object");
  const json& act = field(next, "action");
  if (!act.is_object()) throw SchemaViolation("\"next_action.action\" must be an object");

  Action a;
  a.kind = kind_field(string_field(act, "type"));
  const auto id = element_id_field(act, "element_id");
  if (takes_element(a.kind)) a.element_id = id;
  if (takes_value(a.kind)) {
    auto it = act.find("value");
    if (it != act.end() && it->is_number()) {
      a.value = it->dump();
    } else {
      a.value = optional_string(act, "value");
    }
    if (a.kind == ActionKind::Scroll) a.value = lower(trim(a.value));
  }
  a.low_level_instruction = optional_string(next, "low-level_instruction");
  if (auto why = action_violation(a); !why.empty()) throw SchemaViolation("next_action: " + why);
  out.action = std::move(a);
  return out;
}

RefineTaskReply parse_refine_task(const json& j) {
  require_object(j, "RefineTask");
  RefineTaskReply out;
  out.analysis = optional_string(j, "Analysis");
  out.need_to_refine = yes_no(j, "Need-to-Refine");
  out.high_level_task = trim(optional_string(j, "High-Level-Task"));
  if (out.need_to_refine && out.high_level_task.empty()) {
    throw SchemaViolation("\"Need-to-Refine\" is yes but \"High-Level-Task\" is empty");
  }
  if (!out.need_to_refine && !out.high_level_task.empty()) {
    throw SchemaViolation("\"Need-to-Refine\" is no but \"High-Level-Task\" is not empty");
  }
  return out;
}

std::string refine_reply_violation(const RefineTrajectoryReply& r, std::size_t k) {
  std::vector<bool> used(k, false);
  for (int idx : r.order) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= k) {
      return "order index " + std::to_string(idx) + " out of range for K=" + std::to_string(k);
    }
    if (used[static_cast<std::size_t>(idx)]) return "order repeats index " + std::to_string(idx);
    used[static_cast<std::size_t>(idx)] = true;
  }
  switch (r.decision) {
    case RefineDecision::Keep: {
      bool identity = r.order.size() == k;
      for (std::size_t i = 0; identity && i < k; ++i) identity = r.order[i] == static_cast<int>(i);
      if (!identity) return "keep requires the identity order";
      if (r.final_none_value.empty()) return "keep requires a non-empty final_none_value";
      break;
    }
    case RefineDecision::Refine:
      if (r.final_none_value.empty()) return "refine requires a non-empty final_none_value";
      break;
    case RefineDecision::Drop:
      if (!r.order.empty()) return "drop requires an empty order";
      if (r.drop_reason.empty()) return "drop requires a drop_reason";
      break;
  }
  return {};
}

RefineTrajectoryReply parse_refine_trajectory(const json& j, std::size_t k) {
  require_object(j, "RefineTrajectory");
  RefineTrajectoryReply out;
  out.task = optional_string(j, "task");
  out.score = bounded_int(j, "score", 0, 100);
  const std::string decision = lower(trim(string_field(j, "decision")));
  if (decision == "keep") {
    out.decision = RefineDecision::Keep;
  } else if (decision == "refine") {
    out.decision = RefineDecision::Refine;
  } else if (decision == "drop") {
    out.decision = RefineDecision::Drop;
  } else {
    throw SchemaViolation("decision must be keep, refine or drop, got \"" + decision + "\"");
  }
  const json& order = field(j, "order");
  if (!order.is_array()) throw SchemaViolation("\"order\" must be a list of integers");
  for (const auto& v : order) {
    if (!v.is_number_integer()) throw SchemaViolation("\"order\" must be a list of integers");
    const auto n = v.get<std::int64_t>();
    if (n < 0 || n > static_cast<std::int64_t>(k) + 1'000'000) {
      throw SchemaViolation("order index " + std::to_string(n) + " out of range for K=" + std::to_string(k));
    }
    out.order.push_back(static_cast<int>(n));
  }
  out.modify_end = optional_bool(j, "modify_end");
  out.append_end = optional_bool(j, "append_end");
  out.final_none_value = trim(optional_string(j, "final_none_value"));
  out.drop_reason = trim(optional_string(j, "drop_reason"));
  out.modification_reason = optional_string(j, "modification_reason");
  if (auto why = refine_reply_violation(out, k); !why.empty()) throw SchemaViolation(why);
  return out;
}

DiversityReply parse_diversity(const json& j) {
  require_object(j, "JudgeDiversity");
  DiversityReply out;
  out.score = bounded_int(j, "score", 0, 100);
  const json& sub = field(j, "subscores");
  if (!sub.is_object()) throw SchemaViolation("\"subscores\" must be an object");
  out.intent_variety = bounded_int(sub, "intent_variety", 0, 25);
  out.action_diversity = bounded_int(sub, "action_diversity", 0, 25);
  out.goal_coverage = bounded_int(sub, "goal_coverage", 0, 25);
  out.redundancy_minimization = bounded_int(sub, "redundancy_minimization", 0, 25);
  const int sum = out.intent_variety + out.action_diversity + out.goal_coverage + out.redundancy_minimization;
  if (sum != out.score) {
    throw SchemaViolation("score " + std::to_string(out.score) + " differs from subscore sum " + std::to_string(sum));
  }
  out.analysis = optional_string(j, "analysis");
  if (auto it = j.find("representative_examples"); it != j.end() && it->is_array()) {
    for (const auto& e : *it) {
      if (e.is_string()) out.representative_examples.push_back(e.get<std::string>());
    }
  }
  return out;
}

QualityReply parse_quality(const json& j) {
  require_object(j, "JudgeQuality");
  QualityReply out;
  out.score = bounded_int(j, "score", 0, 100);
  out.analysis = optional_string(j, "analysis");
  return out;
}

ParsedReply parse_reply(TemplateName name, const json& j, const ReplyContext& ctx) {
  switch (name) {
    case TemplateName::Categorize: return parse_categorization(j, ctx);
    case TemplateName::ProposeTask: return parse_task_proposal(j);
    case TemplateName::NextAction: return parse_next_action(j);
    case TemplateName::RefineTask: return parse_refine_task(j);
    case TemplateName::RefineTrajectory:
      if (!ctx.trajectory_length) throw std::logic_error("RefineTrajectory needs the trajectory length");
      return parse_refine_trajectory(j, *ctx.trajectory_length);
    case TemplateName::JudgeDiversity: return parse_diversity(j);
    case TemplateName::JudgeQuality: return parse_quality(j);
  }
  throw std::logic_error("unknown template");
}

}  // namespace synthweaver
