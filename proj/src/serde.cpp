#include "synthweaver/serde.hpp"

#include "synthweaver/errors.hpp"

namespace synthweaver {

using nlohmann::json;

void to_json(json& j, const Element& e) {
  j = {{"id", e.id}, {"role", e.role}, {"name", e.name}, {"interactive", e.interactive}};
}

void from_json(const json& j, Element& e) {
  e.id = j.at("id").get<std::int64_t>();
  if (e.id < 0) throw SchemaError("element id must be non-negative");
  e.role = j.at("role").get<std::string>();
  e.name = j.at("name").get<std::string>();
  e.interactive = j.value("interactive", false);
}

void to_json(json& j, const Observation& o) {
  j = {{"url", o.url}, {"tree", o.accessibility_tree}, {"elements", o.elements}};
  if (o.screenshot_ref) j["screenshot_ref"] = *o.screenshot_ref;
}

void from_json(const json& j, Observation& o) {
  o.url = j.at("url").get<std::string>();
  o.accessibility_tree = j.at("tree").get<std::string>();
  o.elements = j.at("elements").get<std::vector<Element>>();
  o.screenshot_ref.reset();
  if (auto it = j.find("screenshot_ref"); it != j.end() && !it->is_null()) o.screenshot_ref = it->get<std::string>();
}

void to_json(json& j, const Action& a) {
  j = {{"action", render_action(a)}, {"instruction", a.low_level_instruction}};
}

void from_json(const json& j, Action& a) {
  a = parse_action(j.at("action").get<std::string>());
  a.low_level_instruction = j.value("instruction", std::string{});
}

void to_json(json& j, const Refinement& r) {
  j = {{"step_index", r.step_index}, {"prior_text", r.prior_text}, {"trigger", to_string(r.trigger)}};
}

void from_json(const json& j, Refinement& r) {
  r.step_index = j.at("step_index").get<int>();
  r.prior_text = j.at("prior_text").get<std::string>();
  r.trigger = conflict_trigger_from_string(j.at("trigger").get<std::string>());
}

void to_json(json& j, const Task& t) {
  j = {{"id", t.id},
       {"site", t.site},
       {"triplet_id", t.triplet_id},
       {"text", t.text},
       {"category", t.category},
       {"task_type", to_string(t.task_type)},
       {"lineage", t.lineage}};
}

void from_json(const json& j, Task& t) {
  t.id = j.at("id").get<std::string>();
  t.site = j.value("site", std::string{});
  t.triplet_id = j.value("triplet_id", std::string{});
  t.text = j.at("text").get<std::string>();
  t.category = j.value("category", std::string{});
  t.task_type = task_type_from_string(j.value("task_type", std::string{"information_seeking"}));
  t.lineage = j.value("lineage", std::vector<Refinement>{});
}

void to_json(json& j, const Step& s) {
  j = {{"index", s.index},
       {"observation", s.observation},
       {"action", s.action},
       {"task_snapshot", s.task_snapshot},
       {"reasoning", s.reasoning},
       {"state_summary", s.state_summary}};
  if (!s.outcome_error.empty()) j["outcome_error"] = s.outcome_error;
}

void from_json(const json& j, Step& s) {
  s.index = j.at("index").get<int>();
  s.observation = j.at("observation").get<Observation>();
  s.action = j.at("action").get<Action>();
  s.task_snapshot = j.at("task_snapshot").get<std::string>();
  s.reasoning = j.value("reasoning", std::string{});
  s.state_summary = j.value("state_summary", std::string{});
  s.outcome_error = j.value("outcome_error", std::string{});
}

void to_json(json& j, const Trajectory& t) {
  j = {{"schema_version", kRecordSchemaVersion},
       {"id", t.id},
       {"site", t.site},
       {"task", t.task},
       {"steps", t.steps},
       {"terminal", to_string(t.terminal)},
       {"step_budget", t.step_budget},
       {"refine_count", t.refine_count},
       {"cost_usd", t.cost.to_string()}};
}

void from_json(const json& j, Trajectory& t) {
  t.id = j.at("id").get<std::string>();
  t.site = j.value("site", std::string{});
  t.task = j.at("task").get<Task>();
  t.steps = j.at("steps").get<std::vector<Step>>();
  t.terminal = terminal_from_string(j.at("terminal").get<std::string>());
  t.step_budget = j.value("step_budget", 30);
  t.refine_count = j.value("refine_count", 0);
  t.cost = Money::parse(j.value("cost_usd", std::string{"0"}));
}

void to_json(json& j, const InteractionTriplet& t) {
  j = {{"schema_version", kRecordSchemaVersion},
       {"id", t.id},
       {"site", t.site},
       {"category", t.category},
       {"depth", t.depth},
       {"before", t.before},
       {"action", t.action},
       {"after", t.after}};
}

void from_json(const json& j, InteractionTriplet& t) {
  t.id = j.at("id").get<std::string>();
  t.site = j.value("site", std::string{});
  t.category = j.value("category", std::string{});
  t.depth = j.value("depth", 0);
  t.before = j.at("before").get<Observation>();
  t.action = j.at("action").get<Action>();
  t.after = j.at("after").get<Observation>();
}

template <typename T>
T record_from_json(const json& j, const char* kind) {
  try {
    return j.get<T>();
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(std::string("bad ") + kind + " record: " + e.what());
  }
}

template Task record_from_json<Task>(const json&, const char*);
template Trajectory record_from_json<Trajectory>(const json&, const char*);
template InteractionTriplet record_from_json<InteractionTriplet>(const json&, const char*);
template Observation record_from_json<Observation>(const json&, const char*);
template Action record_from_json<Action>(const json&, const char*);

}  // namespace synthweaver
