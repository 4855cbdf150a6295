#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthweaver/action.hpp"
#include "synthweaver/model.hpp"
#include "synthweaver/prompts.hpp"

namespace synthweaver {

inline constexpr const char* kUninteractiveCategory = "Uninteractive";

// Typed replies for every template. Each parse_* function enforces the
// template's JSON schema and throws SchemaViolation on any breach.

struct CategorizationReply {
  std::string analysis;
  std::map<std::string, std::vector<Action>> categories;  // click/type/hover only
  std::vector<std::int64_t> uninteractive;
};

struct TaskProposal {
  std::string sub_instruction;
  std::string analysis;
  std::string high_level_instruction;
  std::optional<TaskType> task_type;  // only when the reply states one
};

struct NextActionReply {
  std::string state_summary;
  std::string reasoning;
  Action action;  // low_level_instruction filled in
};

struct RefineTaskReply {
  std::string analysis;
  bool need_to_refine = false;
  std::string high_level_task;
};

enum class RefineDecision { Keep, Refine, Drop };
std::string_view to_string(RefineDecision d);

struct RefineTrajectoryReply {
  std::string task;
  int score = 0;
  RefineDecision decision = RefineDecision::Keep;
  std::vector<int> order;
  bool modify_end = false;
  bool append_end = false;
  std::string final_none_value;
  std::string drop_reason;
  std::string modification_reason;
};

struct DiversityReply {
  int score = 0;
  int intent_variety = 0;
  int action_diversity = 0;
  int goal_coverage = 0;
  int redundancy_minimization = 0;
  std::string analysis;
  std::vector<std::string> representative_examples;
};

struct QualityReply {
  int score = 0;
  std::string analysis;
};

using ParsedReply = std::variant<CategorizationReply, TaskProposal, NextActionReply, RefineTaskReply,
                                 RefineTrajectoryReply, DiversityReply, QualityReply>;

// Facts a reply is validated against beyond its own shape.
struct ReplyContext {
  std::optional<std::set<std::int64_t>> element_ids;  // Categorize: ids on the page
  std::optional<std::size_t> trajectory_length;       // RefineTrajectory: K
};

CategorizationReply parse_categorization(const nlohmann::json& j, const ReplyContext& ctx = {});
TaskProposal parse_task_proposal(const nlohmann::json& j);
NextActionReply parse_next_action(const nlohmann::json& j);
RefineTaskReply parse_refine_task(const nlohmann::json& j);
RefineTrajectoryReply parse_refine_trajectory(const nlohmann::json& j, std::size_t k);
DiversityReply parse_diversity(const nlohmann::json& j);
QualityReply parse_quality(const nlohmann::json& j);

ParsedReply parse_reply(TemplateName name, const nlohmann::json& j, const ReplyContext& ctx);

// Empty when `reply` satisfies the RefineTrajectoryReply invariants for a
// trajectory of k steps, else the first breach.
std::string refine_reply_violation(const RefineTrajectoryReply& reply, std::size_t k);

}  // namespace synthweaver
