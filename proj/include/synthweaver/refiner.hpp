#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "synthweaver/model.hpp"
#include "synthweaver/oracle.hpp"
#include "synthweaver/replies.hpp"

namespace synthweaver {

// "Length of trajectory: K", the task, then each step's state summary and
// rendered action, indexed 0..K-1.
std::string summarize_trajectory(const Trajectory& t);

// One RefineTrajectory call. SchemaViolation propagates once the oracle's
// reparse attempts are spent.
RefineTrajectoryReply decide(Oracle& oracle, const Trajectory& t);

// Applies a validated reply. keep returns t itself, drop returns nullopt,
// refine rebuilds the step list from `order`. Throws EditContractViolation
// when the result would not end in none with a value, would hold a terminal
// action before its last step, when both modify_end and append_end are set,
// or when the reply does not fit t.
std::optional<Trajectory> apply_edits(const Trajectory& t, const RefineTrajectoryReply& reply);

struct DropRecord {
  std::string trajectory_id;
  std::string site;
  std::string task_id;
  std::string reason;

  friend bool operator==(const DropRecord&, const DropRecord&) = default;
};

void to_json(nlohmann::json& j, const DropRecord& d);
void from_json(const nlohmann::json& j, DropRecord& d);

struct RefineOutcome {
  std::optional<Trajectory> refined;
  std::optional<DropRecord> drop;  // exactly one of refined/drop is set
  std::optional<RefineTrajectoryReply> reply;
};

// decide + apply_edits, turning every failure except BudgetExhausted into a
// drop with its reason.
RefineOutcome refine(Oracle& oracle, const Trajectory& t);

}  // namespace synthweaver
