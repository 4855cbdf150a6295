#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "synthweaver/action.hpp"
#include "synthweaver/money.hpp"

namespace synthweaver {

struct Element {
  std::int64_t id = 0;
  std::string role;
  std::string name;
  bool interactive = false;

  friend bool operator==(const Element&, const Element&) = default;
};

// One environment snapshot. screenshot_ref is an opaque handle (file path or
// content hash), never image bytes.
struct Observation {
  std::string url;
  std::string accessibility_tree;
  std::vector<Element> elements;
  std::optional<std::string> screenshot_ref;

  const Element* find(std::int64_t id) const;
  bool contains(std::int64_t id) const { return find(id) != nullptr; }

  friend bool operator==(const Observation&, const Observation&) = default;
};

// Canonical serialization used for no-op detection and content addressing.
// The screenshot handle is excluded: two views with the same tree are the
// same state.
std::string canonical_observation(const Observation& obs);

// sha256 of canonical_observation plus the screenshot handle.
std::string observation_ref(const Observation& obs);

enum class TaskType { InformationSeeking, SiteNavigation, ContentModification };
std::string_view to_string(TaskType t);
TaskType task_type_from_string(std::string_view s);  // throws SchemaError

enum class ConflictTrigger { ExistsUI, MissingArgs, Stall };
std::string_view to_string(ConflictTrigger t);
ConflictTrigger conflict_trigger_from_string(std::string_view s);

struct Refinement {
  int step_index = 0;
  std::string prior_text;
  ConflictTrigger trigger = ConflictTrigger::ExistsUI;

  friend bool operator==(const Refinement&, const Refinement&) = default;
};

struct Task {
  std::string id;
  std::string site;
  std::string triplet_id;
  std::string text;
  std::string category;
  TaskType task_type = TaskType::InformationSeeking;
  std::vector<Refinement> lineage;  // append-only, ordered by step_index

  // Text as originally proposed, before any refinement.
  const std::string& original_text() const;
  void refine(int step_index, std::string new_text, ConflictTrigger trigger);

  friend bool operator==(const Task&, const Task&) = default;
};

struct Step {
  int index = 0;
  Observation observation;
  Action action;
  std::string task_snapshot;
  std::string reasoning;
  std::string state_summary;
  std::string outcome_error;  // execution diagnostic, empty when clean

  friend bool operator==(const Step&, const Step&) = default;
};

enum class TerminalClass { CompletedNone, StoppedByAgent, BudgetExceeded };
std::string_view to_string(TerminalClass t);
TerminalClass terminal_from_string(std::string_view s);

// Pure classification of a step sequence. Throws InvalidTrajectory when the
// sequence fits none of the three classes (empty, or cut short without a
// terminal action).
TerminalClass classify_terminal(const std::vector<Step>& steps, int step_budget);

struct Trajectory {
  std::string id;
  std::string site;
  Task task;
  std::vector<Step> steps;
  TerminalClass terminal = TerminalClass::CompletedNone;
  int step_budget = 30;
  int refine_count = 0;
  Money cost;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

// Empty string when every Trajectory invariant holds, else the first breach.
std::string trajectory_violation(const Trajectory& t);

struct InteractionTriplet {
  std::string id;
  std::string site;
  std::string category;
  int depth = 0;
  Observation before;
  Action action;
  Observation after;

  friend bool operator==(const InteractionTriplet&, const InteractionTriplet&) = default;
};

struct HistoryEntry {
  Observation observation;
  Action action;

  friend bool operator==(const HistoryEntry&, const HistoryEntry&) = default;
};

struct ExampleMeta {
  std::string site;
  std::string trajectory_id;
  int step_index = 0;

  friend bool operator==(const ExampleMeta&, const ExampleMeta&) = default;
};

struct TrainingExample {
  std::string task_text;
  std::vector<HistoryEntry> history;  // most recent last
  Observation current_observation;
  Action target_action;
  ExampleMeta meta;

  friend bool operator==(const TrainingExample&, const TrainingExample&) = default;
};

// Collapse runs of whitespace and trim; used for task de-duplication.
std::string normalize_whitespace(std::string_view s);

}  // namespace synthweaver
