#pragma once

// JSON mapping for the record types persisted in a run directory. Actions are
// always written through render_action and read through parse_action.
// Malformed records raise SchemaError.

#include <nlohmann/json.hpp>

#include "synthweaver/model.hpp"

namespace synthweaver {

inline constexpr int kRecordSchemaVersion = 1;

void to_json(nlohmann::json& j, const Element& e);
void from_json(const nlohmann::json& j, Element& e);

void to_json(nlohmann::json& j, const Observation& o);
void from_json(const nlohmann::json& j, Observation& o);

void to_json(nlohmann::json& j, const Action& a);
void from_json(const nlohmann::json& j, Action& a);

void to_json(nlohmann::json& j, const Refinement& r);
void from_json(const nlohmann::json& j, Refinement& r);

void to_json(nlohmann::json& j, const Task& t);
void from_json(const nlohmann::json& j, Task& t);

void to_json(nlohmann::json& j, const Step& s);
void from_json(const nlohmann::json& j, Step& s);

void to_json(nlohmann::json& j, const Trajectory& t);
void from_json(const nlohmann::json& j, Trajectory& t);

void to_json(nlohmann::json& j, const InteractionTriplet& t);
void from_json(const nlohmann::json& j, InteractionTriplet& t);

// Parses `j` as T, converting any JSON access error into SchemaError with the
// record kind in the message.
template <typename T>
T record_from_json(const nlohmann::json& j, const char* kind);

}  // namespace synthweaver
