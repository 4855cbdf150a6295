#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace synthweaver {

enum class ActionKind { Click, Type, Hover, Press, Scroll, Goto, GoBack, GoForward, None, Stop };

inline constexpr std::array<ActionKind, 10> kAllActionKinds = {
    ActionKind::Click, ActionKind::Type,   ActionKind::Hover,  ActionKind::Press,
    ActionKind::Scroll, ActionKind::Goto,  ActionKind::GoBack, ActionKind::GoForward,
    ActionKind::None,  ActionKind::Stop};

// Lowercase wire name: click, type, hover, press, scroll, goto, go_back,
// go_forward, none, stop.
std::string_view to_wire(ActionKind kind);
std::optional<ActionKind> action_kind_from_wire(std::string_view name);

bool takes_element(ActionKind kind);
bool takes_value(ActionKind kind);

// One atomic browser interaction.
//
// The wire string carries kind, element id and value only;
// low_level_instruction travels alongside it in records.
struct Action {
  ActionKind kind = ActionKind::None;
  std::optional<std::int64_t> element_id;
  std::string value;
  std::string low_level_instruction;

  static Action click(std::int64_t id) { return {ActionKind::Click, id, {}, {}}; }
  static Action type(std::int64_t id, std::string text) {
    return {ActionKind::Type, id, std::move(text), {}};
  }
  static Action hover(std::int64_t id) { return {ActionKind::Hover, id, {}, {}}; }
  static Action press(std::string keys) { return {ActionKind::Press, {}, std::move(keys), {}}; }
  static Action scroll(std::string dir) { return {ActionKind::Scroll, {}, std::move(dir), {}}; }
  static Action go_to(std::string url) { return {ActionKind::Goto, {}, std::move(url), {}}; }
  static Action go_back() { return {ActionKind::GoBack, {}, {}, {}}; }
  static Action go_forward() { return {ActionKind::GoForward, {}, {}, {}}; }
  static Action none(std::string answer) { return {ActionKind::None, {}, std::move(answer), {}}; }
  static Action stop(std::string reason) { return {ActionKind::Stop, {}, std::move(reason), {}}; }

  bool is_terminal() const { return kind == ActionKind::None || kind == ActionKind::Stop; }

  friend bool operator==(const Action&, const Action&) = default;
};

// Equality over the fields the wire string carries.
bool same_wire(const Action& a, const Action& b);

// Empty string when the action satisfies every invariant, else the reason.
std::string action_violation(const Action& a);
void validate_action(const Action& a);  // throws InvalidAction

// Parses `click [12]`, `type [3] [hello]`, `scroll [down]`, `go_back`, ...
// Throws MalformedAction.
Action parse_action(std::string_view text);

// Canonical wire string. Throws InvalidAction.
std::string render_action(const Action& a);

}  // namespace synthweaver
