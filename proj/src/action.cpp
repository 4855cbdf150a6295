#include "synthweaver/action.hpp"

#include <charconv>
#include <vector>

#include "synthweaver/errors.hpp"

namespace synthweaver {

namespace {

constexpr std::array<std::string_view, 10> kWireNames = {
    "click", "type", "hover", "press", "scroll", "goto", "go_back", "go_forward", "none", "stop"};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string_view to_wire(ActionKind kind) { return kWireNames[static_cast<std::size_t>(kind)]; }

std::optional<ActionKind> action_kind_from_wire(std::string_view name) {
  for (std::size_t i = 0; i < kWireNames.size(); ++i) {
    if (kWireNames[i] == name) return static_cast<ActionKind>(i);
  }
  return std::nullopt;
}

bool takes_element(ActionKind kind) {
  return kind == ActionKind::Click || kind == ActionKind::Type || kind == ActionKind::Hover;
}

bool takes_value(ActionKind kind) {
  switch (kind) {
    case ActionKind::Type:
    case ActionKind::Press:
    case ActionKind::Scroll:
    case ActionKind::Goto:
    case ActionKind::None:
    case ActionKind::Stop:
      return true;
    default:
      return false;
  }
}

bool same_wire(const Action& a, const Action& b) {
  return a.kind == b.kind && a.element_id == b.element_id && a.value == b.value;
}

std::string action_violation(const Action& a) {
  const auto name = std::string(to_wire(a.kind));
  if (takes_element(a.kind)) {
    if (!a.element_id) return name + " requires an element id";
    if (*a.element_id < 0) return name + " element id must be non-negative";
  } else if (a.element_id) {
    return name + " takes no element id";
  }
  if (takes_value(a.kind)) {
    if (a.value.empty()) return name + " requires a non-empty value";
    if (a.value.find(']') != std::string::npos) return name + " value may not contain ']'";
    if (a.kind == ActionKind::Scroll && a.value != "up" && a.value != "down")
      return "scroll value must be 'up' or 'down'";
  } else if (!a.value.empty()) {
    return name + " takes no value";
  }
  return {};
}

void validate_action(const Action& a) {
  if (auto why = action_violation(a); !why.empty()) throw InvalidAction(why);
}

Action parse_action(std::string_view text) {
  const std::string original(text);
  auto fail = [&](const std::string& why) -> MalformedAction {
    return MalformedAction(why + " in '" + original + "'");
  };

  std::string_view rest = trim(text);
  std::size_t name_end = 0;
  while (name_end < rest.size() && !is_space(rest[name_end]) && rest[name_end] != '[') ++name_end;
  const std::string_view name = rest.substr(0, name_end);
  const auto kind = action_kind_from_wire(name);
  if (!kind) throw fail("unknown action kind '" + std::string(name) + "'");
  rest.remove_prefix(name_end);

  std::vector<std::string_view> args;
  while (true) {
    rest = trim(rest);
    if (rest.empty()) break;
    if (rest.front() != '[') throw fail("expected '['");
    const auto close = rest.find(']');
    if (close == std::string_view::npos) throw fail("missing ']'");
    args.push_back(rest.substr(1, close - 1));
    rest.remove_prefix(close + 1);
  }

  const std::size_t expected = (takes_element(*kind) ? 1 : 0) + (takes_value(*kind) ? 1 : 0);
  if (args.size() != expected) {
    throw fail("expected " + std::to_string(expected) + " bracketed argument(s), got " +
               std::to_string(args.size()));
  }

  Action a;
  a.kind = *kind;
  std::size_t next = 0;
  if (takes_element(*kind)) {
    const std::string_view digits = args[next++];
    std::int64_t id = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), id);
    if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size() ||
        digits.front() == '-' || digits.front() == '+') {
      throw fail("element id '" + std::string(digits) + "' is not a non-negative integer");
    }
    a.element_id = id;
  }
  if (takes_value(*kind)) a.value = std::string(args[next++]);

  if (auto why = action_violation(a); !why.empty()) throw fail(why);
  return a;
}

std::string render_action(const Action& a) {
  validate_action(a);
  std::string out(to_wire(a.kind));
  if (a.element_id) out += " [" + std::to_string(*a.element_id) + "]";
  if (takes_value(a.kind)) out += " [" + a.value + "]";
  return out;
}

}  // namespace synthweaver
