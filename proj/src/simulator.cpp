#include "synthweaver/simulator.hpp"

#include <regex>

#include "synthweaver/errors.hpp"

namespace synthweaver {

namespace {

const std::string kInputToken = "$input";

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

}  // namespace

SimulatedSite::SimulatedSite(std::shared_ptr<const SiteGraph> graph) : graph_(std::move(graph)) {
  if (!graph_) throw InvalidGraph("null graph");
  validate_site_graph(*graph_);
  reset();
}

void SimulatedSite::reset() {
  session_ = EnvSession{};
  session_.current_page = graph_->start_page;
  session_.history_stack.push_back(graph_->start_page);
}

const PageSpec& SimulatedSite::page() const { return graph_->pages.at(session_.current_page); }

std::string SimulatedSite::substitute(const std::string& text) const {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text.compare(i, 2, "${") == 0) {
      const auto close = text.find('}', i + 2);
      if (close != std::string::npos) {
        const std::string key = text.substr(i + 2, close - i - 2);
        if (auto it = session_.state.find(key); it != session_.state.end()) out += it->second;
        i = close + 1;
        continue;
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

Observation SimulatedSite::observe() {
  const PageSpec& p = page();
  Observation obs;
  obs.url = p.url;
  obs.accessibility_tree = substitute(p.tree_template);
  for (const auto& e : p.elements) obs.elements.push_back({e.id, e.role, substitute(e.name), e.interactive});
  if (session_.scrolled && p.below_fold) {
    if (!obs.accessibility_tree.empty() && obs.accessibility_tree.back() != '\n') obs.accessibility_tree += '\n';
    obs.accessibility_tree += substitute(p.below_fold->tree);
    for (const auto& e : p.below_fold->elements) obs.elements.push_back({e.id, e.role, substitute(e.name), e.interactive});
  }
  return obs;
}

void SimulatedSite::navigate(const std::string& page_id) {
  session_.history_stack.push_back(page_id);
  session_.forward_stack.clear();
  session_.current_page = page_id;
  session_.scrolled = false;
}

TransitionOutcome SimulatedSite::execute(const Action& action) {
  if (session_.terminal) throw SessionTerminal("session already ended with none/stop");
  validate_action(action);

  const Observation before = observe();
  if (action.element_id && !before.contains(*action.element_id)) {
    throw ElementNotFound("element " + std::to_string(*action.element_id) + " is not on " + before.url);
  }
  ++session_.step_counter;

  std::optional<std::string> error;
  bool navigated = false;

  switch (action.kind) {
    case ActionKind::Click:
    case ActionKind::Type:
    case ActionKind::Hover:
    case ActionKind::Press: {
      const PageSpec& p = page();
      for (const Transition& t : p.transitions) {
        if (t.kind != action.kind || t.element_id != action.element_id) continue;
        if (!t.value_pattern.empty() && !std::regex_match(action.value, std::regex(t.value_pattern))) continue;
        bool state_ok = true;
        for (const auto& [k, v] : t.when) {
          auto it = session_.state.find(k);
          const std::string current = it == session_.state.end() ? std::string{} : it->second;
          if (current != v) {
            state_ok = false;
            break;
          }
        }
        if (!state_ok) continue;
        for (const auto& [k, v] : t.effect.set) session_.state[k] = replace_all(v, kInputToken, action.value);
        if (t.effect.error) error = t.effect.error;
        if (t.effect.goto_page) {
          navigate(*t.effect.goto_page);
          navigated = true;
        }
        break;
      }
      break;
    }
    case ActionKind::Scroll: {
      if (page().below_fold) session_.scrolled = action.value == "down";
      break;
    }
    case ActionKind::Goto: {
      if (const PageSpec* target = graph_->page_by_url(action.value)) {
        navigate(target->id);
        navigated = true;
      } else {
        error = "NavigationError: unknown url " + action.value;
      }
      break;
    }
    case ActionKind::GoBack: {
      if (session_.history_stack.size() > 1) {
        session_.forward_stack.push_back(session_.history_stack.back());
        session_.history_stack.pop_back();
        session_.current_page = session_.history_stack.back();
        session_.scrolled = false;
        navigated = true;
      }
      break;
    }
    case ActionKind::GoForward: {
      if (!session_.forward_stack.empty()) {
        session_.history_stack.push_back(session_.forward_stack.back());
        session_.forward_stack.pop_back();
        session_.current_page = session_.history_stack.back();
        session_.scrolled = false;
        navigated = true;
      }
      break;
    }
    case ActionKind::None:
    case ActionKind::Stop:
      session_.terminal = true;
      break;
  }

  if (navigated && !error && page().error) error = page().error;

  TransitionOutcome outcome;
  outcome.changed = canonical_observation(observe()) != canonical_observation(before);
  outcome.error = std::move(error);
  return outcome;
}

}  // namespace synthweaver
