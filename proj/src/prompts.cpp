#include "synthweaver/prompts.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "synthweaver/errors.hpp"
#include "synthweaver/hashing.hpp"

namespace synthweaver {

namespace {

struct TemplateInfo {
  TemplateName name;
  std::string_view display;
  std::string_view file_stem;
};

constexpr std::array<TemplateInfo, 7> kTemplates = {{
    {TemplateName::Categorize, "Categorize", "categorize"},
    {TemplateName::ProposeTask, "ProposeTask", "propose_task"},
    {TemplateName::NextAction, "NextAction", "next_action"},
    {TemplateName::RefineTask, "RefineTask", "refine_task"},
    {TemplateName::RefineTrajectory, "RefineTrajectory", "refine_trajectory"},
    {TemplateName::JudgeDiversity, "JudgeDiversity", "judge_diversity"},
    {TemplateName::JudgeQuality, "JudgeQuality", "judge_quality"},
}};

bool is_placeholder_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

// Calls on_text for literal runs and on_placeholder for each `{name}`.
template <typename Text, typename Placeholder>
void scan(std::string_view body, Text on_text, Placeholder on_placeholder) {
  std::size_t literal_start = 0;
  std::size_t i = 0;
  while (i < body.size()) {
    if (body[i] == '{') {
      std::size_t j = i + 1;
      while (j < body.size() && is_placeholder_char(body[j])) ++j;
      if (j > i + 1 && j < body.size() && body[j] == '}') {
        on_text(body.substr(literal_start, i - literal_start));
        on_placeholder(body.substr(i + 1, j - i - 1));
        i = j + 1;
        literal_start = i;
        continue;
      }
    }
    ++i;
  }
  on_text(body.substr(literal_start));
}

}  // namespace

std::string_view to_string(TemplateName name) {
  for (const auto& t : kTemplates) {
    if (t.name == name) return t.display;
  }
  return "Unknown";
}

std::optional<TemplateName> template_from_string(std::string_view name) {
  for (const auto& t : kTemplates) {
    if (t.display == name || t.file_stem == name) return t.name;
  }
  return std::nullopt;
}

std::vector<std::string> PromptTemplate::placeholders() const {
  std::set<std::string> names;
  scan(body, [](std::string_view) {}, [&](std::string_view p) { names.emplace(p); });
  return {names.begin(), names.end()};
}

const PromptTemplate& PromptTemplate::get(TemplateName name) {
  static const std::vector<PromptTemplate> loaded = [] {
    std::vector<PromptTemplate> out;
    for (const auto& t : kTemplates) {
      const auto& embedded = detail::embedded_prompts();
      auto it = std::find_if(embedded.begin(), embedded.end(), [&](const auto& p) { return p.first == t.file_stem; });
      if (it == embedded.end()) throw std::logic_error("prompt file missing: " + std::string(t.file_stem));
      out.push_back({t.name, it->second});
    }
    return out;
  }();
  return loaded.at(static_cast<std::size_t>(name));
}

std::string RenderedPrompt::fingerprint() const {
  Sha256 h;
  h.update(to_string(name));
  h.update("\n");
  h.update(text);
  return h.hex_digest();
}

RenderedPrompt render(const PromptTemplate& tmpl, const PromptVars& vars, std::vector<std::string> images) {
  std::vector<std::string> missing;
  for (const auto& p : tmpl.placeholders()) {
    if (!vars.contains(p)) missing.push_back(p);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw MissingPlaceholder(std::string(to_string(tmpl.name)) + " needs {" + list + "}");
  }

  RenderedPrompt out;
  out.name = tmpl.name;
  out.images = std::move(images);
  out.vars = vars;
  out.text.reserve(tmpl.body.size() * 2);
  scan(
      tmpl.body, [&](std::string_view literal) { out.text.append(literal); },
      [&](std::string_view p) { out.text += vars.at(std::string(p)); });
  return out;
}

RenderedPrompt render(TemplateName name, const PromptVars& vars, std::vector<std::string> images) {
  return render(PromptTemplate::get(name), vars, std::move(images));
}

}  // namespace synthweaver
