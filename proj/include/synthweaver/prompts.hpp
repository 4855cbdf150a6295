#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace synthweaver {

enum class TemplateName {
  Categorize,
  ProposeTask,
  NextAction,
  RefineTask,
  RefineTrajectory,
  JudgeDiversity,
  JudgeQuality,  // repo-authored, not one of the published prompts
};

std::string_view to_string(TemplateName name);
std::optional<TemplateName> template_from_string(std::string_view name);

using PromptVars = std::map<std::string, std::string>;

// A prompt body with `{name}` placeholders (lowercase letters and
// underscores). Any other brace text in the body is literal.
struct PromptTemplate {
  TemplateName name;
  std::string body;

  std::vector<std::string> placeholders() const;  // sorted, unique

  // Bodies ship as prompts/<stem>.txt and are compiled into the library.
  static const PromptTemplate& get(TemplateName name);
};

struct RenderedPrompt {
  TemplateName name = TemplateName::NextAction;
  std::string text;
  std::vector<std::string> images;  // screenshot handles, possibly empty
  PromptVars vars;                  // everything the caller bound, for mock matching

  // sha256 over template name and rendered text.
  std::string fingerprint() const;
};

// Substitutes every placeholder in one pass; extra variables are allowed.
// Byte-stable for identical inputs. Throws MissingPlaceholder.
RenderedPrompt render(const PromptTemplate& tmpl, const PromptVars& vars, std::vector<std::string> images = {});
RenderedPrompt render(TemplateName name, const PromptVars& vars, std::vector<std::string> images = {});

namespace detail {
const std::vector<std::pair<std::string, std::string>>& embedded_prompts();
}

}  // namespace synthweaver
