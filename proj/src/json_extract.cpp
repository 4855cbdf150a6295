#include "synthweaver/json_extract.hpp"

#include <string>

#include "synthweaver/errors.hpp"

namespace synthweaver {

namespace {

// End index (exclusive) of the balanced object starting at `open`, or npos.
// Tracks string literals so braces inside strings do not count.
std::size_t balanced_end(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

std::string strip_fences(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    auto eol = raw.find('\n', pos);
    if (eol == std::string_view::npos) eol = raw.size();
    std::string_view line = raw.substr(pos, eol - pos);
    std::string_view trimmed = line;
    while (!trimmed.empty() && (trimmed.front() == ' ' || trimmed.front() == '\t')) trimmed.remove_prefix(1);
    if (trimmed.rfind("```", 0) != 0) {
      out.append(line);
      out.push_back('\n');
    }
    pos = eol + 1;
  }
  return out;
}

}  // namespace

nlohmann::json extract_json(std::string_view raw) {
  const std::string text = strip_fences(raw);
  std::size_t from = 0;
  while (true) {
    const auto open = text.find('{', from);
    if (open == std::string::npos) break;
    const auto end = balanced_end(text, open);
    if (end == std::string_view::npos) break;
    try {
      auto j = nlohmann::json::parse(text.begin() + static_cast<std::ptrdiff_t>(open),
                                     text.begin() + static_cast<std::ptrdiff_t>(end), nullptr,
                                     /*allow_exceptions=*/true, /*ignore_comments=*/true);
      if (j.is_object()) return j;
    } catch (const nlohmann::json::parse_error&) {
    }
    from = open + 1;
  }
  std::string preview(raw.substr(0, 80));
  throw NoJsonFound("no parseable JSON object in reply starting '" + preview + "'");
}

}  // namespace synthweaver
