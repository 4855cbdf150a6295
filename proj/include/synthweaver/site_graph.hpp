#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthweaver/action.hpp"
#include "synthweaver/model.hpp"

namespace synthweaver {

inline constexpr int kSiteGraphSchemaVersion = 1;

struct TransitionEffect {
  std::optional<std::string> goto_page;
  std::map<std::string, std::string> set;  // `$input` in a value becomes the action value
  std::optional<std::string> error;        // error text surfaced without navigating
};

// Matches when kind and element agree, the action value fully matches
// value_pattern (ECMAScript regex, empty matches anything) and every `when`
// state key holds the given value. First match in declaration order wins.
struct Transition {
  std::optional<std::int64_t> element_id;
  ActionKind kind = ActionKind::Click;
  std::string value_pattern;
  std::map<std::string, std::string> when;
  TransitionEffect effect;
};

struct BelowFold {
  std::string tree;
  std::vector<Element> elements;
};

struct PageSpec {
  std::string id;
  std::string url;
  std::string tree_template;  // `${key}` substitutes session state, missing keys become ""
  std::vector<Element> elements;
  std::vector<Transition> transitions;
  std::optional<BelowFold> below_fold;
  std::optional<std::string> error;  // reported when navigation lands here

  bool has_element(std::int64_t id) const;
};

struct SiteGraph {
  int schema_version = kSiteGraphSchemaVersion;
  std::string name;
  std::string start_page;
  std::map<std::string, PageSpec> pages;

  const PageSpec* page_by_url(const std::string& url) const;
};

// Throws InvalidGraph on the first structural breach.
void validate_site_graph(const SiteGraph& graph);

// Throws SchemaError naming the JSON path (and line, for syntax errors).
SiteGraph parse_site_graph(const nlohmann::json& doc, const std::string& source = "<memory>");
SiteGraph load_site_graph(const std::filesystem::path& path);

}  // namespace synthweaver
