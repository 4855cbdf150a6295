#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthweaver/oracle.hpp"

namespace synthweaver {

// Scripted replies for tests and offline runs.
//
// A script is {"rules": [...]}; each rule names a template and optionally
// a `when` map of variable name to regex (searched in the variable's value;
// the key "$prompt" searches the rendered text), and/or an exact prompt
// fingerprint. The first matching rule answers. A rule carries either
// `reply` (a JSON value, serialized as the reply text) or `raw` (reply text
// verbatim), plus optional `usage`.
//
// Inside `reply`, a string that is exactly "${name}" becomes the variable's
// value parsed as JSON when it parses, else the plain string; `${name}`
// embedded in a longer string is substituted textually. The reply is a pure
// function of the prompt, so any number of workers see identical answers.
class MockBackend final : public ChatBackend {
 public:
  struct Rule {
    std::optional<TemplateName> name;  // unset matches any template
    std::vector<std::pair<std::string, std::regex>> when;
    std::vector<std::pair<std::string, std::string>> when_source;
    std::string fingerprint;
    std::optional<nlohmann::json> reply;
    std::string raw;
    std::optional<TokenUsage> usage;
  };

  explicit MockBackend(const nlohmann::json& script);  // throws SchemaError
  static MockBackend from_file(const std::filesystem::path& path);

  ChatResponse complete(const RenderedPrompt& prompt) override;

  const std::vector<Rule>& rules() const { return rules_; }

 private:
  std::vector<Rule> rules_;
};

// Usage charged when a rule declares none: roughly four bytes per token.
TokenUsage estimate_usage(const std::string& prompt, const std::string& reply);

struct HttpBackendSettings {
  std::string endpoint;         // base URL, e.g. https://api.example.com/v1
  std::string model;
  std::string api_key;          // read from the environment by the caller
  double temperature = 0.0;
  int timeout_seconds = 120;
};

// OpenAI-compatible POST {endpoint}/chat/completions. Screenshot handles are
// read from disk and attached as base64 data URLs.
class HttpChatBackend final : public ChatBackend {
 public:
  explicit HttpChatBackend(HttpBackendSettings settings);
  ChatResponse complete(const RenderedPrompt& prompt) override;

  nlohmann::json request_body(const RenderedPrompt& prompt) const;

 private:
  HttpBackendSettings settings_;
  std::string origin_;  // scheme://host[:port]
  std::string path_prefix_;
};

}  // namespace synthweaver
