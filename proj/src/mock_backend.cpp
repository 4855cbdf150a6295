#include <fstream>

#include "synthweaver/backends.hpp"
#include "synthweaver/errors.hpp"

namespace synthweaver {

using nlohmann::json;

namespace {

std::string var_or_empty(const RenderedPrompt& p, const std::string& key) {
  if (key == "$prompt") return p.text;
  auto it = p.vars.find(key);
  return it == p.vars.end() ? std::string{} : it->second;
}

std::string substitute_text(const std::string& s, const RenderedPrompt& p) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s.compare(i, 2, "${") == 0) {
      const auto close = s.find('}', i + 2);
      if (close != std::string::npos) {
        out += var_or_empty(p, s.substr(i + 2, close - i - 2));
        i = close + 1;
        continue;
      }
    }
    out.push_back(s[i++]);
  }
  return out;
}

json substitute(const json& node, const RenderedPrompt& p) {
  if (node.is_string()) {
    const auto& s = node.get_ref<const std::string&>();
    if (s.size() > 3 && s.starts_with("${") && s.ends_with("}") && s.find('}') == s.size() - 1) {
      const std::string value = var_or_empty(p, s.substr(2, s.size() - 3));
      json parsed = json::parse(value, nullptr, false);
      return parsed.is_discarded() ? json(value) : parsed;
    }
    return substitute_text(s, p);
  }
  if (node.is_array()) {
    json out = json::array();
    for (const auto& v : node) out.push_back(substitute(v, p));
    return out;
  }
  if (node.is_object()) {
    json out = json::object();
    for (auto it = node.begin(); it != node.end(); ++it) out[it.key()] = substitute(it.value(), p);
    return out;
  }
  return node;
}

}  // namespace

TokenUsage estimate_usage(const std::string& prompt, const std::string& reply) {
  return {static_cast<std::int64_t>((prompt.size() + 3) / 4), static_cast<std::int64_t>((reply.size() + 3) / 4)};
}

MockBackend::MockBackend(const json& script) {
  if (!script.is_object() || !script.contains("rules") || !script["rules"].is_array()) {
    throw SchemaError("mock script needs a \"rules\" list");
  }
  std::size_t index = 0;
  for (const auto& r : script["rules"]) {
    const std::string where = "mock rule " + std::to_string(index++);
    if (!r.is_object()) throw SchemaError(where + " is not an object");
    Rule rule;
    try {
      if (auto it = r.find("template"); it != r.end()) {
        rule.name = template_from_string(it->get<std::string>());
        if (!rule.name) throw SchemaError(where + ": unknown template " + it->dump());
      }
      if (auto it = r.find("when"); it != r.end()) {
        for (auto w = it->begin(); w != it->end(); ++w) {
          const std::string pattern = w.value().get<std::string>();
          rule.when.emplace_back(w.key(), std::regex(pattern));
          rule.when_source.emplace_back(w.key(), pattern);
        }
      }
      rule.fingerprint = r.value("fingerprint", std::string{});
      if (auto it = r.find("reply"); it != r.end()) rule.reply = *it;
      rule.raw = r.value("raw", std::string{});
      if (!rule.reply && !r.contains("raw")) throw SchemaError(where + " needs \"reply\" or \"raw\"");
      if (auto it = r.find("usage"); it != r.end()) {
        rule.usage = TokenUsage{it->at("prompt_tokens").get<std::int64_t>(),
                                it->at("completion_tokens").get<std::int64_t>()};
      }
    } catch (const json::exception& e) {
      throw SchemaError(where + ": " + e.what());
    } catch (const std::regex_error& e) {
      throw SchemaError(where + ": bad regex: " + e.what());
    }
    rules_.push_back(std::move(rule));
  }
}

MockBackend MockBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mock script " + path.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw SchemaError("mock script " + path.string() + " is not valid JSON");
  return MockBackend(doc);
}

ChatResponse MockBackend::complete(const RenderedPrompt& prompt) {
  for (const Rule& rule : rules_) {
    if (rule.name && *rule.name != prompt.name) continue;
    if (!rule.fingerprint.empty() && rule.fingerprint != prompt.fingerprint()) continue;
    bool ok = true;
    for (const auto& [key, re] : rule.when) {
      if (key != "$prompt" && !prompt.vars.contains(key)) {
        ok = false;
        break;
      }
      if (!std::regex_search(var_or_empty(prompt, key), re)) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;

    ChatResponse resp;
    resp.text = rule.reply ? substitute(*rule.reply, prompt).dump() : substitute_text(rule.raw, prompt);
    resp.usage = rule.usage ? *rule.usage : estimate_usage(prompt.text, resp.text);
    return resp;
  }
  throw TransportError("mock script has no rule for " + std::string(to_string(prompt.name)) + " prompt " +
                       prompt.fingerprint().substr(0, 12));
}

}  // namespace synthweaver
