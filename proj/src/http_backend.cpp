#include <httplib.h>

#include <fstream>
#include <sstream>

#include "synthweaver/backends.hpp"
#include "synthweaver/errors.hpp"
#include "synthweaver/hashing.hpp"

namespace synthweaver {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read screenshot " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

HttpChatBackend::HttpChatBackend(HttpBackendSettings settings) : settings_(std::move(settings)) {
  const auto scheme_end = settings_.endpoint.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("oracle endpoint needs a scheme: " + settings_.endpoint);
  const auto path_start = settings_.endpoint.find('/', scheme_end + 3);
  origin_ = settings_.endpoint.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? std::string{} : settings_.endpoint.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

json HttpChatBackend::request_body(const RenderedPrompt& prompt) const {
  json content;
  if (prompt.images.empty()) {
    content = prompt.text;
  } else {
    content = json::array({{{"type", "text"}, {"text", prompt.text}}});
    for (const auto& handle : prompt.images) {
      content.push_back({{"type", "image_url"},
                         {"image_url", {{"url", "data:image/png;base64," + base64_encode(read_file(handle))}}}});
    }
  }
  return {{"model", settings_.model},
          {"temperature", settings_.temperature},
          {"messages", json::array({{{"role", "user"}, {"content", content}}})}};
}

ChatResponse HttpChatBackend::complete(const RenderedPrompt& prompt) {
  httplib::Client client(origin_);
  client.set_connection_timeout(settings_.timeout_seconds, 0);
  client.set_read_timeout(settings_.timeout_seconds, 0);
  client.set_write_timeout(settings_.timeout_seconds, 0);
  httplib::Headers headers;
  if (!settings_.api_key.empty()) headers.emplace("Authorization", "Bearer " + settings_.api_key);

  auto res = client.Post(path_prefix_ + "/chat/completions", headers, request_body(prompt).dump(), "application/json");
  if (!res) throw TransportError("POST " + settings_.endpoint + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw TransportError("HTTP " + std::to_string(res->status) + " from " + settings_.endpoint + ": " +
                         res->body.substr(0, 200));
  }

  json body = json::parse(res->body, nullptr, false);
  if (body.is_discarded()) throw TransportError("completion response is not JSON");
  try {
    ChatResponse out;
    out.text = body.at("choices").at(0).at("message").at("content").get<std::string>();
    if (auto it = body.find("usage"); it != body.end() && it->is_object()) {
      out.usage.prompt_tokens = it->value("prompt_tokens", std::int64_t{0});
      out.usage.completion_tokens = it->value("completion_tokens", std::int64_t{0});
    } else {
      out.usage = estimate_usage(prompt.text, out.text);
    }
    return out;
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed completion response: ") + e.what());
  }
}

}  // namespace synthweaver
