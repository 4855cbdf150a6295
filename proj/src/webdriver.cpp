#include "synthweaver/webdriver.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "synthweaver/errors.hpp"
#include "synthweaver/hashing.hpp"

namespace synthweaver {

using nlohmann::json;

namespace {

constexpr const char* kElementKey = "element-6066-11e4-a52e-4f735466cecf";

// Walks the DOM in document order, keeps nodes that are visible in the
// viewport and either interactive or carry text, tags each kept node with
// data-sw-idx and reports {url, title, nodes}.
constexpr const char* kEnumerateScript = R"JS(
const out = [];
const inView = (el) => {
  const r = el.getBoundingClientRect();
  if (r.width === 0 && r.height === 0) return false;
  const st = window.getComputedStyle(el);
  if (st.visibility === 'hidden' || st.display === 'none') return false;
  return r.bottom > 0 && r.top < window.innerHeight;
};
const roleOf = (el) => {
  const explicit = el.getAttribute('role');
  if (explicit) return explicit;
  const tag = el.tagName.toLowerCase();
  if (tag === 'a' && el.hasAttribute('href')) return 'link';
  if (tag === 'button') return 'button';
  if (tag === 'select') return 'combobox';
  if (tag === 'textarea') return 'textbox';
  if (tag === 'input') {
    const t = (el.getAttribute('type') || 'text').toLowerCase();
    if (t === 'checkbox' || t === 'radio') return t;
    if (t === 'submit' || t === 'button' || t === 'reset') return 'button';
    if (t === 'hidden') return '';
    return t === 'search' ? 'searchbox' : 'textbox';
  }
  if (/^h[1-6]$/.test(tag)) return 'heading';
  if (tag === 'img') return 'img';
  if (tag === 'li') return 'listitem';
  if (tag === 'p' || tag === 'span' || tag === 'td' || tag === 'label') return 'StaticText';
  return '';
};
const interactiveRoles = new Set(['link','button','combobox','textbox','searchbox','checkbox','radio','menuitem','tab','option']);
const nameOf = (el) => {
  const v = el.getAttribute('aria-label') || el.getAttribute('alt') || el.getAttribute('placeholder') ||
            (el.innerText || '').trim() || el.getAttribute('value') || el.getAttribute('title') || '';
  return v.replace(/\s+/g, ' ').slice(0, 120);
};
for (const el of document.querySelectorAll('[data-sw-idx]')) el.removeAttribute('data-sw-idx');
const walk = (el, depth) => {
  for (const child of el.children) {
    const role = roleOf(child);
    const keep = role !== '' && inView(child) && (interactiveRoles.has(role) || nameOf(child) !== '');
    if (keep) {
      child.setAttribute('data-sw-idx', String(out.length));
      out.push({depth: depth, role: role, name: nameOf(child), interactive: interactiveRoles.has(role)});
      if (!interactiveRoles.has(role) && role !== 'listitem') continue;
    }
    walk(child, keep ? depth + 1 : depth);
  }
};
out.push({depth: 0, role: 'RootWebArea', name: document.title || '', interactive: false});
if (document.body) walk(document.body, 1);
return {url: window.location.href, nodes: out};
)JS";

const std::map<std::string, std::string>& key_codes() {
  static const std::map<std::string, std::string> codes = {
      {"enter", "\uE007"},     {"return", "\uE006"},    {"tab", "\uE004"},       {"escape", "\uE00C"},
      {"esc", "\uE00C"},       {"backspace", "\uE003"}, {"delete", "\uE017"},    {"space", " "},
      {"arrowup", "\uE013"},   {"arrowdown", "\uE015"}, {"arrowleft", "\uE012"}, {"arrowright", "\uE014"},
      {"pageup", "\uE00E"},    {"pagedown", "\uE00F"},  {"home", "\uE011"},      {"end", "\uE010"},
      {"control", "\uE009"},   {"ctrl", "\uE009"},      {"shift", "\uE008"},     {"alt", "\uE00A"},
      {"meta", "\uE03D"},      {"cmd", "\uE03D"},
  };
  return codes;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

void validate_browser_config(const BrowserConfig& c) {
  if (c.endpoint_url.empty()) throw std::invalid_argument("endpoint_url is empty");
  if (c.viewport_width <= 0 || c.viewport_height <= 0) throw std::invalid_argument("viewport must be positive");
  if (c.nav_timeout_ms <= 0) throw std::invalid_argument("nav_timeout_ms must be positive");
}

std::string render_tree(const std::vector<DomNode>& nodes, std::int64_t base) {
  std::string out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out.append(static_cast<std::size_t>(nodes[i].depth) * 2, ' ');
    out += nodes[i].role + " \"" + nodes[i].name + "\" [" + std::to_string(base + static_cast<std::int64_t>(i)) + "]\n";
  }
  return out;
}

std::vector<std::string> parse_key_chord(const std::string& keys) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= keys.size()) {
    auto plus = keys.find('+', start);
    // A trailing "+" is the plus key itself, as in "ctrl++".
    if (plus == start && plus != std::string::npos) plus = keys.find('+', start + 1);
    const std::string part = keys.substr(start, plus == std::string::npos ? std::string::npos : plus - start);
    if (part.empty()) throw InvalidAction("empty key in \"" + keys + "\"");
    if (part.size() == 1) {
      out.push_back(part);
    } else {
      auto it = key_codes().find(lower(part));
      if (it == key_codes().end()) throw InvalidAction("unknown key \"" + part + "\"");
      out.push_back(it->second);
    }
    if (plus == std::string::npos) break;
    start = plus + 1;
  }
  return out;
}

WebDriverSession::WebDriverSession(BrowserConfig config) : config_(std::move(config)) {
  validate_browser_config(config_);
  client_ = std::make_unique<httplib::Client>(config_.endpoint_url);
  client_->set_connection_timeout(5, 0);
  const int read_s = std::max(5, config_.nav_timeout_ms / 1000 + 5);
  client_->set_read_timeout(read_s, 0);

  json caps = {{"capabilities", {{"alwaysMatch", config_.capabilities}}}};
  json value = command("POST", "/session", caps);
  if (!value.is_object() || !value.contains("sessionId") || !value["sessionId"].is_string()) {
    throw ProtocolError("new session reply lacks sessionId");
  }
  session_id_ = value["sessionId"].get<std::string>();
  command("POST", "/session/" + session_id_ + "/timeouts", {{"pageLoad", config_.nav_timeout_ms}});
  command("POST", "/session/" + session_id_ + "/window/rect",
          {{"width", config_.viewport_width}, {"height", config_.viewport_height}});
  reset();
}

WebDriverSession::~WebDriverSession() {
  if (session_id_.empty()) return;
  try {
    command("DELETE", "/session/" + session_id_);
  } catch (const Error&) {
    // The driver may already be gone; nothing useful to do.
  }
}

json WebDriverSession::command(const std::string& method, const std::string& path, const json& body) {
  httplib::Result res = method == "GET"      ? client_->Get(path)
                        : method == "DELETE" ? client_->Delete(path)
                                             : client_->Post(path, (body.is_null() ? json::object() : body).dump(),
                                                             "application/json");
  if (!res) {
    throw ConnectFailed(method + " " + config_.endpoint_url + path + ": " + httplib::to_string(res.error()));
  }
  json reply = json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.is_object() || !reply.contains("value")) {
    throw ProtocolError(method + " " + path + " returned HTTP " + std::to_string(res->status) + " without a value");
  }
  json value = reply["value"];
  if (res->status != 200) {
    const std::string error = value.is_object() ? value.value("error", std::string{"unknown error"}) : "unknown error";
    const std::string message = value.is_object() ? value.value("message", std::string{}) : std::string{};
    if (error == "no such element" || error == "stale element reference" || error == "element not interactable") {
      throw ElementNotFound(error + ": " + message);
    }
    throw ProtocolError(method + " " + path + ": " + error + ": " + message);
  }
  return value;
}

void WebDriverSession::reset() {
  terminal_ = false;
  current_.reset();
  if (!config_.start_url.empty()) command("POST", "/session/" + session_id_ + "/url", {{"url", config_.start_url}});
}

WebDriverSession::Snapshot WebDriverSession::enumerate() {
  json value = command("POST", "/session/" + session_id_ + "/execute/sync",
                       {{"script", kEnumerateScript}, {"args", json::array()}});
  Snapshot snap;
  try {
    snap.url = value.at("url").get<std::string>();
    for (const auto& n : value.at("nodes")) {
      snap.nodes.push_back({n.at("depth").get<int>(), n.at("role").get<std::string>(), n.at("name").get<std::string>(),
                            n.value("interactive", false)});
    }
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("enumeration script returned an unexpected shape: ") + e.what());
  }
  snap.signature = snap.url + "\n" + render_tree(snap.nodes, 0);
  return snap;
}

std::optional<std::string> WebDriverSession::screenshot() {
  if (!config_.screenshots) return std::nullopt;
  json value = command("GET", "/session/" + session_id_ + "/screenshot");
  if (!value.is_string()) throw ProtocolError("screenshot reply is not a string");
  std::string png;
  try {
    png = base64_decode(value.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ProtocolError(std::string("screenshot is not base64: ") + e.what());
  }
  std::filesystem::create_directories(config_.screenshot_dir);
  const auto path = config_.screenshot_dir / (sha256_hex(png) + ".png");
  if (!std::filesystem::exists(path)) {
    std::ofstream out(path, std::ios::binary);
    out.write(png.data(), static_cast<std::streamsize>(png.size()));
    if (!out) throw IoError("cannot write " + path.string());
  }
  return path.string();
}

Observation WebDriverSession::to_observation(const Snapshot& snap) {
  Observation obs;
  obs.url = snap.url;
  obs.accessibility_tree = render_tree(snap.nodes, base_);
  for (std::size_t i = 0; i < snap.nodes.size(); ++i) {
    const auto& n = snap.nodes[i];
    obs.elements.push_back({base_ + static_cast<std::int64_t>(i), n.role, n.name, n.interactive});
  }
  obs.screenshot_ref = screenshot();
  return obs;
}

Observation WebDriverSession::observe() {
  Snapshot snap = enumerate();
  if (!current_ || current_->signature != snap.signature) {
    base_ = next_base_;
    next_base_ += static_cast<std::int64_t>(snap.nodes.size());
  }
  current_ = std::move(snap);
  return to_observation(*current_);
}

std::string WebDriverSession::element_ref(std::int64_t id) {
  if (!current_ || id < base_ || id >= base_ + static_cast<std::int64_t>(current_->nodes.size())) {
    throw ElementNotFound("element " + std::to_string(id) + " is not in the current view");
  }
  const std::string selector = "[data-sw-idx=\"" + std::to_string(id - base_) + "\"]";
  json value = command("POST", "/session/" + session_id_ + "/element", {{"using", "css selector"}, {"value", selector}});
  if (!value.is_object() || !value.contains(kElementKey)) throw ProtocolError("find element reply lacks a reference");
  return value[kElementKey].get<std::string>();
}

TransitionOutcome WebDriverSession::execute(const Action& action) {
  if (terminal_) throw SessionTerminal("session already ended with none/stop");
  validate_action(action);
  if (!current_) observe();
  const std::string before = current_->signature;
  const std::string s = "/session/" + session_id_;

  TransitionOutcome outcome;
  try {
    switch (action.kind) {
      case ActionKind::Click:
        command("POST", s + "/element/" + element_ref(*action.element_id) + "/click");
        break;
      case ActionKind::Type: {
        const std::string ref = element_ref(*action.element_id);
        command("POST", s + "/element/" + ref + "/clear");
        command("POST", s + "/element/" + ref + "/value", {{"text", action.value}});
        break;
      }
      case ActionKind::Hover: {
        const std::string ref = element_ref(*action.element_id);
        json move = {{"type", "pointerMove"}, {"duration", 0}, {"x", 0}, {"y", 0}, {"origin", {{kElementKey, ref}}}};
        json pointer = {{"type", "pointer"},
                        {"id", "mouse"},
                        {"parameters", {{"pointerType", "mouse"}}},
                        {"actions", json::array({move})}};
        command("POST", s + "/actions", {{"actions", json::array({pointer})}});
        break;
      }
      case ActionKind::Press: {
        const auto keys = parse_key_chord(action.value);
        json seq = json::array();
        for (const auto& k : keys) seq.push_back({{"type", "keyDown"}, {"value", k}});
        for (auto it = keys.rbegin(); it != keys.rend(); ++it) seq.push_back({{"type", "keyUp"}, {"value", *it}});
        json keyboard = {{"type", "key"}, {"id", "keyboard"}, {"actions", seq}};
        command("POST", s + "/actions", {{"actions", json::array({keyboard})}});
        break;
      }
      case ActionKind::Scroll: {
        const std::string dir = action.value == "up" ? "-1" : "1";
        command("POST", s + "/execute/sync",
                {{"script", "window.scrollBy(0, " + dir + " * window.innerHeight * 0.8); return null;"},
                 {"args", json::array()}});
        break;
      }
      case ActionKind::Goto:
        command("POST", s + "/url", {{"url", action.value}});
        break;
      case ActionKind::GoBack:
        command("POST", s + "/back");
        break;
      case ActionKind::GoForward:
        command("POST", s + "/forward");
        break;
      case ActionKind::None:
      case ActionKind::Stop:
        terminal_ = true;
        break;
    }
  } catch (const ProtocolError& e) {
    // Navigation failures and the like are page-visible outcomes, not crashes.
    if (action.kind == ActionKind::Goto || action.kind == ActionKind::GoBack || action.kind == ActionKind::GoForward) {
      outcome.error = std::string("NavigationError: ") + e.what();
    } else {
      throw;
    }
  }

  observe();
  outcome.changed = current_->signature != before;
  return outcome;
}

}  // namespace synthweaver
