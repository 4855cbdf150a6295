#include "synthweaver/site_graph.hpp"

#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "synthweaver/errors.hpp"

namespace synthweaver {

using nlohmann::json;

bool PageSpec::has_element(std::int64_t id) const {
  for (const auto& e : elements) {
    if (e.id == id) return true;
  }
  if (below_fold) {
    for (const auto& e : below_fold->elements) {
      if (e.id == id) return true;
    }
  }
  return false;
}

const PageSpec* SiteGraph::page_by_url(const std::string& url) const {
  for (const auto& [id, page] : pages) {
    if (page.url == url) return &page;
  }
  return nullptr;
}

void validate_site_graph(const SiteGraph& graph) {
  if (graph.pages.empty()) throw InvalidGraph("graph has no pages");
  if (!graph.pages.contains(graph.start_page)) {
    throw InvalidGraph("start_page '" + graph.start_page + "' is not a page");
  }
  std::set<std::string> urls;
  for (const auto& [id, page] : graph.pages) {
    const std::string where = "page '" + id + "'";
    if (page.elements.empty()) throw InvalidGraph(where + " has no elements");
    if (page.url.empty()) throw InvalidGraph(where + " has an empty url");
    if (!urls.insert(page.url).second) throw InvalidGraph(where + " repeats url '" + page.url + "'");

    std::set<std::int64_t> ids;
    auto check_element = [&](const Element& e) {
      if (e.id < 0) throw InvalidGraph(where + " has a negative element id");
      if (!ids.insert(e.id).second) throw InvalidGraph(where + " repeats element id " + std::to_string(e.id));
      if (e.interactive && e.role.empty() && e.name.empty()) {
        throw InvalidGraph(where + " element " + std::to_string(e.id) + " is interactive with no role or name");
      }
    };
    for (const auto& e : page.elements) check_element(e);
    if (page.below_fold) {
      for (const auto& e : page.below_fold->elements) check_element(e);
    }

    for (std::size_t i = 0; i < page.transitions.size(); ++i) {
      const Transition& t = page.transitions[i];
      const std::string tw = where + " transition " + std::to_string(i);
      if (takes_element(t.kind)) {
        if (!t.element_id) throw InvalidGraph(tw + " needs an element_id for " + std::string(to_wire(t.kind)));
        if (!page.has_element(*t.element_id)) {
          throw InvalidGraph(tw + " references missing element " + std::to_string(*t.element_id));
        }
      } else if (t.element_id) {
        throw InvalidGraph(tw + " gives an element_id to " + std::string(to_wire(t.kind)));
      }
      if (t.kind != ActionKind::Click && t.kind != ActionKind::Type && t.kind != ActionKind::Hover &&
          t.kind != ActionKind::Press) {
        throw InvalidGraph(tw + " uses kind " + std::string(to_wire(t.kind)) + " which the simulator handles natively");
      }
      if (t.effect.goto_page && !graph.pages.contains(*t.effect.goto_page)) {
        throw InvalidGraph(tw + " targets missing page '" + *t.effect.goto_page + "'");
      }
      try {
        std::regex re(t.value_pattern, std::regex::ECMAScript);
      } catch (const std::regex_error& e) {
        throw InvalidGraph(tw + " has a bad value_pattern: " + e.what());
      }
    }
  }
}

namespace {

// Walks a JSON document while remembering the path for diagnostics.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw SchemaError("at " + (path_.empty() ? std::string("/") : path_) + ": " + what);
  }

  Node at(const std::string& key) const {
    if (!j_.is_object()) fail("expected an object");
    auto it = j_.find(key);
    if (it == j_.end()) fail("missing field '" + key + "'");
    return Node(*it, path_ + "/" + key);
  }
  std::optional<Node> find(const std::string& key) const {
    if (!j_.is_object()) fail("expected an object");
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return std::nullopt;
    return Node(*it, path_ + "/" + key);
  }
  std::vector<Node> items() const {
    if (!j_.is_array()) fail("expected an array");
    std::vector<Node> out;
    for (std::size_t i = 0; i < j_.size(); ++i) out.emplace_back(j_[i], path_ + "/" + std::to_string(i));
    return out;
  }
  std::vector<std::pair<std::string, Node>> members() const {
    if (!j_.is_object()) fail("expected an object");
    std::vector<std::pair<std::string, Node>> out;
    for (auto it = j_.begin(); it != j_.end(); ++it) out.emplace_back(it.key(), Node(it.value(), path_ + "/" + it.key()));
    return out;
  }
  std::string str() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }
  std::int64_t integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    return j_.get<std::int64_t>();
  }
  bool boolean() const {
    if (!j_.is_boolean()) fail("expected a boolean");
    return j_.get<bool>();
  }
  std::map<std::string, std::string> string_map() const {
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : members()) out[k] = v.str();
    return out;
  }

 private:
  const json& j_;
  std::string path_;
};

Element parse_element(const Node& n) {
  Element e;
  e.id = n.at("id").integer();
  if (e.id < 0) n.at("id").fail("element id must be non-negative");
  e.role = n.at("role").str();
  e.name = n.at("name").str();
  e.interactive = n.at("interactive").boolean();
  return e;
}

Transition parse_transition(const Node& n) {
  Transition t;
  if (auto id = n.find("element_id")) t.element_id = id->integer();
  const auto kind_node = n.at("kind");
  const auto kind = action_kind_from_wire(kind_node.str());
  if (!kind) kind_node.fail("unknown action kind '" + kind_node.str() + "'");
  t.kind = *kind;
  if (auto p = n.find("value_pattern")) t.value_pattern = p->str();
  if (auto w = n.find("when")) t.when = w->string_map();
  const Node effect = n.at("effect");
  if (auto g = effect.find("goto")) t.effect.goto_page = g->str();
  if (auto s = effect.find("set")) t.effect.set = s->string_map();
  if (auto e = effect.find("error")) t.effect.error = e->str();
  if (auto noop = effect.find("noop"); noop && !noop->boolean()) effect.fail("noop must be true when present");
  return t;
}

}  // namespace

SiteGraph parse_site_graph(const json& doc, const std::string& source) {
  try {
    const Node root(doc, "");
    SiteGraph g;
    g.schema_version = static_cast<int>(root.at("schema_version").integer());
    if (g.schema_version != kSiteGraphSchemaVersion) {
      root.at("schema_version").fail("unsupported schema_version " + std::to_string(g.schema_version));
    }
    if (auto name = root.find("name")) g.name = name->str();
    g.start_page = root.at("start_page").str();
    const Node pages = root.at("pages");
    for (const auto& [id, pn] : pages.members()) {
      PageSpec p;
      p.id = id;
      p.url = pn.at("url").str();
      p.tree_template = pn.at("tree_template").str();
      for (const auto& en : pn.at("elements").items()) p.elements.push_back(parse_element(en));
      if (auto tn = pn.find("transitions")) {
        for (const auto& t : tn->items()) p.transitions.push_back(parse_transition(t));
      }
      if (auto bf = pn.find("below_fold")) {
        BelowFold below;
        below.tree = bf->at("tree").str();
        for (const auto& en : bf->at("elements").items()) below.elements.push_back(parse_element(en));
        p.below_fold = std::move(below);
      }
      if (auto err = pn.find("error")) p.error = err->str();
      g.pages.emplace(id, std::move(p));
    }
    validate_site_graph(g);
    return g;
  } catch (const InvalidGraph& e) {
    throw SchemaError(source + ": " + e.what());
  } catch (const SchemaError& e) {
    throw SchemaError(source + ": " + e.what());
  }
}

SiteGraph load_site_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(path.string() + ": cannot open site graph file");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i) line += text[i] == '\n';
    throw SchemaError(path.string() + ":" + std::to_string(line) + ": " + e.what());
  }
  return parse_site_graph(doc, path.string());
}

}  // namespace synthweaver
