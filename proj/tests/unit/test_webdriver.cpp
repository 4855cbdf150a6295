#include <gtest/gtest.h>

#include <httplib.h>

#include <cstdlib>
#include <map>
#include <mutex>
#include <thread>

#include "synthweaver/errors.hpp"
#include "synthweaver/hashing.hpp"
#include "synthweaver/webdriver.hpp"
#include "test_support.hpp"

namespace synthweaver {
namespace {

using nlohmann::json;
constexpr const char* kRefKey = "element-6066-11e4-a52e-4f735466cecf";

// A minimal W3C WebDriver endpoint over two fake pages. Page "a" links to
// page "b"; "b" has a text box whose typed value shows up in the tree.
class FakeDriver {
 public:
  FakeDriver() {
    using httplib::Request;
    using httplib::Response;
    server_.Post("/session", [this](const Request& req, Response& res) {
      std::lock_guard lock(mu_);
      last_caps_ = json::parse(req.body);
      reply(res, {{"sessionId", "s1"}, {"capabilities", json::object()}});
    });
    server_.Delete("/session/s1", [this](const Request&, Response& res) {
      std::lock_guard lock(mu_);
      deleted_ = true;
      reply(res, nullptr);
    });
    for (const char* p : {"/session/s1/timeouts", "/session/s1/window/rect", "/session/s1/actions"}) {
      server_.Post(p, [this](const Request& req, Response& res) {
        std::lock_guard lock(mu_);
        log_.push_back(req.path + " " + req.body);
        reply(res, nullptr);
      });
    }
    server_.Post("/session/s1/url", [this](const Request& req, Response& res) {
      std::lock_guard lock(mu_);
      const std::string url = json::parse(req.body).at("url");
      if (url.find("unreachable") != std::string::npos) {
        return error(res, 500, "unknown error", "net::ERR_NAME_NOT_RESOLVED");
      }
      navigate(url);
      reply(res, nullptr);
    });
    server_.Post("/session/s1/back", [this](const Request&, Response& res) {
      std::lock_guard lock(mu_);
      if (history_.size() > 1) history_.pop_back();
      reply(res, nullptr);
    });
    server_.Post("/session/s1/forward", [this](const Request&, Response& res) { reply(res, nullptr); });
    server_.Post("/session/s1/execute/sync", [this](const Request& req, Response& res) {
      std::lock_guard lock(mu_);
      const std::string script = json::parse(req.body).at("script");
      if (script.find("scrollBy") != std::string::npos) {
        ++scrolls_;
        return reply(res, nullptr);
      }
      reply(res, {{"url", url()}, {"nodes", nodes()}});
    });
    server_.Get("/session/s1/screenshot", [this](const Request&, Response& res) {
      std::lock_guard lock(mu_);
      reply(res, base64_encode("PNG:" + url()));
    });
    server_.Post("/session/s1/element", [this](const Request& req, Response& res) {
      std::lock_guard lock(mu_);
      const std::string sel = json::parse(req.body).at("value");
      const auto q1 = sel.find('"');
      const int idx = std::stoi(sel.substr(q1 + 1));
      if (idx >= static_cast<int>(nodes().size())) return error(res, 404, "no such element", sel);
      reply(res, {{kRefKey, "ref-" + std::to_string(idx)}});
    });
    server_.Post(R"(/session/s1/element/ref-(\d+)/click)", [this](const Request& req, Response& res) {
      std::lock_guard lock(mu_);
      const int idx = std::stoi(req.matches[1]);
      if (page() == "a" && idx == 0) navigate("http://fake.test/b");
      reply(res, nullptr);
    });
    server_.Post(R"(/session/s1/element/ref-(\d+)/clear)", [this](const Request&, Response& res) {
      std::lock_guard lock(mu_);
      typed_.clear();
      reply(res, nullptr);
    });
    server_.Post(R"(/session/s1/element/ref-(\d+)/value)", [this](const Request& req, Response& res) {
      std::lock_guard lock(mu_);
      if (page() != "b") return error(res, 400, "element not interactable", "not a text field");
      typed_ = json::parse(req.body).at("text");
      reply(res, nullptr);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~FakeDriver() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }
  json last_caps() {
    std::lock_guard lock(mu_);
    return last_caps_;
  }
  std::vector<std::string> log() {
    std::lock_guard lock(mu_);
    return log_;
  }
  bool deleted() {
    std::lock_guard lock(mu_);
    return deleted_;
  }
  int scrolls() {
    std::lock_guard lock(mu_);
    return scrolls_;
  }

 private:
  static void reply(httplib::Response& res, const json& value) {
    res.set_content(json{{"value", value}}.dump(), "application/json");
  }
  static void error(httplib::Response& res, int status, const std::string& err, const std::string& msg) {
    res.status = status;
    res.set_content(json{{"value", {{"error", err}, {"message", msg}}}}.dump(), "application/json");
  }
  void navigate(const std::string& url) { history_.push_back(url); }
  std::string url() const { return history_.back(); }
  std::string page() const { return url().ends_with("/b") ? "b" : "a"; }
  json nodes() const {
    if (page() == "a") {
      return json::array({{{"depth", 0}, {"role", "link"}, {"name", "Go to B"}, {"interactive", true}},
                          {{"depth", 1}, {"role", "StaticText"}, {"name", "Hello"}, {"interactive", false}}});
    }
    return json::array({{{"depth", 0}, {"role", "textbox"}, {"name", "Query " + typed_}, {"interactive", true}},
                        {{"depth", 0}, {"role", "button"}, {"name", "Go"}, {"interactive", true}}});
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mu_;
  std::vector<std::string> history_{"about:blank"};
  std::string typed_;
  json last_caps_;
  std::vector<std::string> log_;
  bool deleted_ = false;
  int scrolls_ = 0;
};

BrowserConfig config_for(const FakeDriver& d, const testing::TempDir& dir) {
  BrowserConfig c;
  c.endpoint_url = d.endpoint();
  c.start_url = "http://fake.test/a";
  c.screenshot_dir = dir / "shots";
  return c;
}

TEST(WebDriverConfig, Validation) {
  BrowserConfig c;
  EXPECT_NO_THROW(validate_browser_config(c));
  c.nav_timeout_ms = 0;
  EXPECT_THROW(validate_browser_config(c), std::invalid_argument);
  c = BrowserConfig{};
  c.viewport_height = -1;
  EXPECT_THROW(validate_browser_config(c), std::invalid_argument);
}

TEST(WebDriverTree, RendersIndentedLinesWithIds) {
  const std::vector<DomNode> nodes = {{0, "link", "Home", true}, {1, "StaticText", "hi", false}};
  EXPECT_EQ(render_tree(nodes, 10), "link \"Home\" [10]\n  StaticText \"hi\" [11]\n");
}

TEST(WebDriverKeys, ChordsMapToW3CCodes) {
  EXPECT_EQ(parse_key_chord("Enter"), std::vector<std::string>{"\uE007"});
  EXPECT_EQ(parse_key_chord("ctrl+a"), (std::vector<std::string>{"\uE009", "a"}));
  EXPECT_EQ(parse_key_chord("Shift+Tab"), (std::vector<std::string>{"\uE008", "\uE004"}));
  EXPECT_EQ(parse_key_chord("ctrl++"), (std::vector<std::string>{"\uE009", "+"}));
  EXPECT_EQ(parse_key_chord("x"), std::vector<std::string>{"x"});
  EXPECT_THROW(parse_key_chord("hyper+x"), InvalidAction);
  EXPECT_THROW(parse_key_chord("ctrl+"), InvalidAction);
}

TEST(WebDriverSession, ConnectFailedWhenNothingListens) {
  BrowserConfig c;
  {
    // Grab a free port, then close it so the connection is refused.
    httplib::Server s;
    const int port = s.bind_to_any_port("127.0.0.1");
    c.endpoint_url = "http://127.0.0.1:" + std::to_string(port);
  }
  EXPECT_THROW(WebDriverSession{c}, ConnectFailed);
}

TEST(WebDriverSession, ObserveAssignsIdsAndWritesScreenshot) {
  FakeDriver driver;
  testing::TempDir dir;
  WebDriverSession s(config_for(driver, dir));
  EXPECT_EQ(s.session_id(), "s1");
  EXPECT_EQ(driver.last_caps()["capabilities"]["alwaysMatch"]["browserName"], "chrome");

  const Observation obs = s.observe();
  EXPECT_EQ(obs.url, "http://fake.test/a");
  ASSERT_EQ(obs.elements.size(), 2u);
  EXPECT_EQ(obs.elements[0].id, 0);
  EXPECT_EQ(obs.elements[0].name, "Go to B");
  EXPECT_TRUE(obs.elements[0].interactive);
  EXPECT_EQ(obs.accessibility_tree, "link \"Go to B\" [0]\n  StaticText \"Hello\" [1]\n");
  ASSERT_TRUE(obs.screenshot_ref);
  EXPECT_EQ(testing::read_file(*obs.screenshot_ref), "PNG:http://fake.test/a");
  EXPECT_EQ(std::filesystem::path(*obs.screenshot_ref).filename().string(),
            sha256_hex("PNG:http://fake.test/a") + ".png");

  // Same page, same ids.
  EXPECT_EQ(s.observe().elements[0].id, 0);
}

TEST(WebDriverSession, ClickNavigatesAndRenumbers) {
  FakeDriver driver;
  testing::TempDir dir;
  WebDriverSession s(config_for(driver, dir));
  s.observe();
  const auto out = s.execute(Action::click(0));
  EXPECT_TRUE(out.changed);
  const Observation b = s.observe();
  EXPECT_EQ(b.url, "http://fake.test/b");
  EXPECT_EQ(b.elements[0].id, 2);  // fresh range after the change
  // An id from the previous view must not hit an element on this one.
  EXPECT_THROW(s.execute(Action::click(0)), ElementNotFound);
}

TEST(WebDriverSession, TypeClearsThenSendsText) {
  FakeDriver driver;
  testing::TempDir dir;
  WebDriverSession s(config_for(driver, dir));
  s.observe();
  s.execute(Action::click(0));
  const auto id = s.observe().elements[0].id;
  EXPECT_TRUE(s.execute(Action::type(id, "shoes")).changed);
  EXPECT_EQ(s.observe().elements[0].name, "Query shoes");
}

TEST(WebDriverSession, DriverErrorsMapToEnvironmentErrors) {
  FakeDriver driver;
  testing::TempDir dir;
  WebDriverSession s(config_for(driver, dir));
  s.observe();
  EXPECT_THROW(s.execute(Action::type(0, "x")), ElementNotFound);  // not interactable
  const auto nav = s.execute(Action::go_to("http://unreachable.test/"));
  ASSERT_TRUE(nav.error);
  EXPECT_NE(nav.error->find("NavigationError"), std::string::npos);
}

TEST(WebDriverSession, ScrollPressHoverAndHistory) {
  FakeDriver driver;
  testing::TempDir dir;
  WebDriverSession s(config_for(driver, dir));
  s.observe();
  EXPECT_FALSE(s.execute(Action::scroll("down")).changed);
  EXPECT_EQ(driver.scrolls(), 1);
  s.execute(Action::press("ctrl+a"));
  s.execute(Action::hover(1));
  int actions = 0;
  for (const auto& line : driver.log()) actions += line.starts_with("/session/s1/actions");
  EXPECT_EQ(actions, 2);
  s.execute(Action::click(0));
  EXPECT_TRUE(s.execute(Action::go_back()).changed);
  EXPECT_EQ(s.observe().url, "http://fake.test/a");
  s.execute(Action::none("done"));
  EXPECT_TRUE(s.terminal());
  EXPECT_THROW(s.execute(Action::go_back()), SessionTerminal);
}

TEST(WebDriverSession, DestructorDeletesSession) {
  FakeDriver driver;
  testing::TempDir dir;
  { WebDriverSession s(config_for(driver, dir)); }
  EXPECT_TRUE(driver.deleted());
}

// Needs a real driver, e.g. `chromedriver --port=9515`, and
// SYNTHWEAVER_WEBDRIVER_URL pointing at it.
TEST(WebDriverLive, ObservesAStaticPage) {
  const char* endpoint = std::getenv("SYNTHWEAVER_WEBDRIVER_URL");
  if (!endpoint) GTEST_SKIP() << "SYNTHWEAVER_WEBDRIVER_URL not set";
  testing::TempDir dir;
  BrowserConfig c;
  c.endpoint_url = endpoint;
  c.start_url = "file://" + testing::fixture_path("static/index.html").string();
  c.screenshot_dir = dir / "shots";
  WebDriverSession s(c);
  const Observation obs = s.observe();
  EXPECT_FALSE(obs.elements.empty());
  ASSERT_TRUE(obs.screenshot_ref);
  EXPECT_TRUE(std::filesystem::exists(*obs.screenshot_ref));
  const Element* link = nullptr;
  for (const auto& e : obs.elements) {
    if (e.role == "link" && e.name == "Next page") link = &e;
  }
  ASSERT_NE(link, nullptr);
  EXPECT_TRUE(s.execute(Action::click(link->id)).changed);
  EXPECT_NE(s.observe().url.find("next.html"), std::string::npos);
}

}  // namespace
}  // namespace synthweaver
