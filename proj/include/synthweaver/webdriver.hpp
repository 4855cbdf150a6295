#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthweaver/environment.hpp"

namespace httplib {
class Client;
}

namespace synthweaver {

struct BrowserConfig {
  std::string endpoint_url = "http://127.0.0.1:9515";  // chromedriver default
  std::string start_url;
  int viewport_width = 1280;
  int viewport_height = 720;
  int nav_timeout_ms = 30000;
  std::filesystem::path screenshot_dir = "screenshots";
  bool screenshots = true;
  nlohmann::json capabilities = {{"browserName", "chrome"},
                                 {"goog:chromeOptions", {{"args", {"--headless=new", "--no-sandbox"}}}}};
};

// Throws std::invalid_argument naming the first bad field.
void validate_browser_config(const BrowserConfig& config);

// One node of the page as the enumeration script reports it.
struct DomNode {
  int depth = 0;
  std::string role;
  std::string name;
  bool interactive = false;
};

// Renders nodes as indented `role "name" [id]` lines, ids counting up from base.
std::string render_tree(const std::vector<DomNode>& nodes, std::int64_t base);

// Maps "Enter", "ctrl+a", "Shift+Tab" to W3C key code sequences. Single
// characters pass through. Throws InvalidAction for unknown key names.
std::vector<std::string> parse_key_chord(const std::string& keys);

// Environment over a W3C WebDriver endpoint (chromedriver, geckodriver, ...).
//
// Every observation re-enumerates visible elements in document order. When
// the page is unchanged since the last observation the previous ids are kept;
// any change allocates a fresh id range, so ids from an older view fail with
// ElementNotFound instead of hitting a different element.
class WebDriverSession final : public Environment {
 public:
  explicit WebDriverSession(BrowserConfig config);  // throws ConnectFailed, ProtocolError
  ~WebDriverSession() override;
  WebDriverSession(const WebDriverSession&) = delete;
  WebDriverSession& operator=(const WebDriverSession&) = delete;

  void reset() override;
  Observation observe() override;
  TransitionOutcome execute(const Action& action) override;
  bool terminal() const override { return terminal_; }

  const std::string& session_id() const { return session_id_; }

 private:
  struct Snapshot {
    std::string url;
    std::vector<DomNode> nodes;
    std::string signature;  // url plus id-free tree, for change detection
  };

  nlohmann::json command(const std::string& method, const std::string& path, const nlohmann::json& body = nullptr);
  Snapshot enumerate();
  Observation to_observation(const Snapshot& snap);
  std::string element_ref(std::int64_t id);
  std::optional<std::string> screenshot();

  BrowserConfig config_;
  std::unique_ptr<httplib::Client> client_;
  std::string session_id_;
  bool terminal_ = false;
  std::optional<Snapshot> current_;
  std::int64_t base_ = 0;
  std::int64_t next_base_ = 0;
};

class WebDriverFactory final : public EnvironmentFactory {
 public:
  explicit WebDriverFactory(BrowserConfig config) : config_(std::move(config)) {}
  std::unique_ptr<Environment> open() override { return std::make_unique<WebDriverSession>(config_); }

 private:
  BrowserConfig config_;
};

}  // namespace synthweaver
