#include <gtest/gtest.h>
#include <httplib.h>

#include <thread>

#include "synthweaver/backends.hpp"
#include "synthweaver/errors.hpp"
#include "synthweaver/hashing.hpp"
#include "test_support.hpp"

namespace synthweaver {
namespace {

using nlohmann::json;

RenderedPrompt prompt_with(TemplateName name, PromptVars vars, std::string text = "prompt text") {
  RenderedPrompt p;
  p.name = name;
  p.text = std::move(text);
  p.vars = std::move(vars);
  return p;
}

TEST(MockBackend, FirstMatchingRuleWins) {
  MockBackend mock(json::parse(R"({"rules": [
    {"template": "next_action", "when": {"_step": "^0$"}, "reply": {"n": 0}, "usage": {"prompt_tokens": 7, "completion_tokens": 3}},
    {"template": "NextAction", "when": {"$prompt": "checkout"}, "raw": "raw ${url}"},
    {"template": "NextAction", "reply": {"fallback": true}},
    {"reply": {"any": "${_site}"}}
  ]})"));
  auto r = mock.complete(prompt_with(TemplateName::NextAction, {{"_step", "0"}}));
  EXPECT_EQ(json::parse(r.text), json({{"n", 0}}));
  EXPECT_EQ(r.usage, (TokenUsage{7, 3}));

  r = mock.complete(prompt_with(TemplateName::NextAction, {{"_step", "1"}, {"url", "u"}}, "go to checkout"));
  EXPECT_EQ(r.text, "raw u");
  EXPECT_EQ(r.usage, estimate_usage("go to checkout", "raw u"));

  // A `when` key the prompt does not bind never matches, even for a
  // pattern that accepts the empty string.
  r = mock.complete(prompt_with(TemplateName::NextAction, {{"_stepx", "0"}}));
  EXPECT_EQ(json::parse(r.text), json({{"fallback", true}}));

  r = mock.complete(prompt_with(TemplateName::Categorize, {{"_site", "shop"}}));
  EXPECT_EQ(json::parse(r.text), json({{"any", "shop"}}));
}

TEST(MockBackend, WholeStringSubstitutionParsesJson) {
  MockBackend mock(json::parse(R"({"rules": [
    {"reply": {"id": "${id}", "text": "${name}", "mixed": "id=${id}", "list": ["${id}"], "missing": "${nope}"}}
  ]})"));
  const auto r = json::parse(mock.complete(prompt_with(TemplateName::NextAction, {{"id", "12"}, {"name", "Ann"}})).text);
  EXPECT_EQ(r["id"], 12);
  EXPECT_EQ(r["text"], "Ann");
  EXPECT_EQ(r["mixed"], "id=12");
  EXPECT_EQ(r["list"][0], 12);
  EXPECT_EQ(r["missing"], "");
}

TEST(MockBackend, FingerprintRule) {
  const auto p = prompt_with(TemplateName::JudgeQuality, {}, "exact");
  MockBackend mock(json{{"rules", {{{"fingerprint", p.fingerprint()}, {"raw", "hit"}}, {{"raw", "miss"}}}}});
  EXPECT_EQ(mock.complete(p).text, "hit");
  EXPECT_EQ(mock.complete(prompt_with(TemplateName::JudgeQuality, {}, "other")).text, "miss");
}

TEST(MockBackend, NoRuleIsTransportError) {
  MockBackend mock(json{{"rules", {{{"template", "Categorize"}, {"raw", "x"}}}}});
  EXPECT_THROW(mock.complete(prompt_with(TemplateName::NextAction, {})), TransportError);
}

TEST(MockBackend, ScriptErrors) {
  EXPECT_THROW(MockBackend(json::array()), SchemaError);
  EXPECT_THROW(MockBackend(json{{"rules", {{{"template", "Nope"}, {"raw", ""}}}}}), SchemaError);
  EXPECT_THROW(MockBackend(json{{"rules", {{{"template", "NextAction"}}}}}), SchemaError);
  EXPECT_THROW(MockBackend(json{{"rules", {{{"when", {{"a", "("}}}, {"raw", ""}}}}}), SchemaError);
  EXPECT_THROW(MockBackend(json{{"rules", {{{"raw", ""}, {"usage", {{"prompt_tokens", 1}}}}}}}), SchemaError);
  EXPECT_THROW(MockBackend::from_file("/nonexistent/mock.json"), IoError);
  testing::TempDir dir;
  testing::write_file(dir / "bad.json", "{");
  EXPECT_THROW(MockBackend::from_file(dir / "bad.json"), SchemaError);
}

TEST(MockBackend, FixtureScriptLoads) {
  const auto mock = MockBackend::from_file(testing::fixture_path("shop.mock.json"));
  EXPECT_GT(mock.rules().size(), 10u);
}

class FakeCompletions : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mu_);
      last_auth_ = req.get_header_value("Authorization");
      last_body_ = json::parse(req.body);
      if (status_ != 200) {
        res.status = status_;
        res.set_content("overloaded", "text/plain");
        return;
      }
      res.set_content(reply_.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }

  HttpChatBackend backend(const std::string& key = "sk-test") {
    return HttpChatBackend({"http://127.0.0.1:" + std::to_string(port_) + "/v1/", "gpt-test", key, 0.0, 5});
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mu_;
  int status_ = 200;
  json reply_ = {{"choices", {{{"message", {{"role", "assistant"}, {"content", "{\"score\": 1}"}}}}}},
                 {"usage", {{"prompt_tokens", 120}, {"completion_tokens", 9}}}};
  std::string last_auth_;
  json last_body_;
};

TEST_F(FakeCompletions, PostsChatRequest) {
  auto b = backend();
  const auto r = b.complete(prompt_with(TemplateName::JudgeQuality, {}, "rate this"));
  EXPECT_EQ(r.text, "{\"score\": 1}");
  EXPECT_EQ(r.usage, (TokenUsage{120, 9}));
  EXPECT_EQ(last_auth_, "Bearer sk-test");
  EXPECT_EQ(last_body_["model"], "gpt-test");
  EXPECT_EQ(last_body_["messages"][0]["role"], "user");
  EXPECT_EQ(last_body_["messages"][0]["content"], "rate this");
}

TEST_F(FakeCompletions, NoKeyNoHeader) {
  auto b = backend("");
  b.complete(prompt_with(TemplateName::JudgeQuality, {}));
  EXPECT_EQ(last_auth_, "");
}

TEST_F(FakeCompletions, MissingUsageIsEstimated) {
  reply_.erase("usage");
  auto b = backend();
  EXPECT_EQ(b.complete(prompt_with(TemplateName::JudgeQuality, {}, "abcdefgh")).usage,
            estimate_usage("abcdefgh", "{\"score\": 1}"));
}

TEST_F(FakeCompletions, ErrorsAreTransportErrors) {
  status_ = 503;
  auto b = backend();
  EXPECT_THROW(b.complete(prompt_with(TemplateName::JudgeQuality, {})), TransportError);
  status_ = 200;
  reply_ = {{"choices", json::array()}};
  EXPECT_THROW(b.complete(prompt_with(TemplateName::JudgeQuality, {})), TransportError);
}

TEST(HttpChatBackend, UnreachableIsTransportError) {
  httplib::Server s;
  const int port = s.bind_to_any_port("127.0.0.1");
  // Nothing listens on the bound port once the server is gone.
  s.stop();
  HttpChatBackend b({"http://127.0.0.1:" + std::to_string(port), "m", "", 0.0, 2});
  EXPECT_THROW(b.complete(prompt_with(TemplateName::JudgeQuality, {})), TransportError);
}

TEST(HttpChatBackend, ImagesBecomeDataUrls) {
  testing::TempDir dir;
  testing::write_file(dir / "shot.png", "PNGDATA");
  HttpChatBackend b({"https://api.example.com/v1", "m", "", 0.0, 5});
  auto p = prompt_with(TemplateName::NextAction, {}, "look");
  p.images = {(dir / "shot.png").string()};
  const auto body = b.request_body(p);
  const auto& content = body["messages"][0]["content"];
  ASSERT_EQ(content.size(), 2u);
  EXPECT_EQ(content[0]["text"], "look");
  EXPECT_EQ(content[1]["image_url"]["url"], "data:image/png;base64," + base64_encode("PNGDATA"));
  EXPECT_THROW(HttpChatBackend({"api.example.com", "m", "", 0.0, 5}), ConfigError);
}

}  // namespace
}  // namespace synthweaver
