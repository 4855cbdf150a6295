#include "test_support.hpp"

namespace synthweaver::testing {

using nlohmann::json;

const std::vector<JsonCase>& json_reply_corpus() {
  static const json answer = {{"Need-to-Refine", "no"}, {"High-Level-Task", ""}};
  static const std::vector<JsonCase> cases = {
      {"bare", R"({"Need-to-Refine": "no", "High-Level-Task": ""})", answer},
      {"json fence", "```json\n{\"Need-to-Refine\": \"no\", \"High-Level-Task\": \"\"}\n```", answer},
      {"plain fence", "```\n{\"Need-to-Refine\": \"no\", \"High-Level-Task\": \"\"}\n```", answer},
      {"indented fence", "  ```json\n  {\"Need-to-Refine\": \"no\",\n   \"High-Level-Task\": \"\"}\n  ```", answer},
      {"leading prose", "Sure! Here is my answer:\n{\"Need-to-Refine\": \"no\", \"High-Level-Task\": \"\"}", answer},
      {"trailing prose", "{\"Need-to-Refine\": \"no\", \"High-Level-Task\": \"\"}\nLet me know if you need more.",
       answer},
      {"prose both sides with fence",
       "I looked at the page.\n```json\n{\"Need-to-Refine\": \"no\", \"High-Level-Task\": \"\"}\n```\nDone.", answer},
      {"line comments", "{\n  // nothing to change\n  \"Need-to-Refine\": \"no\",\n  \"High-Level-Task\": \"\"\n}",
       answer},
      {"block comment", "{/* verdict */ \"Need-to-Refine\": \"no\", \"High-Level-Task\": \"\"}", answer},
      {"braces inside strings", R"({"a": "uses {curly} braces", "b": "and \"quotes\" too"})",
       json{{"a", "uses {curly} braces"}, {"b", "and \"quotes\" too"}}},
      {"nested objects", R"(Result: {"next_action": {"action": {"type": "click", "element_id": 3}}} ok)",
       json{{"next_action", {{"action", {{"type", "click"}, {"element_id", 3}}}}}}},
      {"stray brace before object", "Use {placeholders} wisely. {\"score\": 4}", json{{"score", 4}}},
      {"first of two objects", "{\"score\": 1}\n{\"score\": 2}", json{{"score", 1}}},
      {"unicode", R"({"answer": "café – ok"})", json{{"answer", "café – ok"}}},
      {"crlf", "```json\r\n{\"score\": 7}\r\n```\r\n", json{{"score", 7}}},
      {"array before object", "[1, 2] then {\"score\": 3}", json{{"score", 3}}},
      {"empty object", "{}", json::object()},
      // Unrecoverable.
      {"no json", "I cannot help with that.", nullptr},
      {"truncated", "{\"Need-to-Refine\": \"no\", \"High-Level-", nullptr},
      {"single quotes", "{'score': 3}", nullptr},
      {"trailing comma", "{\"score\": 3,}", nullptr},
      {"only an array", "[1, 2, 3]", nullptr},
      {"empty", "", nullptr},
  };
  return cases;
}

}  // namespace synthweaver::testing
