#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthweaver/money.hpp"
#include "synthweaver/prompts.hpp"
#include "synthweaver/replies.hpp"

namespace synthweaver {

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;

  std::int64_t total() const { return prompt_tokens + completion_tokens; }
  friend bool operator==(const TokenUsage&, const TokenUsage&) = default;
};

// Rates are USD per million tokens. A call costs
// tokens * rate / 1e6, rounded half-up to the picodollar.
struct Pricing {
  Money prompt_per_mtok;
  Money completion_per_mtok;

  Money cost(const TokenUsage& usage) const;
};

struct ChatResponse {
  std::string text;
  TokenUsage usage;
};

// One chat-completion round trip. Implementations throw TransportError for
// anything that may succeed on retry.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResponse complete(const RenderedPrompt& prompt) = 0;
};

struct CallRecord {
  TemplateName name = TemplateName::NextAction;
  std::string fingerprint;
  TokenUsage usage;
  Money cost;
  std::string site;     // from the `_site` meta variable, may be empty
  std::string task_id;  // from `_task_id`
  std::string scope;    // from `_scope`, e.g. the trajectory being collected
  bool accepted = false;
};

nlohmann::json to_json(const CallRecord& r);

// Run-level usage and cost. Every backend response is recorded, including
// replies later rejected by validation. Thread-safe.
class CostLedger {
 public:
  using Sink = std::function<void(const CallRecord&)>;

  void set_sink(Sink sink);
  void record(const CallRecord& r);

  Money total_cost() const;
  std::int64_t total_tokens() const;
  std::size_t n_calls() const;
  Money cost_for_scope(const std::string& scope) const;
  std::vector<CallRecord> calls() const;

 private:
  mutable std::mutex mu_;
  std::vector<CallRecord> calls_;
  Money total_;
  std::int64_t tokens_ = 0;
  Sink sink_;
};

struct OracleSettings {
  Pricing pricing;
  int max_retries = 3;         // transport retries per attempt
  int reparse_attempts = 2;    // extra requests after a rejected reply
  std::chrono::milliseconds backoff_base{1000};
  int max_in_flight = 4;
  std::int64_t max_total_tokens = 0;  // 0 means unlimited
};

struct OracleReply {
  std::string raw_text;
  ParsedReply parsed;
  TokenUsage usage;  // summed over every attempt of this call
  Money cost;
  int attempts = 0;

  template <typename T>
  const T& as() const {
    return std::get<T>(parsed);
  }
};

// Shared by all workers. Bounds in-flight calls, retries transport failures
// with exponential backoff, re-asks with an error hint when a reply fails
// validation and charges every response to the ledger.
//
// Variables whose names start with '_' are meta variables: templates never
// reference them, but the mock can match on them and the ledger reads
// `_site`, `_task_id` and `_scope`. The oracle sets `_attempt` on re-asks.
class Oracle {
 public:
  Oracle(std::shared_ptr<ChatBackend> backend, OracleSettings settings);

  OracleReply call(const RenderedPrompt& prompt, const ReplyContext& ctx = {});
  OracleReply ask(TemplateName name, const PromptVars& vars, const ReplyContext& ctx = {},
                  std::vector<std::string> images = {});

  CostLedger& ledger() { return ledger_; }
  const OracleSettings& settings() const { return settings_; }

 private:
  ChatResponse send_with_retries(const RenderedPrompt& prompt);

  std::shared_ptr<ChatBackend> backend_;
  OracleSettings settings_;
  CostLedger ledger_;
  std::counting_semaphore<1024> in_flight_;
};

// Text appended to a prompt when its previous reply was rejected.
std::string reparse_hint(const std::string& error);

}  // namespace synthweaver
