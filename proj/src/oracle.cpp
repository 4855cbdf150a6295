#include "synthweaver/oracle.hpp"

#include <thread>

#include "synthweaver/errors.hpp"
#include "synthweaver/json_extract.hpp"

namespace synthweaver {

namespace {

__extension__ using Wide = __int128;

Money per_mtok(std::int64_t tokens, Money rate) {
  if (tokens < 0) throw std::invalid_argument("negative token count");
  const Wide scaled = static_cast<Wide>(tokens) * rate.pico();
  const Wide rounded = (scaled + 500'000) / 1'000'000;
  if (rounded > INT64_MAX || rounded < INT64_MIN) throw std::overflow_error("cost overflows");
  return Money::from_pico(static_cast<std::int64_t>(rounded));
}

std::string meta(const RenderedPrompt& p, const std::string& key) {
  auto it = p.vars.find(key);
  return it == p.vars.end() ? std::string{} : it->second;
}

// Releases the semaphore slot on scope exit.
class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<1024>& sem) : sem_(sem) { sem_.acquire(); }
  ~SlotGuard() { sem_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<1024>& sem_;
};

}  // namespace

Money Pricing::cost(const TokenUsage& usage) const {
  return per_mtok(usage.prompt_tokens, prompt_per_mtok) + per_mtok(usage.completion_tokens, completion_per_mtok);
}

nlohmann::json to_json(const CallRecord& r) {
  nlohmann::json j = {{"template", to_string(r.name)},
                      {"fingerprint", r.fingerprint},
                      {"prompt_tokens", r.usage.prompt_tokens},
                      {"completion_tokens", r.usage.completion_tokens},
                      {"cost_usd", r.cost.to_string()},
                      {"accepted", r.accepted}};
  if (!r.site.empty()) j["site"] = r.site;
  if (!r.task_id.empty()) j["task_id"] = r.task_id;
  if (!r.scope.empty()) j["scope"] = r.scope;
  return j;
}

void CostLedger::set_sink(Sink sink) {
  std::lock_guard lock(mu_);
  sink_ = std::move(sink);
}

void CostLedger::record(const CallRecord& r) {
  std::lock_guard lock(mu_);
  calls_.push_back(r);
  total_ += r.cost;
  tokens_ += r.usage.total();
  if (sink_) sink_(r);
}

Money CostLedger::total_cost() const {
  std::lock_guard lock(mu_);
  return total_;
}

std::int64_t CostLedger::total_tokens() const {
  std::lock_guard lock(mu_);
  return tokens_;
}

std::size_t CostLedger::n_calls() const {
  std::lock_guard lock(mu_);
  return calls_.size();
}

Money CostLedger::cost_for_scope(const std::string& scope) const {
  std::lock_guard lock(mu_);
  Money sum;
  for (const auto& c : calls_) {
    if (c.scope == scope) sum += c.cost;
  }
  return sum;
}

std::vector<CallRecord> CostLedger::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::string reparse_hint(const std::string& error) {
  return "\n\nYour previous reply was rejected: " + error +
         "\nReply again with exactly one JSON object that follows the required output format.";
}

Oracle::Oracle(std::shared_ptr<ChatBackend> backend, OracleSettings settings)
    : backend_(std::move(backend)), settings_(std::move(settings)), in_flight_(std::max(1, settings_.max_in_flight)) {
  if (!backend_) throw std::invalid_argument("oracle needs a backend");
  if (settings_.max_in_flight < 1 || settings_.max_in_flight > 1024) {
    throw std::invalid_argument("max_in_flight must be in [1, 1024]");
  }
}

ChatResponse Oracle::send_with_retries(const RenderedPrompt& prompt) {
  for (int attempt = 0;; ++attempt) {
    if (settings_.max_total_tokens > 0 && ledger_.total_tokens() >= settings_.max_total_tokens) {
      throw BudgetExhausted("run used " + std::to_string(ledger_.total_tokens()) + " of " +
                            std::to_string(settings_.max_total_tokens) + " tokens");
    }
    try {
      SlotGuard slot(in_flight_);
      return backend_->complete(prompt);
    } catch (const TransportError&) {
      if (attempt >= settings_.max_retries) throw;
    }
    std::this_thread::sleep_for(settings_.backoff_base * (1LL << attempt));
  }
}

OracleReply Oracle::call(const RenderedPrompt& prompt, const ReplyContext& ctx) {
  OracleReply out;
  RenderedPrompt current = prompt;
  std::string last_error;
  for (int attempt = 0; attempt <= settings_.reparse_attempts; ++attempt) {
    if (attempt > 0) {
      current.text = prompt.text + reparse_hint(last_error);
      current.vars["_attempt"] = std::to_string(attempt);
    }
    ChatResponse resp = send_with_retries(current);
    ++out.attempts;

    CallRecord rec;
    rec.name = prompt.name;
    rec.fingerprint = current.fingerprint();
    rec.usage = resp.usage;
    rec.cost = settings_.pricing.cost(resp.usage);
    rec.site = meta(prompt, "_site");
    rec.task_id = meta(prompt, "_task_id");
    rec.scope = meta(prompt, "_scope");
    out.usage.prompt_tokens += resp.usage.prompt_tokens;
    out.usage.completion_tokens += resp.usage.completion_tokens;
    out.cost += rec.cost;

    try {
      out.parsed = parse_reply(prompt.name, extract_json(resp.text), ctx);
      out.raw_text = std::move(resp.text);
      rec.accepted = true;
      ledger_.record(rec);
      return out;
    } catch (const SchemaViolation& e) {
      last_error = e.what();
    } catch (const NoJsonFound& e) {
      last_error = e.what();
    }
    ledger_.record(rec);
  }
  throw SchemaViolation(std::string(to_string(prompt.name)) + " reply rejected after " +
                        std::to_string(out.attempts) + " attempts; last: " + last_error);
}

OracleReply Oracle::ask(TemplateName name, const PromptVars& vars, const ReplyContext& ctx,
                        std::vector<std::string> images) {
  return call(render(name, vars, std::move(images)), ctx);
}

}  // namespace synthweaver
