#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace preduce::llm {

struct LlmRequest {
  std::string system_prompt;
  std::string user_prompt;
  double temperature = 1.0;
  int n = 5;
  std::string model_id = "gpt-4o";

  /// Throws std::invalid_argument unless n >= 1 and temperature is in [0, 2].
  void validate() const;
};

struct TokenUsage {
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;

  TokenUsage& operator+=(const TokenUsage& o) {
    prompt_tokens += o.prompt_tokens;
    completion_tokens += o.completion_tokens;
    return *this;
  }
};

struct LlmResponse {
  std::vector<std::string> completions;
  TokenUsage usage;
  std::chrono::duration<double> latency{0};
  /// The provider returned fewer completions than requested.
  bool truncated = false;
};

class LlmError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AuthError : public LlmError {
 public:
  using LlmError::LlmError;
};

class RateLimited : public LlmError {
 public:
  using LlmError::LlmError;
};

class TransportError : public LlmError {
 public:
  explicit TransportError(const std::string& what, bool retryable = false) : LlmError(what), retryable_(retryable) {}
  [[nodiscard]] bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

/// One wire exchange. send() may return fewer than request.n completions
/// only when the provider truncates.
class LlmTransport {
 public:
  virtual ~LlmTransport() = default;
  virtual LlmResponse send(const LlmRequest& request) = 0;
  /// False if the provider answers one completion per call.
  [[nodiscard]] virtual bool supports_multiple_completions() const { return true; }
  [[nodiscard]] virtual std::string name() const = 0;
};

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{1000};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{30'000};
};

/// USD per million tokens, per model id.
struct ModelPrice {
  double prompt_per_million = 0;
  double completion_per_million = 0;
};

class PriceTable {
 public:
  PriceTable() = default;
  explicit PriceTable(std::map<std::string, ModelPrice> prices) : prices_(std::move(prices)) {}
  /// JSON object: {"model": {"prompt_per_million": x, "completion_per_million": y}, ...}
  static PriceTable load(const std::filesystem::path& path);

  [[nodiscard]] std::optional<double> cost(const std::string& model, const TokenUsage& usage) const;

 private:
  std::map<std::string, ModelPrice> prices_;
};

struct LlmStats {
  std::size_t queries = 0;     ///< complete() calls that returned
  std::size_t wire_calls = 0;  ///< transport sends, retries included
  std::size_t retries = 0;
  std::size_t failures = 0;    ///< complete() calls that threw
  TokenUsage usage;
  std::chrono::duration<double> latency{0};
  std::optional<double> cost;  ///< null without a price for every model used
};

/**
 * Sampling client over a transport: retries transient failures with
 * exponential backoff, fans out to n calls when the provider lacks native
 * n, keeps usage/latency/cost totals, and appends one JSON line per query to
 * an optional log. Safe for concurrent use.
 */
class LlmClient {
 public:
  explicit LlmClient(std::shared_ptr<LlmTransport> transport, RetryPolicy retry = {},
                     std::optional<PriceTable> prices = std::nullopt, std::filesystem::path log_path = {});

  LlmResponse complete(const LlmRequest& request);

  [[nodiscard]] LlmStats stats() const;
  [[nodiscard]] const LlmTransport& transport() const noexcept { return *transport_; }
  void set_sleeper(std::function<void(std::chrono::milliseconds)> sleeper) { sleeper_ = std::move(sleeper); }
  void set_log_path(std::filesystem::path path);

 private:
  LlmResponse send_with_retry(const LlmRequest& request);
  void log(const LlmRequest& request, const LlmResponse* response, const std::string& error,
           std::optional<double> cost);

  std::shared_ptr<LlmTransport> transport_;
  RetryPolicy retry_;
  std::optional<PriceTable> prices_;
  std::function<void(std::chrono::milliseconds)> sleeper_;
  mutable std::mutex mutex_;
  std::filesystem::path log_path_;
  std::ofstream log_;
  LlmStats stats_;
  bool cost_known_ = true;
};

/// 64-bit FNV-1a of system and user prompt, hex.
std::string prompt_hash(const LlmRequest& request);

/// Body of the first fenced code block, trimmed; the whole text trimmed if
/// there is no fence.
std::string extract_code(std::string_view completion);

/// Targets named in a completion: a bracketed comma list, numbered or
/// bulleted lines, or plain lines (prose-looking lines dropped). Order is
/// kept, exact repeats and empty entries dropped.
std::vector<std::string> parse_target_list(std::string_view completion);

}  // namespace preduce::llm
