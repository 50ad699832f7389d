#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <thread>

#include <json.hpp>

#include "preduce/llm/llm.hpp"

namespace preduce::llm {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

void LlmRequest::validate() const {
  if (n < 1) throw std::invalid_argument("number of completions must be at least 1");
  if (!(temperature >= 0.0 && temperature <= 2.0)) throw std::invalid_argument("temperature must be within [0, 2]");
  if (model_id.empty()) throw std::invalid_argument("model id must not be empty");
}

PriceTable PriceTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read price table " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("invalid price table " + path.string() + ": " + e.what());
  }
  std::map<std::string, ModelPrice> prices;
  for (auto& [model, entry] : doc.items()) {
    prices[model] = ModelPrice{entry.at("prompt_per_million").get<double>(),
                               entry.at("completion_per_million").get<double>()};
  }
  return PriceTable(std::move(prices));
}

std::optional<double> PriceTable::cost(const std::string& model, const TokenUsage& usage) const {
  auto it = prices_.find(model);
  if (it == prices_.end()) return std::nullopt;
  return (static_cast<double>(usage.prompt_tokens) * it->second.prompt_per_million +
          static_cast<double>(usage.completion_tokens) * it->second.completion_per_million) /
         1e6;
}

std::string prompt_hash(const LlmRequest& request) {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  feed(request.system_prompt);
  feed(std::string_view("\0", 1));
  feed(request.user_prompt);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

LlmClient::LlmClient(std::shared_ptr<LlmTransport> transport, RetryPolicy retry, std::optional<PriceTable> prices,
                     std::filesystem::path log_path)
    : transport_(std::move(transport)),
      retry_(retry),
      prices_(std::move(prices)),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
  if (!transport_) throw std::invalid_argument("LLM client needs a transport");
  if (retry_.max_retries < 0) throw std::invalid_argument("max retries must not be negative");
  if (!log_path.empty()) set_log_path(std::move(log_path));
}

void LlmClient::set_log_path(std::filesystem::path path) {
  std::lock_guard<std::mutex> lock(mutex_);
  log_.close();
  log_path_ = std::move(path);
  if (log_path_.empty()) return;
  log_.open(log_path_, std::ios::app);
  if (!log_) throw std::runtime_error("cannot open LLM log " + log_path_.string());
}

LlmResponse LlmClient::send_with_retry(const LlmRequest& request) {
  auto backoff = retry_.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      ++stats_.wire_calls;
      if (attempt > 0) ++stats_.retries;
    }
    try {
      return transport_->send(request);
    } catch (const RateLimited&) {
      if (attempt >= retry_.max_retries) throw;
    } catch (const TransportError& e) {
      if (!e.retryable() || attempt >= retry_.max_retries) throw;
    }
    sleeper_(backoff);
    auto next = std::chrono::duration_cast<std::chrono::milliseconds>(backoff * retry_.multiplier);
    backoff = std::min(next, retry_.max_backoff);
  }
}

LlmResponse LlmClient::complete(const LlmRequest& request) {
  request.validate();
  auto start = Clock::now();
  LlmResponse out;
  try {
    if (transport_->supports_multiple_completions() || request.n == 1) {
      out = send_with_retry(request);
      if (out.completions.size() > static_cast<std::size_t>(request.n)) out.completions.resize(request.n);
    } else {
      LlmRequest single = request;
      single.n = 1;
      for (int i = 0; i < request.n; ++i) {
        auto part = send_with_retry(single);
        out.usage += part.usage;
        if (!part.completions.empty()) out.completions.push_back(std::move(part.completions.front()));
      }
    }
  } catch (const std::exception& e) {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      ++stats_.failures;
    }
    log(request, nullptr, e.what(), std::nullopt);
    throw;
  }
  out.truncated = out.completions.size() < static_cast<std::size_t>(request.n);
  out.latency = Clock::now() - start;

  std::optional<double> cost;
  if (prices_) cost = prices_->cost(request.model_id, out.usage);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    ++stats_.queries;
    stats_.usage += out.usage;
    stats_.latency += out.latency;
    if (!cost) cost_known_ = false;
    if (cost_known_) stats_.cost = stats_.cost.value_or(0.0) + *cost;
    else stats_.cost.reset();
  }
  log(request, &out, "", cost);
  return out;
}

LlmStats LlmClient::stats() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return stats_;
}

void LlmClient::log(const LlmRequest& request, const LlmResponse* response, const std::string& error,
                    std::optional<double> cost) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (!log_.is_open()) return;
  json line;
  line["transport"] = transport_->name();
  line["model"] = request.model_id;
  line["prompt_hash"] = prompt_hash(request);
  line["prompt_chars"] = request.system_prompt.size() + request.user_prompt.size();
  line["temperature"] = request.temperature;
  line["n"] = request.n;
  if (response != nullptr) {
    std::size_t chars = 0;
    for (const auto& c : response->completions) chars += c.size();
    line["completions"] = response->completions.size();
    line["completion_chars"] = chars;
    line["prompt_tokens"] = response->usage.prompt_tokens;
    line["completion_tokens"] = response->usage.completion_tokens;
    line["latency_s"] = response->latency.count();
    line["truncated"] = response->truncated;
  } else {
    line["error"] = error;
  }
  line["cost_usd"] = cost ? json(*cost) : json(nullptr);
  log_ << line.dump() << '\n';
  log_.flush();
}

}  // namespace preduce::llm
