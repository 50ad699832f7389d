#pragma once

#include <chrono>
#include <string>

#include "preduce/llm/llm.hpp"

namespace preduce::llm {

struct HttpConfig {
  /// OpenAI-compatible API root; `/chat/completions` is appended.
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key_env = "OPENAI_API_KEY";
  /// Provider honors the `n` parameter.
  bool native_n = true;
  std::chrono::seconds timeout{300};
};

/// Chat-completion endpoint over HTTP(S). The API key is read from the
/// environment at construction; AuthError if it is unset or empty.
class HttpTransport final : public LlmTransport {
 public:
  explicit HttpTransport(HttpConfig config);

  LlmResponse send(const LlmRequest& request) override;
  [[nodiscard]] bool supports_multiple_completions() const override { return config_.native_n; }
  [[nodiscard]] std::string name() const override { return "http"; }

 private:
  HttpConfig config_;
  std::string api_key_;
  std::string origin_;
  std::string path_;
};

}  // namespace preduce::llm
