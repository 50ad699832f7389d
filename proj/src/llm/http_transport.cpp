#include "preduce/llm/http_transport.hpp"

#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

namespace preduce::llm {

using json = nlohmann::json;

HttpTransport::HttpTransport(HttpConfig config) : config_(std::move(config)) {
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw AuthError("API key environment variable " + config_.api_key_env + " is not set");
  }
  api_key_ = key;
  auto scheme = config_.base_url.find("://");
  if (scheme == std::string::npos) throw std::invalid_argument("base URL needs a scheme: " + config_.base_url);
  auto slash = config_.base_url.find('/', scheme + 3);
  origin_ = config_.base_url.substr(0, slash);
  path_ = slash == std::string::npos ? "" : config_.base_url.substr(slash);
  while (!path_.empty() && path_.back() == '/') path_.pop_back();
  path_ += "/chat/completions";
}

LlmResponse HttpTransport::send(const LlmRequest& request) {
  json body;
  body["model"] = request.model_id;
  body["temperature"] = request.temperature;
  body["n"] = config_.native_n ? request.n : 1;
  body["messages"] = json::array();
  if (!request.system_prompt.empty()) {
    body["messages"].push_back({{"role", "system"}, {"content", request.system_prompt}});
  }
  body["messages"].push_back({{"role", "user"}, {"content", request.user_prompt}});

  httplib::Client client(origin_);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);
  httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};

  auto result = client.Post(path_, headers, body.dump(), "application/json");
  if (!result) throw TransportError("request failed: " + httplib::to_string(result.error()), true);
  int status = result->status;
  if (status == 401 || status == 403) throw AuthError("endpoint rejected credentials (HTTP " + std::to_string(status) + ")");
  if (status == 429) throw RateLimited("rate limited (HTTP 429)");
  if (status >= 500) throw TransportError("server error (HTTP " + std::to_string(status) + ")", true);
  if (status != 200) {
    throw TransportError("unexpected HTTP " + std::to_string(status) + ": " + result->body.substr(0, 200));
  }

  LlmResponse out;
  try {
    auto doc = json::parse(result->body);
    for (const auto& choice : doc.at("choices")) {
      const auto& content = choice.at("message").at("content");
      out.completions.push_back(content.is_string() ? content.get<std::string>() : std::string());
    }
    if (doc.contains("usage") && doc["usage"].is_object()) {
      out.usage.prompt_tokens = doc["usage"].value("prompt_tokens", std::size_t{0});
      out.usage.completion_tokens = doc["usage"].value("completion_tokens", std::size_t{0});
    }
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed completion response: ") + e.what());
  }
  std::size_t wanted = config_.native_n ? static_cast<std::size_t>(request.n) : 1;
  out.truncated = out.completions.size() < wanted;
  return out;
}

}  // namespace preduce::llm
