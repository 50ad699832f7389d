#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "preduce/llm/llm.hpp"

namespace preduce::llm {

/**
 * Offline transport replaying fixtures. A fixture directory holds
 * `manifest.json`:
 *
 *   {"entries": [
 *     {"match": "identify all functions", "responses": ["fi-1.json", ["x", "y"]], "cycle": false},
 *     {"match": "", "responses": ["fallback.txt"], "cycle": true}
 *   ]}
 *
 * A request is served by the first entry whose `match` occurs in the user
 * prompt (an empty match accepts anything). Each entry hands out its
 * responses in order; a response is an inline list of completions, a `.json`
 * file holding such a list, or any other file taken as one completion.
 * Running past the end throws TransportError("fixture underflow") unless the
 * entry cycles. A response with fewer than n completions is an error; extra
 * ones are dropped.
 */
class ScriptedTransport final : public LlmTransport {
 public:
  struct Entry {
    std::string match;
    std::vector<std::vector<std::string>> responses;
    bool cycle = false;
  };

  explicit ScriptedTransport(std::vector<Entry> entries);
  static std::shared_ptr<ScriptedTransport> from_directory(const std::filesystem::path& dir);

  LlmResponse send(const LlmRequest& request) override;
  [[nodiscard]] std::string name() const override { return "mock"; }
  /// Requests served so far.
  [[nodiscard]] std::size_t served() const;

 private:
  std::vector<Entry> entries_;
  std::vector<std::size_t> cursor_;
  std::size_t served_ = 0;
  mutable std::mutex mutex_;
};

}  // namespace preduce::llm
