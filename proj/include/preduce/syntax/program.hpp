#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "preduce/syntax/grammar.hpp"

namespace preduce::syntax {

/// Program text tagged with its language and size in tokens. Comments and
/// whitespace are not tokens.
class SourceProgram {
 public:
  SourceProgram() = default;
  SourceProgram(std::string text, std::string language_id, std::size_t token_count)
      : text_(std::move(text)), language_id_(std::move(language_id)), token_count_(token_count) {}

  /// Lexes `text` to count its tokens. Throws LexError.
  static SourceProgram from_text(std::string text, const Grammar& grammar);

  [[nodiscard]] const std::string& text() const noexcept { return text_; }
  [[nodiscard]] const std::string& language_id() const noexcept { return language_id_; }
  [[nodiscard]] std::size_t token_count() const noexcept { return token_count_; }

  friend bool operator==(const SourceProgram&, const SourceProgram&) = default;

 private:
  std::string text_;
  std::string language_id_;
  std::size_t token_count_ = 0;
};

/// Number of tokens in `text` under `grammar`. Throws LexError.
std::size_t count_tokens(std::string_view text, const Grammar& grammar);

}  // namespace preduce::syntax
