#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace preduce::syntax {

/// No lexer rule matches at `offset`.
class LexError : public std::runtime_error {
 public:
  explicit LexError(std::size_t offset)
      : std::runtime_error("no token matches at offset " + std::to_string(offset)),
        offset_(offset) {}

  [[nodiscard]] std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Token stream is not derivable from the start rule. `offset` is the byte
/// offset of the farthest token the parser could not consume (or the input
/// length at end of input); `expected` lists the token kinds tried there.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, std::vector<std::string> expected);

  [[nodiscard]] std::size_t offset() const noexcept { return offset_; }
  [[nodiscard]] const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

/// Malformed grammar definition or token pattern.
class GrammarError : public std::runtime_error {
 public:
  GrammarError(const std::string& message, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}

  [[nodiscard]] int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace preduce::syntax
