#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace preduce::syntax {

struct TokenPattern {
  std::string pattern;
  bool literal = false;  ///< match `pattern` byte-for-byte instead of as a regex
};

/**
 * Deterministic automaton over the union of a list of token patterns.
 *
 * Regex syntax: concatenation, `|`, `*`, `+`, `?`, grouping with `()`,
 * `.` (any byte except newline), character classes `[a-z_]` / `[^...]`,
 * and escapes `\n \t \r \f \v \0 \d \w \s` plus `\<punct>`.
 *
 * Matching is maximal munch; among patterns accepting the same longest
 * prefix the one with the lowest index wins. Empty matches are never
 * reported.
 */
class TokenDfa {
 public:
  struct Match {
    std::size_t length;
    int pattern;
  };

  explicit TokenDfa(std::span<const TokenPattern> patterns);

  [[nodiscard]] std::optional<Match> longest_match(std::string_view text, std::size_t pos) const;
  [[nodiscard]] std::size_t state_count() const noexcept { return accept_.size(); }

 private:
  std::vector<std::array<std::int32_t, 256>> next_;
  std::vector<std::int32_t> accept_;
};

}  // namespace preduce::syntax
