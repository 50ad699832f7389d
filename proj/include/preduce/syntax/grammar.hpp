#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "preduce/syntax/token_dfa.hpp"

namespace preduce::syntax {

struct Token {
  int kind = -1;
  std::string text;
  std::size_t offset = 0;
};

/// Unresolved EBNF as written in a grammar definition.
struct RuleAst {
  enum class Kind { literal, name, sequence, choice, star, plus, optional };
  Kind kind = Kind::sequence;
  std::string text;  ///< literal bytes or referenced name
  std::vector<RuleAst> items;
  int line = 0;
};

struct LexerRuleDef {
  std::string name;
  std::string pattern;
  bool literal = false;
  bool skip = false;
  int line = 0;
};

struct ParserRuleDef {
  std::string name;
  RuleAst body;
  int line = 0;
};

struct GrammarDefinition {
  std::string language_id;
  std::vector<LexerRuleDef> lexer_rules;   ///< file order = priority
  std::vector<ParserRuleDef> parser_rules;  ///< first rule is the start rule
};

/// Compiled parser expression. `ref` is a token kind for `token`, a rule
/// index for `rule`; `items` are child expression ids.
struct Expr {
  enum class Kind { token, rule, sequence, choice, star, plus, optional };
  Kind kind = Kind::sequence;
  int ref = -1;
  std::vector<int> items;
};

struct TokenKindInfo {
  std::string name;  ///< rule name, or the quoted literal (e.g. `'for'`)
  std::string pattern;
  bool literal = false;
  bool skip = false;
};

/**
 * A validated, compiled grammar: lexer automaton plus EBNF productions.
 *
 * Token kinds are ordered by lexing priority: literals that appear quoted
 * in parser rules first (in order of first use), then named lexer rules in
 * definition order. A quoted literal that is also spelled out by a named
 * literal lexer rule shares that rule's kind.
 *
 * Construction rejects undefined references, skip tokens used in parser
 * rules, left recursion, and repetition of nullable expressions.
 */
class Grammar {
 public:
  explicit Grammar(GrammarDefinition def);

  [[nodiscard]] const std::string& language_id() const noexcept { return language_id_; }

  /// Maximal-munch tokenization with skip tokens dropped. Throws LexError.
  [[nodiscard]] std::vector<Token> lex(std::string_view text) const;

  [[nodiscard]] std::size_t token_kind_count() const noexcept { return kinds_.size(); }
  [[nodiscard]] const TokenKindInfo& token_kind(int kind) const { return kinds_.at(static_cast<std::size_t>(kind)); }
  [[nodiscard]] std::optional<int> find_token_kind(std::string_view name) const;

  [[nodiscard]] std::size_t rule_count() const noexcept { return rule_names_.size(); }
  [[nodiscard]] const std::string& rule_name(int rule) const { return rule_names_.at(static_cast<std::size_t>(rule)); }
  [[nodiscard]] std::optional<int> find_rule(std::string_view name) const;
  [[nodiscard]] int rule_body(int rule) const { return rule_bodies_.at(static_cast<std::size_t>(rule)); }
  [[nodiscard]] int start_rule() const noexcept { return 0; }

  [[nodiscard]] const Expr& expr(int id) const { return exprs_[static_cast<std::size_t>(id)]; }
  [[nodiscard]] std::size_t expr_count() const noexcept { return exprs_.size(); }
  [[nodiscard]] bool nullable(int id) const { return nullable_[static_cast<std::size_t>(id)] != 0; }
  [[nodiscard]] bool in_first(int id, int kind) const {
    return first_[static_cast<std::size_t>(id) * kinds_.size() + static_cast<std::size_t>(kind)] != 0;
  }
  [[nodiscard]] std::vector<int> first_kinds(int id) const;

  /// Literal token texts in kind order; useful for enumerating vocabularies.
  [[nodiscard]] std::vector<std::string> literal_texts() const;

 private:
  void compute_nullable_and_first();
  void check_left_recursion() const;
  void check_repetitions() const;

  std::string language_id_;
  std::vector<TokenKindInfo> kinds_;
  std::vector<std::string> rule_names_;
  std::vector<int> rule_bodies_;
  std::vector<int> rule_lines_;
  std::vector<Expr> exprs_;
  std::vector<char> nullable_;
  std::vector<char> first_;
  std::unique_ptr<TokenDfa> dfa_;
};

using GrammarPtr = std::shared_ptr<const Grammar>;

}  // namespace preduce::syntax
