#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "preduce/syntax/grammar.hpp"

namespace preduce::syntax {

enum class NodeKind : unsigned char {
  rule,      ///< parser rule; `symbol` is the rule index
  token,     ///< leaf; `symbol` is the token kind
  star,      ///< `x*` list; children are the repetitions
  plus,      ///< `x+` list; at least one child
  optional,  ///< `x?`; zero or more children (the optional content)
  group,     ///< one repetition of a multi-node list item
};

struct Node {
  NodeKind kind = NodeKind::rule;
  int symbol = -1;
  std::vector<int> children;
  std::string lexeme;
};

/**
 * Concrete syntax tree over an arena of nodes. Quantified grammar positions
 * are explicit (`star`, `plus`, `optional` nodes), which is what lets the
 * reducers delete list elements and optional parts without leaving the
 * language.
 */
class ParseTree {
 public:
  ParseTree(GrammarPtr grammar, std::vector<Node> nodes, int root);

  [[nodiscard]] const Grammar& grammar() const noexcept { return *grammar_; }
  [[nodiscard]] const GrammarPtr& grammar_ptr() const noexcept { return grammar_; }
  [[nodiscard]] int root() const noexcept { return root_; }
  [[nodiscard]] const Node& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  [[nodiscard]] std::size_t node_count() const noexcept { return nodes_.size(); }
  [[nodiscard]] const std::vector<Node>& nodes() const noexcept { return nodes_; }

  /// Leaf lexemes reachable from the root, left to right.
  [[nodiscard]] std::vector<std::string_view> leaves() const;
  [[nodiscard]] std::size_t token_count() const { return leaves().size(); }
  [[nodiscard]] std::string serialize() const;

  /// Node ids in document (pre-)order.
  [[nodiscard]] std::vector<int> preorder() const;
  /// Leaf counts per node id (unreachable nodes are 0).
  [[nodiscard]] std::vector<std::size_t> weights() const;
  /// Name of the node's label: rule name, token kind name, or `*`/`+`/`?`/`()`.
  [[nodiscard]] std::string label(int id) const;
  /// Ids of reachable rule nodes named `rule`, document order.
  [[nodiscard]] std::vector<int> find_rule_nodes(std::string_view rule) const;

  void dump(std::ostream& os) const;

 private:
  GrammarPtr grammar_;
  std::vector<Node> nodes_;
  int root_;
};

/**
 * Canonical rendering of a token sequence: single spaces between tokens,
 * a newline after `;` and `}`, and newlines around tokens starting with
 * `#` (preprocessor lines must stand alone).
 */
std::string join_tokens(std::span<const std::string_view> lexemes);
std::string join_tokens(std::span<const std::string> lexemes);

}  // namespace preduce::syntax
