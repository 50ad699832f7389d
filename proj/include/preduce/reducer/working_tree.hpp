#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "preduce/syntax/parse_tree.hpp"

namespace preduce::reducer {

/// A tentative change: drop the `deleted` nodes and/or substitute
/// `replace_with` for `replace_at`. Deleting a list element removes it from
/// its list; deleting an optional node empties it.
struct TreeEdit {
  std::vector<int> deleted;
  int replace_at = -1;
  int replace_with = -1;
};

/// Mutable copy of a parse tree used while reducing. Node ids stay those of
/// the source tree; removed nodes are marked dead.
class WorkingTree {
 public:
  explicit WorkingTree(const syntax::ParseTree& tree);

  [[nodiscard]] const syntax::Grammar& grammar() const noexcept { return *grammar_; }
  [[nodiscard]] int root() const noexcept { return root_; }
  [[nodiscard]] const syntax::Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  [[nodiscard]] bool alive(int id) const { return alive_[static_cast<std::size_t>(id)] != 0; }
  [[nodiscard]] int parent(int id) const { return parent_[static_cast<std::size_t>(id)]; }
  [[nodiscard]] int depth(int id) const;

  /// Leaf lexemes with `edit` applied tentatively.
  [[nodiscard]] std::vector<std::string> render(const TreeEdit& edit = {}) const;
  void apply(const TreeEdit& edit);

  /// Leaf counts of live nodes.
  [[nodiscard]] std::vector<std::size_t> weights() const;
  [[nodiscard]] std::vector<int> preorder() const;
  /// Live proper descendants of `id` that are rule nodes of the same rule.
  [[nodiscard]] std::vector<int> same_rule_descendants(int id) const;
  /// List elements and non-empty optional nodes.
  [[nodiscard]] bool deletable(int id) const;
  /// False if the edit would empty a `+` list.
  [[nodiscard]] bool keeps_plus_lists(const TreeEdit& edit) const;

 private:
  void kill_subtree(int id, int except);

  syntax::GrammarPtr grammar_;
  std::vector<syntax::Node> nodes_;
  std::vector<int> parent_;
  std::vector<char> alive_;
  int root_;
};

}  // namespace preduce::reducer
