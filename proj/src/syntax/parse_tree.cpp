#include "preduce/syntax/parse_tree.hpp"

#include <functional>

namespace preduce::syntax {

ParseTree::ParseTree(GrammarPtr grammar, std::vector<Node> nodes, int root)
    : grammar_(std::move(grammar)), nodes_(std::move(nodes)), root_(root) {}

std::vector<std::string_view> ParseTree::leaves() const {
  std::vector<std::string_view> out;
  std::vector<int> stack{root_};
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.kind == NodeKind::token) {
      out.push_back(n.lexeme);
      continue;
    }
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::string ParseTree::serialize() const {
  auto lx = leaves();
  return join_tokens(lx);
}

std::vector<int> ParseTree::preorder() const {
  std::vector<int> out;
  std::vector<int> stack{root_};
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    out.push_back(id);
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::vector<std::size_t> ParseTree::weights() const {
  std::vector<std::size_t> w(nodes_.size(), 0);
  auto order = preorder();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const Node& n = nodes_[static_cast<std::size_t>(*it)];
    if (n.kind == NodeKind::token) {
      w[static_cast<std::size_t>(*it)] = 1;
    } else {
      std::size_t sum = 0;
      for (int c : n.children) sum += w[static_cast<std::size_t>(c)];
      w[static_cast<std::size_t>(*it)] = sum;
    }
  }
  return w;
}

std::string ParseTree::label(int id) const {
  const Node& n = node(id);
  switch (n.kind) {
    case NodeKind::rule: return grammar_->rule_name(n.symbol);
    case NodeKind::token: return grammar_->token_kind(n.symbol).name;
    case NodeKind::star: return "*";
    case NodeKind::plus: return "+";
    case NodeKind::optional: return "?";
    case NodeKind::group: return "()";
  }
  return {};
}

std::vector<int> ParseTree::find_rule_nodes(std::string_view rule) const {
  std::vector<int> out;
  auto r = grammar_->find_rule(rule);
  if (!r) return out;
  for (int id : preorder()) {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.kind == NodeKind::rule && n.symbol == *r) out.push_back(id);
  }
  return out;
}

void ParseTree::dump(std::ostream& os) const {
  std::function<void(int, int)> rec = [&](int id, int depth) {
    const Node& n = node(id);
    os << std::string(static_cast<std::size_t>(depth) * 2, ' ') << label(id);
    if (n.kind == NodeKind::token) os << " \"" << n.lexeme << '"';
    os << '\n';
    for (int c : n.children) rec(c, depth + 1);
  };
  rec(root_, 0);
}

namespace {

template <class Range>
std::string join_impl(const Range& lexemes) {
  std::string out;
  bool first = true;
  std::string_view prev;
  for (const auto& item : lexemes) {
    std::string_view lx(item);
    if (!first) {
      bool newline = prev == ";" || prev == "}" || (!prev.empty() && prev[0] == '#') ||
                     (!lx.empty() && lx[0] == '#');
      out += newline ? '\n' : ' ';
    }
    out += lx;
    prev = lx;
    first = false;
  }
  return out;
}

}  // namespace

std::string join_tokens(std::span<const std::string_view> lexemes) { return join_impl(lexemes); }
std::string join_tokens(std::span<const std::string> lexemes) { return join_impl(lexemes); }

}  // namespace preduce::syntax
