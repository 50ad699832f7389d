#include "preduce/reducer/working_tree.hpp"

#include <algorithm>
#include <stdexcept>

namespace preduce::reducer {

using syntax::NodeKind;

WorkingTree::WorkingTree(const syntax::ParseTree& tree)
    : grammar_(tree.grammar_ptr()),
      nodes_(tree.nodes()),
      parent_(tree.node_count(), -1),
      alive_(tree.node_count(), 0),
      root_(tree.root()) {
  for (int id : tree.preorder()) {
    alive_[static_cast<std::size_t>(id)] = 1;
    for (int c : nodes_[static_cast<std::size_t>(id)].children) parent_[static_cast<std::size_t>(c)] = id;
  }
}

int WorkingTree::depth(int id) const {
  int d = 0;
  for (int p = parent(id); p >= 0; p = parent(p)) ++d;
  return d;
}

std::vector<std::string> WorkingTree::render(const TreeEdit& edit) const {
  std::vector<char> skip(nodes_.size(), 0);
  for (int id : edit.deleted) skip[static_cast<std::size_t>(id)] = 1;
  std::vector<std::string> out;
  std::vector<int> stack{root_ == edit.replace_at ? edit.replace_with : root_};
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    if (skip[static_cast<std::size_t>(id)]) continue;
    const auto& n = nodes_[static_cast<std::size_t>(id)];
    if (n.kind == NodeKind::token) {
      out.push_back(n.lexeme);
      continue;
    }
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) {
      stack.push_back(*it == edit.replace_at ? edit.replace_with : *it);
    }
  }
  return out;
}

void WorkingTree::kill_subtree(int id, int except) {
  std::vector<int> stack{id};
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    if (n == except) continue;
    alive_[static_cast<std::size_t>(n)] = 0;
    for (int c : nodes_[static_cast<std::size_t>(n)].children) stack.push_back(c);
  }
}

void WorkingTree::apply(const TreeEdit& edit) {
  for (int id : edit.deleted) {
    if (!deletable(id)) throw std::logic_error("deleting a node outside a list/optional position");
    if (node(id).kind == NodeKind::optional) {
      for (int c : node(id).children) kill_subtree(c, -1);
      nodes_[static_cast<std::size_t>(id)].children.clear();
      continue;
    }
    int p = parent(id);
    auto& siblings = nodes_[static_cast<std::size_t>(p)].children;
    siblings.erase(std::remove(siblings.begin(), siblings.end(), id), siblings.end());
    kill_subtree(id, -1);
  }
  if (edit.replace_at >= 0) {
    int at = edit.replace_at;
    int with = edit.replace_with;
    int p = parent(at);
    kill_subtree(at, with);
    if (p < 0) {
      root_ = with;
    } else {
      auto& siblings = nodes_[static_cast<std::size_t>(p)].children;
      std::replace(siblings.begin(), siblings.end(), at, with);
    }
    parent_[static_cast<std::size_t>(with)] = p;
  }
}

std::vector<int> WorkingTree::preorder() const {
  std::vector<int> out;
  std::vector<int> stack{root_};
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    out.push_back(id);
    const auto& n = nodes_[static_cast<std::size_t>(id)];
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::vector<std::size_t> WorkingTree::weights() const {
  std::vector<std::size_t> w(nodes_.size(), 0);
  auto order = preorder();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto& n = nodes_[static_cast<std::size_t>(*it)];
    if (n.kind == NodeKind::token) {
      w[static_cast<std::size_t>(*it)] = 1;
      continue;
    }
    std::size_t sum = 0;
    for (int c : n.children) sum += w[static_cast<std::size_t>(c)];
    w[static_cast<std::size_t>(*it)] = sum;
  }
  return w;
}

std::vector<int> WorkingTree::same_rule_descendants(int id) const {
  std::vector<int> out;
  const auto& top = node(id);
  if (top.kind != NodeKind::rule) return out;
  std::vector<int> stack(top.children.rbegin(), top.children.rend());
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    const auto& nd = node(n);
    if (nd.kind == NodeKind::rule && nd.symbol == top.symbol) out.push_back(n);
    for (auto it = nd.children.rbegin(); it != nd.children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

bool WorkingTree::deletable(int id) const {
  if (!alive(id)) return false;
  if (node(id).kind == NodeKind::optional) return !node(id).children.empty();
  int p = parent(id);
  if (p < 0) return false;
  auto kind = node(p).kind;
  return kind == NodeKind::star || kind == NodeKind::plus;
}

bool WorkingTree::keeps_plus_lists(const TreeEdit& edit) const {
  std::vector<int> lists;
  for (int id : edit.deleted) {
    int p = parent(id);
    if (p >= 0 && node(p).kind == NodeKind::plus) lists.push_back(p);
  }
  std::sort(lists.begin(), lists.end());
  lists.erase(std::unique(lists.begin(), lists.end()), lists.end());
  for (int p : lists) {
    bool any_left = false;
    for (int c : node(p).children) {
      if (std::find(edit.deleted.begin(), edit.deleted.end(), c) == edit.deleted.end()) {
        any_left = true;
        break;
      }
    }
    if (!any_left) return false;
  }
  return true;
}

}  // namespace preduce::reducer
