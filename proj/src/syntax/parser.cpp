#include "preduce/syntax/parser.hpp"

#include <algorithm>
#include <cstdint>
#include <set>
#include <unordered_map>

#include "preduce/syntax/errors.hpp"

namespace preduce::syntax {
namespace {

using Ends = std::vector<int>;

void merge_into(Ends& into, const Ends& from) {
  if (from.empty()) return;
  Ends merged;
  merged.reserve(into.size() + from.size());
  std::set_union(into.begin(), into.end(), from.begin(), from.end(), std::back_inserter(merged));
  into.swap(merged);
}

bool contains(const Ends& ends, int pos) { return std::binary_search(ends.begin(), ends.end(), pos); }

class Chart {
 public:
  Chart(const Grammar& g, std::span<const Token> tokens)
      : g_(g), toks_(tokens), n_(static_cast<int>(tokens.size())) {}

  const Ends& ends(int id, int pos) {
    const Expr& e = g_.expr(id);
    if (!g_.nullable(id)) {
      if (pos >= n_ || !g_.in_first(id, toks_[static_cast<std::size_t>(pos)].kind)) {
        note_failure(id, pos);
        return empty_;
      }
    }
    if (e.kind == Expr::Kind::token) {
      // Non-nullable and FIRST matched above.
      return single(pos + 1);
    }
    std::uint64_t key = static_cast<std::uint64_t>(id) * static_cast<std::uint64_t>(n_ + 1) +
                        static_cast<std::uint64_t>(pos);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Ends result = compute(e, pos);
    return memo_.emplace(key, std::move(result)).first->second;
  }

  int farthest() const { return farthest_; }
  const std::set<int>& expected() const { return expected_; }
  int size() const { return n_; }

  // Tree construction for an (expr, start, end) triple already known to be
  // derivable.
  void build(int id, int start, int end, std::vector<Node>& nodes, std::vector<int>& out) {
    const Expr& e = g_.expr(id);
    switch (e.kind) {
      case Expr::Kind::token: {
        Node leaf;
        leaf.kind = NodeKind::token;
        leaf.symbol = e.ref;
        leaf.lexeme = toks_[static_cast<std::size_t>(start)].text;
        nodes.push_back(std::move(leaf));
        out.push_back(static_cast<int>(nodes.size()) - 1);
        return;
      }
      case Expr::Kind::rule: {
        std::vector<int> children;
        build(g_.rule_body(e.ref), start, end, nodes, children);
        Node n;
        n.kind = NodeKind::rule;
        n.symbol = e.ref;
        n.children = std::move(children);
        nodes.push_back(std::move(n));
        out.push_back(static_cast<int>(nodes.size()) - 1);
        return;
      }
      case Expr::Kind::choice:
        for (int alt : e.items) {
          if (contains(ends(alt, start), end)) {
            build(alt, start, end, nodes, out);
            return;
          }
        }
        break;
      case Expr::Kind::sequence:
        build_sequence(e.items, start, end, nodes, out);
        return;
      case Expr::Kind::optional: {
        Node n;
        n.kind = NodeKind::optional;
        std::vector<int> children;
        if (start != end && contains(ends(e.items[0], start), end)) {
          build(e.items[0], start, end, nodes, children);
        }
        n.children = std::move(children);
        nodes.push_back(std::move(n));
        out.push_back(static_cast<int>(nodes.size()) - 1);
        return;
      }
      case Expr::Kind::star:
      case Expr::Kind::plus: {
        auto cuts = list_cuts(e.items[0], start, end);
        Node n;
        n.kind = e.kind == Expr::Kind::star ? NodeKind::star : NodeKind::plus;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
          std::vector<int> item;
          build(e.items[0], cuts[i], cuts[i + 1], nodes, item);
          if (item.size() == 1) {
            n.children.push_back(item[0]);
          } else {
            Node grp;
            grp.kind = NodeKind::group;
            grp.children = std::move(item);
            nodes.push_back(std::move(grp));
            n.children.push_back(static_cast<int>(nodes.size()) - 1);
          }
        }
        nodes.push_back(std::move(n));
        out.push_back(static_cast<int>(nodes.size()) - 1);
        return;
      }
    }
    throw std::logic_error("parse tree construction lost its derivation");
  }

 private:
  const Ends& single(int pos) {
    auto it = singles_.find(pos);
    if (it == singles_.end()) it = singles_.emplace(pos, Ends{pos}).first;
    return it->second;
  }

  void note_failure(int id, int pos) {
    if (pos < farthest_) return;
    if (pos > farthest_) {
      farthest_ = pos;
      expected_.clear();
    }
    for (int k : g_.first_kinds(id)) expected_.insert(k);
  }

  Ends compute(const Expr& e, int pos) {
    switch (e.kind) {
      case Expr::Kind::token:
        break;
      case Expr::Kind::rule:
        return ends(g_.rule_body(e.ref), pos);
      case Expr::Kind::sequence: {
        Ends cur{pos};
        for (int item : e.items) {
          Ends next;
          for (int q : cur) merge_into(next, ends(item, q));
          cur.swap(next);
          if (cur.empty()) break;
        }
        return cur;
      }
      case Expr::Kind::choice: {
        Ends out;
        for (int alt : e.items) merge_into(out, ends(alt, pos));
        return out;
      }
      case Expr::Kind::optional: {
        Ends out{pos};
        merge_into(out, ends(e.items[0], pos));
        return out;
      }
      case Expr::Kind::star:
      case Expr::Kind::plus: {
        std::set<int> frontier;
        std::set<int> seen;
        Ends out;
        if (e.kind == Expr::Kind::star) {
          frontier.insert(pos);
        } else {
          for (int q : ends(e.items[0], pos)) frontier.insert(q);
        }
        seen = frontier;
        while (!frontier.empty()) {
          int q = *frontier.begin();
          frontier.erase(frontier.begin());
          out.push_back(q);
          for (int r : ends(e.items[0], q)) {
            if (r > q && seen.insert(r).second) frontier.insert(r);
          }
        }
        std::sort(out.begin(), out.end());
        return out;
      }
    }
    return {};
  }

  // Boundaries start = c0 < c1 < ... < ck = end of a repetition sequence
  // with the fewest items among shortest-first predecessor choices.
  std::vector<int> list_cuts(int item, int start, int end) {
    std::vector<int> cuts;
    if (start == end) {
      cuts.push_back(start);
      return cuts;
    }
    std::vector<int> pred(static_cast<std::size_t>(end - start + 1), -1);
    std::vector<char> reached(pred.size(), 0);
    reached[0] = 1;
    for (int q = start; q < end; ++q) {
      if (!reached[static_cast<std::size_t>(q - start)]) continue;
      for (int r : ends(item, q)) {
        if (r <= q || r > end) continue;
        auto slot = static_cast<std::size_t>(r - start);
        if (!reached[slot]) {
          reached[slot] = 1;
          pred[slot] = q;
        }
      }
    }
    for (int p = end; p != start; p = pred[static_cast<std::size_t>(p - start)]) {
      if (pred[static_cast<std::size_t>(p - start)] < 0) throw std::logic_error("list derivation lost");
      cuts.push_back(p);
    }
    cuts.push_back(start);
    std::reverse(cuts.begin(), cuts.end());
    return cuts;
  }

  void build_sequence(const std::vector<int>& items, int start, int end, std::vector<Node>& nodes,
                      std::vector<int>& out) {
    // layers[i] maps each position reachable after i items to the largest
    // predecessor position in layer i-1.
    std::vector<std::unordered_map<int, int>> layers(items.size() + 1);
    layers[0].emplace(start, -1);
    for (std::size_t i = 0; i < items.size(); ++i) {
      Ends prev;
      for (const auto& [p, _] : layers[i]) prev.push_back(p);
      std::sort(prev.begin(), prev.end());
      for (int q : prev) {
        for (int r : ends(items[i], q)) {
          if (r > end) continue;
          auto [it, inserted] = layers[i + 1].emplace(r, q);
          if (!inserted && q > it->second) it->second = q;
        }
      }
    }
    std::vector<int> cuts(items.size() + 1);
    cuts[items.size()] = end;
    for (std::size_t i = items.size(); i > 0; --i) {
      auto it = layers[i].find(cuts[i]);
      if (it == layers[i].end()) throw std::logic_error("sequence derivation lost");
      cuts[i - 1] = it->second;
    }
    for (std::size_t i = 0; i < items.size(); ++i) build(items[i], cuts[i], cuts[i + 1], nodes, out);
  }

  const Grammar& g_;
  std::span<const Token> toks_;
  int n_;
  std::unordered_map<std::uint64_t, Ends> memo_;
  std::unordered_map<int, Ends> singles_;
  Ends empty_;
  int farthest_ = -1;
  std::set<int> expected_;
};

}  // namespace

ParseTree parse_tokens(std::span<const Token> tokens, const GrammarPtr& grammar, std::size_t text_length) {
  const Grammar& g = *grammar;
  Chart chart(g, tokens);
  int body = g.rule_body(g.start_rule());
  const int n = chart.size();
  if (!contains(chart.ends(body, 0), n)) {
    int at = std::max(chart.farthest(), 0);
    std::size_t offset = at < n ? tokens[static_cast<std::size_t>(at)].offset : text_length;
    std::vector<std::string> expected;
    for (int k : chart.expected()) expected.push_back(g.token_kind(k).name);
    throw ParseError(offset, std::move(expected));
  }
  std::vector<Node> nodes;
  std::vector<int> children;
  chart.build(body, 0, n, nodes, children);
  Node root;
  root.kind = NodeKind::rule;
  root.symbol = g.start_rule();
  root.children = std::move(children);
  nodes.push_back(std::move(root));
  int root_id = static_cast<int>(nodes.size()) - 1;
  return ParseTree(grammar, std::move(nodes), root_id);
}

ParseTree parse(std::string_view text, const GrammarPtr& grammar) {
  auto tokens = grammar->lex(text);
  return parse_tokens(tokens, grammar, text.size());
}

bool parses(std::string_view text, const Grammar& grammar) {
  try {
    auto tokens = grammar.lex(text);
    Chart chart(grammar, tokens);
    return contains(chart.ends(grammar.rule_body(grammar.start_rule()), 0), chart.size());
  } catch (const LexError&) {
    return false;
  }
}

}  // namespace preduce::syntax
