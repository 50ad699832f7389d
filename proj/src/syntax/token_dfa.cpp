#include "preduce/syntax/token_dfa.hpp"

#include <algorithm>
#include <bitset>
#include <cctype>
#include <map>

#include "preduce/syntax/errors.hpp"

namespace preduce::syntax {
namespace {

using ByteSet = std::bitset<256>;

struct NfaState {
  std::vector<int> eps;
  ByteSet bytes;
  int next = -1;
  int accept = -1;
};

struct Fragment {
  int start;
  int end;
};

class NfaBuilder {
 public:
  int add_state() {
    states_.emplace_back();
    return static_cast<int>(states_.size()) - 1;
  }

  Fragment bytes(const ByteSet& set) {
    int s = add_state();
    int e = add_state();
    states_[s].bytes = set;
    states_[s].next = e;
    return {s, e};
  }

  Fragment epsilon() {
    int s = add_state();
    int e = add_state();
    states_[s].eps.push_back(e);
    return {s, e};
  }

  Fragment concat(Fragment a, Fragment b) {
    states_[a.end].eps.push_back(b.start);
    return {a.start, b.end};
  }

  Fragment alternate(Fragment a, Fragment b) {
    int s = add_state();
    int e = add_state();
    states_[s].eps = {a.start, b.start};
    states_[a.end].eps.push_back(e);
    states_[b.end].eps.push_back(e);
    return {s, e};
  }

  Fragment star(Fragment a) {
    int s = add_state();
    int e = add_state();
    states_[s].eps = {a.start, e};
    states_[a.end].eps.push_back(a.start);
    states_[a.end].eps.push_back(e);
    return {s, e};
  }

  Fragment plus(Fragment a) {
    int s = add_state();
    int e = add_state();
    states_[s].eps = {a.start};
    states_[a.end].eps.push_back(a.start);
    states_[a.end].eps.push_back(e);
    return {s, e};
  }

  Fragment optional(Fragment a) {
    int s = add_state();
    int e = add_state();
    states_[s].eps = {a.start, e};
    states_[a.end].eps.push_back(e);
    return {s, e};
  }

  std::vector<NfaState>& states() { return states_; }

 private:
  std::vector<NfaState> states_;
};

ByteSet single(unsigned char c) {
  ByteSet set;
  set.set(c);
  return set;
}

ByteSet range(unsigned char lo, unsigned char hi) {
  ByteSet set;
  for (int c = lo; c <= hi; ++c) set.set(static_cast<std::size_t>(c));
  return set;
}

ByteSet digit_class() { return range('0', '9'); }
ByteSet word_class() { return range('a', 'z') | range('A', 'Z') | digit_class() | single('_'); }
ByteSet space_class() {
  return single(' ') | single('\t') | single('\n') | single('\r') | single('\f') | single('\v');
}

class RegexParser {
 public:
  RegexParser(NfaBuilder& nfa, std::string_view pattern, int index)
      : nfa_(nfa), src_(pattern), index_(index) {}

  Fragment parse() {
    Fragment f = alternation();
    if (pos_ != src_.size()) fail("unexpected ')'");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw GrammarError("token pattern #" + std::to_string(index_) + " /" + std::string(src_) +
                       "/: " + what + " at position " + std::to_string(pos_));
  }

  bool at_end() const { return pos_ >= src_.size(); }
  char peek() const { return src_[pos_]; }

  Fragment alternation() {
    Fragment f = sequence();
    while (!at_end() && peek() == '|') {
      ++pos_;
      f = nfa_.alternate(f, sequence());
    }
    return f;
  }

  Fragment sequence() {
    std::optional<Fragment> f;
    while (!at_end() && peek() != '|' && peek() != ')') {
      Fragment next = repetition();
      f = f ? nfa_.concat(*f, next) : next;
    }
    return f ? *f : nfa_.epsilon();
  }

  Fragment repetition() {
    Fragment f = atom();
    while (!at_end()) {
      char c = peek();
      if (c == '*') {
        f = nfa_.star(f);
      } else if (c == '+') {
        f = nfa_.plus(f);
      } else if (c == '?') {
        f = nfa_.optional(f);
      } else {
        break;
      }
      ++pos_;
    }
    return f;
  }

  Fragment atom() {
    char c = peek();
    switch (c) {
      case '(': {
        ++pos_;
        Fragment f = alternation();
        if (at_end() || peek() != ')') fail("missing ')'");
        ++pos_;
        return f;
      }
      case '[':
        return nfa_.bytes(char_class());
      case '.':
        ++pos_;
        return nfa_.bytes(~single('\n'));
      case '\\':
        return nfa_.bytes(escape());
      case '*':
      case '+':
      case '?':
        fail("dangling quantifier");
      default:
        ++pos_;
        return nfa_.bytes(single(static_cast<unsigned char>(c)));
    }
  }

  // Consumes a backslash escape; returns the byte set it denotes.
  ByteSet escape() {
    ++pos_;
    if (at_end()) fail("trailing backslash");
    char c = src_[pos_++];
    switch (c) {
      case 'n': return single('\n');
      case 't': return single('\t');
      case 'r': return single('\r');
      case 'f': return single('\f');
      case 'v': return single('\v');
      case '0': return single('\0');
      case 'd': return digit_class();
      case 'D': return ~digit_class();
      case 'w': return word_class();
      case 'W': return ~word_class();
      case 's': return space_class();
      case 'S': return ~space_class();
      default:
        if (std::isalnum(static_cast<unsigned char>(c))) fail(std::string("unknown escape \\") + c);
        return single(static_cast<unsigned char>(c));
    }
  }

  ByteSet char_class() {
    ++pos_;  // '['
    bool negate = false;
    if (!at_end() && peek() == '^') {
      negate = true;
      ++pos_;
    }
    ByteSet set;
    bool first = true;
    while (true) {
      if (at_end()) fail("unterminated character class");
      char c = peek();
      if (c == ']' && !first) {
        ++pos_;
        break;
      }
      first = false;
      ByteSet lo_set;
      int lo = -1;
      if (c == '\\') {
        lo_set = escape();
        if (lo_set.count() == 1) {
          for (int b = 0; b < 256; ++b) {
            if (lo_set.test(static_cast<std::size_t>(b))) lo = b;
          }
        }
      } else {
        lo = static_cast<unsigned char>(c);
        lo_set = single(static_cast<unsigned char>(c));
        ++pos_;
      }
      if (lo >= 0 && pos_ + 1 < src_.size() && peek() == '-' && src_[pos_ + 1] != ']') {
        ++pos_;
        int hi;
        if (peek() == '\\') {
          ByteSet hi_set = escape();
          if (hi_set.count() != 1) fail("class escape used as range bound");
          hi = 0;
          for (int b = 0; b < 256; ++b) {
            if (hi_set.test(static_cast<std::size_t>(b))) hi = b;
          }
        } else {
          hi = static_cast<unsigned char>(peek());
          ++pos_;
        }
        if (hi < lo) fail("inverted range");
        set |= range(static_cast<unsigned char>(lo), static_cast<unsigned char>(hi));
      } else {
        set |= lo_set;
      }
    }
    return negate ? ~set : set;
  }

  NfaBuilder& nfa_;
  std::string_view src_;
  std::size_t pos_ = 0;
  int index_;
};

std::vector<int> closure(const std::vector<NfaState>& states, std::vector<int> seed) {
  std::vector<char> seen(states.size(), 0);
  std::vector<int> stack;
  for (int s : seed) {
    if (!seen[static_cast<std::size_t>(s)]) {
      seen[static_cast<std::size_t>(s)] = 1;
      stack.push_back(s);
    }
  }
  std::vector<int> out;
  while (!stack.empty()) {
    int s = stack.back();
    stack.pop_back();
    out.push_back(s);
    for (int t : states[static_cast<std::size_t>(s)].eps) {
      if (!seen[static_cast<std::size_t>(t)]) {
        seen[static_cast<std::size_t>(t)] = 1;
        stack.push_back(t);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TokenDfa::TokenDfa(std::span<const TokenPattern> patterns) {
  NfaBuilder nfa;
  int start = nfa.add_state();
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    const auto& p = patterns[i];
    Fragment f;
    if (p.literal) {
      if (p.pattern.empty()) throw GrammarError("empty literal token");
      f = nfa.bytes(single(static_cast<unsigned char>(p.pattern[0])));
      for (std::size_t k = 1; k < p.pattern.size(); ++k) {
        f = nfa.concat(f, nfa.bytes(single(static_cast<unsigned char>(p.pattern[k]))));
      }
    } else {
      f = RegexParser(nfa, p.pattern, static_cast<int>(i)).parse();
    }
    nfa.states()[static_cast<std::size_t>(f.end)].accept = static_cast<int>(i);
    nfa.states()[static_cast<std::size_t>(start)].eps.push_back(f.start);
  }

  const auto& states = nfa.states();
  std::map<std::vector<int>, int> index;
  std::vector<std::vector<int>> sets;
  auto intern = [&](std::vector<int> set) {
    auto [it, inserted] = index.emplace(set, static_cast<int>(sets.size()));
    if (inserted) {
      sets.push_back(std::move(set));
      next_.emplace_back();
      next_.back().fill(-1);
      int acc = -1;
      for (int s : sets.back()) {
        int a = states[static_cast<std::size_t>(s)].accept;
        if (a >= 0 && (acc < 0 || a < acc)) acc = a;
      }
      accept_.push_back(acc);
    }
    return it->second;
  };

  intern(closure(states, {start}));
  for (std::size_t d = 0; d < sets.size(); ++d) {
    // Group NFA successors by byte before taking closures.
    std::array<std::vector<int>, 256> moves;
    for (int s : sets[d]) {
      const auto& st = states[static_cast<std::size_t>(s)];
      if (st.next < 0) continue;
      for (std::size_t c = 0; c < 256; ++c) {
        if (st.bytes.test(c)) moves[c].push_back(st.next);
      }
    }
    for (std::size_t c = 0; c < 256; ++c) {
      if (moves[c].empty()) continue;
      int target = intern(closure(states, std::move(moves[c])));
      next_[d][c] = target;
    }
  }
}

std::optional<TokenDfa::Match> TokenDfa::longest_match(std::string_view text, std::size_t pos) const {
  std::optional<Match> best;
  std::int32_t state = 0;
  for (std::size_t i = pos; i < text.size(); ++i) {
    state = next_[static_cast<std::size_t>(state)][static_cast<unsigned char>(text[i])];
    if (state < 0) break;
    std::int32_t acc = accept_[static_cast<std::size_t>(state)];
    if (acc >= 0) best = Match{i - pos + 1, acc};
  }
  return best;
}

}  // namespace preduce::syntax
