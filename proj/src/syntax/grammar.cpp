#include "preduce/syntax/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>

#include "preduce/syntax/errors.hpp"

namespace preduce::syntax {
namespace {

bool is_token_name(std::string_view name) {
  return !name.empty() && std::isupper(static_cast<unsigned char>(name[0]));
}

void collect_literals(const RuleAst& ast, std::vector<std::string>& out) {
  if (ast.kind == RuleAst::Kind::literal) {
    if (std::find(out.begin(), out.end(), ast.text) == out.end()) out.push_back(ast.text);
    return;
  }
  for (const auto& item : ast.items) collect_literals(item, out);
}

}  // namespace

ParseError::ParseError(std::size_t offset, std::vector<std::string> expected)
    : std::runtime_error([&] {
        std::string msg = "syntax error at offset " + std::to_string(offset);
        if (!expected.empty()) {
          msg += ", expected one of:";
          for (const auto& e : expected) msg += " " + e;
        }
        return msg;
      }()),
      offset_(offset),
      expected_(std::move(expected)) {}

Grammar::Grammar(GrammarDefinition def) : language_id_(std::move(def.language_id)) {
  if (def.parser_rules.empty()) throw GrammarError("grammar defines no parser rules");

  std::map<std::string, int> named_literal;
  std::set<std::string> lexer_names;
  for (const auto& rule : def.lexer_rules) {
    if (!is_token_name(rule.name)) {
      throw GrammarError("lexer rule '" + rule.name + "' must start with an uppercase letter", rule.line);
    }
    if (!lexer_names.insert(rule.name).second) {
      throw GrammarError("duplicate lexer rule '" + rule.name + "'", rule.line);
    }
  }

  std::vector<std::string> implicit;
  for (const auto& rule : def.parser_rules) collect_literals(rule.body, implicit);

  std::map<std::string, int> literal_kind;
  for (const auto& text : implicit) {
    bool spelled = std::any_of(def.lexer_rules.begin(), def.lexer_rules.end(),
                               [&](const LexerRuleDef& r) { return r.literal && r.pattern == text; });
    if (spelled) continue;
    literal_kind[text] = static_cast<int>(kinds_.size());
    kinds_.push_back({"'" + text + "'", text, true, false});
  }
  std::map<std::string, int> token_by_name;
  for (const auto& rule : def.lexer_rules) {
    int kind = static_cast<int>(kinds_.size());
    token_by_name[rule.name] = kind;
    if (rule.literal && !rule.skip && !literal_kind.count(rule.pattern)) literal_kind[rule.pattern] = kind;
    kinds_.push_back({rule.name, rule.pattern, rule.literal, rule.skip});
  }

  for (const auto& rule : def.parser_rules) {
    if (is_token_name(rule.name)) {
      throw GrammarError("parser rule '" + rule.name + "' must not start with an uppercase letter", rule.line);
    }
    if (std::find(rule_names_.begin(), rule_names_.end(), rule.name) != rule_names_.end()) {
      throw GrammarError("duplicate parser rule '" + rule.name + "'", rule.line);
    }
    rule_names_.push_back(rule.name);
    rule_lines_.push_back(rule.line);
  }

  // Compile bodies. Reference resolution happens inside compile().
  std::function<int(const RuleAst&)> build = [&](const RuleAst& ast) -> int {
    Expr e;
    switch (ast.kind) {
      case RuleAst::Kind::literal:
        e.kind = Expr::Kind::token;
        e.ref = literal_kind.at(ast.text);
        break;
      case RuleAst::Kind::name:
        if (is_token_name(ast.text)) {
          auto it = token_by_name.find(ast.text);
          if (it == token_by_name.end()) {
            throw GrammarError("reference to undefined token '" + ast.text + "'", ast.line);
          }
          if (kinds_[static_cast<std::size_t>(it->second)].skip) {
            throw GrammarError("parser rule references skipped token '" + ast.text + "'", ast.line);
          }
          e.kind = Expr::Kind::token;
          e.ref = it->second;
        } else {
          auto rit = std::find(rule_names_.begin(), rule_names_.end(), ast.text);
          if (rit == rule_names_.end()) {
            throw GrammarError("reference to undefined rule '" + ast.text + "'", ast.line);
          }
          e.kind = Expr::Kind::rule;
          e.ref = static_cast<int>(rit - rule_names_.begin());
        }
        break;
      case RuleAst::Kind::sequence:
      case RuleAst::Kind::choice:
        if (ast.items.size() == 1) return build(ast.items[0]);
        e.kind = ast.kind == RuleAst::Kind::sequence ? Expr::Kind::sequence : Expr::Kind::choice;
        for (const auto& item : ast.items) e.items.push_back(build(item));
        break;
      case RuleAst::Kind::star:
      case RuleAst::Kind::plus:
      case RuleAst::Kind::optional:
        e.kind = ast.kind == RuleAst::Kind::star   ? Expr::Kind::star
                 : ast.kind == RuleAst::Kind::plus ? Expr::Kind::plus
                                                   : Expr::Kind::optional;
        e.items.push_back(build(ast.items.at(0)));
        break;
    }
    exprs_.push_back(std::move(e));
    return static_cast<int>(exprs_.size()) - 1;
  };
  for (const auto& rule : def.parser_rules) rule_bodies_.push_back(build(rule.body));

  compute_nullable_and_first();
  check_left_recursion();
  check_repetitions();

  std::vector<TokenPattern> patterns;
  patterns.reserve(kinds_.size());
  for (const auto& k : kinds_) patterns.push_back({k.pattern, k.literal});
  dfa_ = std::make_unique<TokenDfa>(patterns);
}

void Grammar::compute_nullable_and_first() {
  const std::size_t nk = kinds_.size();
  nullable_.assign(exprs_.size(), 0);
  first_.assign(exprs_.size() * nk, 0);
  auto merge_first = [&](std::size_t into, std::size_t from) {
    bool changed = false;
    for (std::size_t k = 0; k < nk; ++k) {
      if (first_[from * nk + k] && !first_[into * nk + k]) {
        first_[into * nk + k] = 1;
        changed = true;
      }
    }
    return changed;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < exprs_.size(); ++i) {
      const Expr& e = exprs_[i];
      char null = 0;
      switch (e.kind) {
        case Expr::Kind::token:
          if (!first_[i * nk + static_cast<std::size_t>(e.ref)]) {
            first_[i * nk + static_cast<std::size_t>(e.ref)] = 1;
            changed = true;
          }
          break;
        case Expr::Kind::rule: {
          auto body = static_cast<std::size_t>(rule_bodies_[static_cast<std::size_t>(e.ref)]);
          null = nullable_[body];
          changed |= merge_first(i, body);
          break;
        }
        case Expr::Kind::sequence:
          null = 1;
          for (int item : e.items) {
            changed |= merge_first(i, static_cast<std::size_t>(item));
            if (!nullable_[static_cast<std::size_t>(item)]) {
              null = 0;
              break;
            }
          }
          break;
        case Expr::Kind::choice:
          for (int item : e.items) {
            changed |= merge_first(i, static_cast<std::size_t>(item));
            null |= nullable_[static_cast<std::size_t>(item)];
          }
          break;
        case Expr::Kind::star:
        case Expr::Kind::optional:
          null = 1;
          changed |= merge_first(i, static_cast<std::size_t>(e.items[0]));
          break;
        case Expr::Kind::plus:
          null = nullable_[static_cast<std::size_t>(e.items[0])];
          changed |= merge_first(i, static_cast<std::size_t>(e.items[0]));
          break;
      }
      if (null && !nullable_[i]) {
        nullable_[i] = 1;
        changed = true;
      }
    }
  }
}

void Grammar::check_left_recursion() const {
  // left_calls[r] = rules that can be entered from r without consuming a token.
  std::vector<std::set<int>> left_calls(rule_names_.size());
  std::function<void(int, std::set<int>&)> collect = [&](int id, std::set<int>& out) {
    const Expr& e = exprs_[static_cast<std::size_t>(id)];
    switch (e.kind) {
      case Expr::Kind::token:
        break;
      case Expr::Kind::rule:
        out.insert(e.ref);
        break;
      case Expr::Kind::sequence:
        for (int item : e.items) {
          collect(item, out);
          if (!nullable(item)) break;
        }
        break;
      case Expr::Kind::choice:
        for (int item : e.items) collect(item, out);
        break;
      default:
        collect(e.items[0], out);
        break;
    }
  };
  for (std::size_t r = 0; r < rule_names_.size(); ++r) collect(rule_bodies_[r], left_calls[r]);

  std::vector<int> color(rule_names_.size(), 0);
  std::function<void(int)> visit = [&](int r) {
    color[static_cast<std::size_t>(r)] = 1;
    for (int s : left_calls[static_cast<std::size_t>(r)]) {
      if (color[static_cast<std::size_t>(s)] == 1) {
        throw GrammarError("rule '" + rule_names_[static_cast<std::size_t>(s)] + "' is left-recursive",
                           rule_lines_[static_cast<std::size_t>(s)]);
      }
      if (color[static_cast<std::size_t>(s)] == 0) visit(s);
    }
    color[static_cast<std::size_t>(r)] = 2;
  };
  for (std::size_t r = 0; r < rule_names_.size(); ++r) {
    if (color[r] == 0) visit(static_cast<int>(r));
  }
}

void Grammar::check_repetitions() const {
  for (const auto& e : exprs_) {
    if ((e.kind == Expr::Kind::star || e.kind == Expr::Kind::plus) && nullable(e.items[0])) {
      throw GrammarError("repetition of an expression that can match nothing");
    }
  }
}

std::vector<Token> Grammar::lex(std::string_view text) const {
  std::vector<Token> tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto m = dfa_->longest_match(text, pos);
    if (!m) throw LexError(pos);
    const auto& kind = kinds_[static_cast<std::size_t>(m->pattern)];
    if (!kind.skip) tokens.push_back({m->pattern, std::string(text.substr(pos, m->length)), pos});
    pos += m->length;
  }
  return tokens;
}

std::optional<int> Grammar::find_token_kind(std::string_view name) const {
  for (std::size_t k = 0; k < kinds_.size(); ++k) {
    if (kinds_[k].name == name) return static_cast<int>(k);
  }
  return std::nullopt;
}

std::optional<int> Grammar::find_rule(std::string_view name) const {
  auto it = std::find(rule_names_.begin(), rule_names_.end(), name);
  if (it == rule_names_.end()) return std::nullopt;
  return static_cast<int>(it - rule_names_.begin());
}

std::vector<int> Grammar::first_kinds(int id) const {
  std::vector<int> out;
  for (std::size_t k = 0; k < kinds_.size(); ++k) {
    if (in_first(id, static_cast<int>(k))) out.push_back(static_cast<int>(k));
  }
  return out;
}

std::vector<std::string> Grammar::literal_texts() const {
  std::vector<std::string> out;
  for (const auto& k : kinds_) {
    if (k.literal && !k.skip) out.push_back(k.pattern);
  }
  return out;
}

}  // namespace preduce::syntax
