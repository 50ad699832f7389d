#include "preduce/syntax/grammar_file.hpp"

#include <cctype>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "preduce/syntax/errors.hpp"

namespace preduce::syntax {

namespace embedded {
extern const char* const c_grammar;
extern const char* const js_grammar;
}  // namespace embedded

namespace {

struct DefToken {
  enum class Kind { ident, literal, regex, punct, end };
  Kind kind = Kind::end;
  std::string text;
  int line = 0;
};

class DefLexer {
 public:
  explicit DefLexer(std::string_view src) : src_(src) {}

  DefToken next(bool regex_allowed) {
    skip_space();
    DefToken t;
    t.line = line_;
    if (pos_ >= src_.size()) return t;
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t b = pos_;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
      t.kind = DefToken::Kind::ident;
      t.text = std::string(src_.substr(b, pos_ - b));
      return t;
    }
    if (c == '\'') {
      t.kind = DefToken::Kind::literal;
      t.text = read_literal();
      return t;
    }
    if (c == '/' && regex_allowed) {
      t.kind = DefToken::Kind::regex;
      t.text = read_regex();
      return t;
    }
    if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
      pos_ += 2;
      t.kind = DefToken::Kind::punct;
      t.text = "->";
      return t;
    }
    if (std::string_view(":;|()*+?").find(c) != std::string_view::npos) {
      ++pos_;
      t.kind = DefToken::Kind::punct;
      t.text = std::string(1, c);
      return t;
    }
    throw GrammarError(std::string("unexpected character '") + c + "'", line_);
  }

 private:
  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string read_literal() {
    ++pos_;
    std::string out;
    while (true) {
      if (pos_ >= src_.size() || src_[pos_] == '\n') throw GrammarError("unterminated literal", line_);
      char c = src_[pos_++];
      if (c == '\'') break;
      if (c == '\\') {
        if (pos_ >= src_.size()) throw GrammarError("unterminated literal", line_);
        char e = src_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          default: out += e; break;
        }
      } else {
        out += c;
      }
    }
    if (out.empty()) throw GrammarError("empty literal", line_);
    return out;
  }

  // Regex bodies are passed through verbatim; `\/` stays escaped for the
  // pattern compiler, which reads it as '/'.
  std::string read_regex() {
    ++pos_;
    std::string out;
    bool in_class = false;
    while (true) {
      if (pos_ >= src_.size() || src_[pos_] == '\n') throw GrammarError("unterminated pattern", line_);
      char c = src_[pos_++];
      if (c == '\\') {
        if (pos_ >= src_.size()) throw GrammarError("unterminated pattern", line_);
        out += c;
        out += src_[pos_++];
        continue;
      }
      if (c == '[') in_class = true;
      if (c == ']') in_class = false;
      if (c == '/' && !in_class) break;
      out += c;
    }
    if (out.empty()) throw GrammarError("empty pattern", line_);
    return out;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

class DefParser {
 public:
  DefParser(std::string_view src, std::string_view default_language) : lex_(src) {
    def_.language_id = std::string(default_language);
  }

  GrammarDefinition parse() {
    advance(false);
    if (cur_.kind == DefToken::Kind::ident && cur_.text == "grammar") {
      advance(false);
      if (cur_.kind != DefToken::Kind::ident) fail("expected grammar name");
      def_.language_id = cur_.text;
      advance(false);
      expect(";");
    }
    while (cur_.kind != DefToken::Kind::end) rule();
    return std::move(def_);
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw GrammarError(what, cur_.line); }

  void advance(bool regex_allowed) { cur_ = lex_.next(regex_allowed); }

  bool is_punct(const char* p) const { return cur_.kind == DefToken::Kind::punct && cur_.text == p; }

  void expect(const char* p) {
    if (!is_punct(p)) fail(std::string("expected '") + p + "'");
    advance(false);
  }

  void rule() {
    if (cur_.kind != DefToken::Kind::ident) fail("expected rule name");
    std::string name = cur_.text;
    int line = cur_.line;
    bool lexer = std::isupper(static_cast<unsigned char>(name[0])) != 0;
    advance(false);
    if (!is_punct(":")) fail("expected ':' after rule name");
    advance(lexer);
    if (lexer) {
      LexerRuleDef r;
      r.name = name;
      r.line = line;
      if (cur_.kind == DefToken::Kind::regex) {
        r.pattern = cur_.text;
      } else if (cur_.kind == DefToken::Kind::literal) {
        r.pattern = cur_.text;
        r.literal = true;
      } else {
        fail("lexer rule body must be a /pattern/ or 'literal'");
      }
      advance(false);
      if (is_punct("->")) {
        advance(false);
        if (cur_.kind != DefToken::Kind::ident || cur_.text != "skip") fail("expected 'skip' after '->'");
        r.skip = true;
        advance(false);
      }
      expect(";");
      def_.lexer_rules.push_back(std::move(r));
    } else {
      ParserRuleDef r;
      r.name = name;
      r.line = line;
      r.body = choice();
      expect(";");
      def_.parser_rules.push_back(std::move(r));
    }
  }

  RuleAst choice() {
    RuleAst c;
    c.kind = RuleAst::Kind::choice;
    c.line = cur_.line;
    c.items.push_back(sequence());
    while (is_punct("|")) {
      advance(false);
      c.items.push_back(sequence());
    }
    return c;
  }

  RuleAst sequence() {
    RuleAst s;
    s.kind = RuleAst::Kind::sequence;
    s.line = cur_.line;
    while (cur_.kind == DefToken::Kind::ident || cur_.kind == DefToken::Kind::literal || is_punct("(")) {
      s.items.push_back(postfix());
    }
    return s;
  }

  RuleAst postfix() {
    RuleAst a = atom();
    while (is_punct("*") || is_punct("+") || is_punct("?")) {
      RuleAst q;
      q.kind = is_punct("*") ? RuleAst::Kind::star : is_punct("+") ? RuleAst::Kind::plus : RuleAst::Kind::optional;
      q.line = cur_.line;
      q.items.push_back(std::move(a));
      a = std::move(q);
      advance(false);
    }
    return a;
  }

  RuleAst atom() {
    RuleAst a;
    a.line = cur_.line;
    if (cur_.kind == DefToken::Kind::ident) {
      a.kind = RuleAst::Kind::name;
      a.text = cur_.text;
      advance(false);
    } else if (cur_.kind == DefToken::Kind::literal) {
      a.kind = RuleAst::Kind::literal;
      a.text = cur_.text;
      advance(false);
    } else {
      advance(false);  // '('
      a = choice();
      expect(")");
    }
    return a;
  }

  DefLexer lex_;
  DefToken cur_;
  GrammarDefinition def_;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GrammarError("cannot open grammar file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

GrammarDefinition parse_grammar_definition(std::string_view text, std::string_view default_language) {
  return DefParser(text, default_language).parse();
}

GrammarPtr compile_grammar(std::string_view text, std::string_view default_language) {
  return std::make_shared<const Grammar>(parse_grammar_definition(text, default_language));
}

GrammarPtr load_grammar_file(const std::filesystem::path& path) {
  return compile_grammar(read_file(path), path.stem().string());
}

std::string_view builtin_grammar_source(std::string_view language_id) {
  if (language_id == "c") return embedded::c_grammar;
  if (language_id == "js") return embedded::js_grammar;
  throw std::invalid_argument("unknown built-in language '" + std::string(language_id) + "'");
}

GrammarPtr builtin_grammar(std::string_view language_id) {
  static std::mutex mutex;
  static GrammarPtr c_cache;
  static GrammarPtr js_cache;
  std::string_view src = builtin_grammar_source(language_id);
  std::lock_guard<std::mutex> lock(mutex);
  GrammarPtr& slot = language_id == "c" ? c_cache : js_cache;
  if (!slot) slot = compile_grammar(src, language_id);
  return slot;
}

}  // namespace preduce::syntax
