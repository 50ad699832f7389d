#include <gtest/gtest.h>

#include <random>

#include "preduce/syntax/errors.hpp"
#include "preduce/syntax/grammar_file.hpp"
#include "preduce/syntax/parser.hpp"
#include "preduce/syntax/program.hpp"

using namespace preduce::syntax;

namespace {

GrammarPtr c_grammar() { return builtin_grammar("c"); }

std::vector<std::string> lexemes(std::string_view text, const Grammar& g) {
  std::vector<std::string> out;
  for (auto& t : g.lex(text)) out.push_back(t.text);
  return out;
}

int count_kind(const ParseTree& t, NodeKind kind) {
  int n = 0;
  for (int id : t.preorder()) n += t.node(id).kind == kind;
  return n;
}

constexpr const char* kToy = R"(
grammar toy;
program : stmt* ;
stmt : IDENT ';' | '{' stmt* '}' | 'for' '(' ';' ';' ')' stmt ;
IDENT : /[a-z]+/ ;
WS : /[ \n]+/ -> skip ;
)";

}  // namespace

// Token counts below were computed with an independent regex lexer.
TEST(Lex, EmptyInputHasNoTokens) { EXPECT_TRUE(c_grammar()->lex("").empty()); }

TEST(Lex, DeclarationCount) { EXPECT_EQ(c_grammar()->lex("int x;").size(), 3u); }

TEST(Lex, FinalMotivatingStatement) {
  EXPECT_EQ(count_tokens("s = ad[2][1][0];", *c_grammar()), 13u);
  EXPECT_EQ(count_tokens("s = s ^ ad[2][1][0];", *c_grammar()), 15u);
}

TEST(Lex, CommentsAndWhitespaceAreNotCounted) {
  EXPECT_EQ(count_tokens("/* header */ int x; // trailing\n", *c_grammar()), 3u);
}

TEST(Lex, MaximalMunchAndKeywordPriority) {
  auto g = c_grammar();
  EXPECT_EQ(lexemes("a<<=b", *g), (std::vector<std::string>{"a", "<<=", "b"}));
  auto toks = g->lex("for format");
  ASSERT_EQ(toks.size(), 2u);
  EXPECT_EQ(g->token_kind(toks[0].kind).name, "'for'");
  EXPECT_EQ(g->token_kind(toks[1].kind).name, "IDENT");
}

TEST(Lex, ErrorCarriesOffset) {
  try {
    (void)c_grammar()->lex("int x = 1 @ 2;");
    FAIL() << "expected LexError";
  } catch (const LexError& e) {
    EXPECT_EQ(e.offset(), 10u);
  }
}

TEST(Parse, SingleStatement) {
  auto g = compile_grammar(kToy);
  auto tree = parse("x;", g);
  EXPECT_EQ(tree.find_rule_nodes("stmt").size(), 1u);
  EXPECT_EQ(tree.token_count(), 2u);
}

TEST(Parse, EmptyProgramHasEmptyRoot) {
  auto tree = parse("", c_grammar());
  EXPECT_EQ(tree.token_count(), 0u);
  EXPECT_EQ(tree.serialize(), "");
}

TEST(Parse, InfiniteForLoop) {
  auto g = compile_grammar(kToy);
  auto tree = parse("for(;;){}", g);
  auto stmts = tree.find_rule_nodes("stmt");
  int loops = 0;
  for (int id : stmts) loops += tree.node(tree.node(id).children[0]).lexeme == "for";
  EXPECT_EQ(loops, 1);

  auto ctree = parse("for(;;){}", c_grammar());
  EXPECT_EQ(ctree.token_count(), 7u);
}

TEST(Parse, ErrorReportsOffsetAndExpectedKinds) {
  auto g = compile_grammar(kToy);
  try {
    (void)parse("a; b c;", g);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 5u);
    EXPECT_NE(std::find(e.expected().begin(), e.expected().end(), "';'"), e.expected().end());
  }
}

TEST(Parse, QuantifiedPositionsAreExplicit) {
  auto tree = parse("int a, b = 1; s = ad[2][1][0];", c_grammar());
  EXPECT_GE(count_kind(tree, NodeKind::star), 2);
  EXPECT_GE(count_kind(tree, NodeKind::optional), 1);
  EXPECT_GE(count_kind(tree, NodeKind::plus), 1);
}

TEST(Parse, CSubsetCoversCommonConstructs) {
  const char* src = R"(
#include <stdio.h>
typedef struct S { int a; char *b[3]; unsigned c : 2; } S;
enum E { A = 1, B, };
static int g[7][5][7] = { {0} };
int fn8(int x, const char *s, ...) { return x ? x : (int)sizeof(S); }
int main(void) {
  int i, j, k; S s; S *p = &s;
  for (i = 0; i < 7; i++)
    for (j = 0; j < 5; j++) { p->a += g[i][j][0] << 2; s.b[0] = "x" "y"; }
  while (i--) if (!i) break; else continue;
  do { k = fn8(i, "a", 'c'); } while (0);
  switch (k) { case 1: k++; default: ; }
  goto end;
end:
  return 0;
}
)";
  EXPECT_NO_THROW((void)parse(src, c_grammar()));
}

TEST(Parse, JsSubsetCoversCommonConstructs) {
  const char* src = R"(
function f(a, b) { let x = a + b * 2; if (x > 3) { return x; } else return -x; }
var o = { k: 1, "s": [1, 2, 3], g: function () { return this.k; } };
for (let i = 0; i < 10; i++) { o.s[i] = f(i, i) ?? 0; }
for (const k of o.s) { print(k); }
const h = (p) => p * 2;
try { throw new Error("x"); } catch (e) { } finally { }
)";
  auto g = builtin_grammar("js");
  EXPECT_NO_THROW((void)parse(src, g));
}

TEST(Serialize, EmptyTree) { EXPECT_EQ(parse("", c_grammar()).serialize(), ""); }

TEST(Serialize, RoundTripDeclaration) { EXPECT_EQ(parse("int x ;", c_grammar()).serialize(), "int x ;"); }

TEST(Serialize, CanonicalJoin) {
  std::vector<std::string> leaves{"a", "=", "1", ";"};
  EXPECT_EQ(join_tokens(leaves), "a = 1 ;");
  std::vector<std::string> block{"{", "a", ";", "}", "b", ";"};
  EXPECT_EQ(join_tokens(block), "{ a ;\n}\nb ;");
}

TEST(Serialize, DirectivesStayOnTheirOwnLine) {
  auto g = c_grammar();
  auto tree = parse("#include <x.h>\nint y;", g);
  EXPECT_EQ(tree.serialize(), "#include <x.h>\nint y ;");
}

// Round-trip property: lex(serialize(parse(t))) == lex(t), and deleting any
// subtree never increases the leaf count.
TEST(Properties, RoundTripAndMonotoneCounting) {
  auto g = c_grammar();
  std::mt19937 rng(7);
  const std::vector<std::string> stmts{"x = 1;", "y += x * 2;", "if (x) y = 3; else { z; }",
                                       "for (i = 0; i < 3; i++) s = s ^ a[i];", "int q[2] = {1, 2};",
                                       "while (0) ;", "f(a, b, \"s\");", "struct T { int m; } t;"};
  for (int trial = 0; trial < 50; ++trial) {
    std::string text;
    int n = static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i) text += stmts[rng() % stmts.size()] + " /* c */\n";
    auto tree = parse(text, g);
    std::string out = tree.serialize();
    EXPECT_EQ(lexemes(out, *g), lexemes(text, *g));
    EXPECT_EQ(parse(out, g).serialize(), out);
    auto w = tree.weights();
    for (int id : tree.preorder()) EXPECT_LE(w[static_cast<std::size_t>(id)], tree.token_count());
  }
}

TEST(Properties, Determinism) {
  auto g = c_grammar();
  std::string text = "int a; a = a + 1; if (a) { a--; }";
  EXPECT_EQ(parse(text, g).serialize(), parse(text, g).serialize());
  EXPECT_EQ(lexemes(text, *g), lexemes(text, *g));
}

TEST(SourceProgramTest, CountIsStableAndTokenBased) {
  auto g = c_grammar();
  auto a = SourceProgram::from_text("int   x ;", *g);
  auto b = SourceProgram::from_text("int x;\n", *g);
  EXPECT_EQ(a.token_count(), a.token_count());
  EXPECT_EQ(a.token_count(), b.token_count());
  EXPECT_EQ(a.language_id(), "c");
}

TEST(GrammarFile, RejectsUndefinedToken) {
  EXPECT_THROW((void)compile_grammar("p : X ;"), GrammarError);
}

TEST(GrammarFile, RejectsLeftRecursion) {
  try {
    (void)compile_grammar("e : e '+' N | N ;\nN : /[0-9]+/ ;");
    FAIL();
  } catch (const GrammarError& e) {
    EXPECT_EQ(e.line(), 1);
  }
}

TEST(GrammarFile, RejectsNullableRepetition) {
  EXPECT_THROW((void)compile_grammar("p : (A?)* ;\nA : 'a' ;"), GrammarError);
}

TEST(GrammarFile, RejectsSkipTokenInParserRule) {
  EXPECT_THROW((void)compile_grammar("p : WS ;\nWS : / +/ -> skip ;"), GrammarError);
}

TEST(GrammarFile, ReportsLineOfSyntaxErrors) {
  try {
    (void)compile_grammar("grammar g;\np : 'a' ;\nq : ( 'b' ;\n");
    FAIL();
  } catch (const GrammarError& e) {
    EXPECT_EQ(e.line(), 3);
  }
}

TEST(GrammarFile, NamedLiteralRuleSharesKindWithQuotedUse) {
  auto g = compile_grammar("p : '->' A ;\nARROW : '->' ;\nA : /a+/ ;\nWS : / +/ -> skip ;");
  auto toks = g->lex("-> aa");
  ASSERT_EQ(toks.size(), 2u);
  EXPECT_EQ(g->token_kind(toks[0].kind).name, "ARROW");
  EXPECT_NO_THROW((void)parse("-> aa", g));
}

TEST(GrammarFile, LongestMatchTiesBrokenByOrder) {
  auto g = compile_grammar("p : (A | B)* ;\nA : /[a-z]+/ ;\nB : /[a-c]+/ ;\nWS : / +/ -> skip ;");
  auto toks = g->lex("abc");
  ASSERT_EQ(toks.size(), 1u);
  EXPECT_EQ(g->token_kind(toks[0].kind).name, "A");
}
