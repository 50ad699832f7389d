#pragma once

#include <filesystem>
#include <string_view>

#include "preduce/syntax/grammar.hpp"

namespace preduce::syntax {

/**
 * Reads the grammar definition format (see docs/grammar-format.md):
 *
 *     grammar c;
 *     IDENT  : /[A-Za-z_][A-Za-z0-9_]*\/ ;
 *     WS     : /[ \t\r\n]+/ -> skip ;
 *     ARROW  : '->' ;
 *     program : stmt* ;
 *     stmt    : IDENT '=' expr ';' | '{' stmt* '}' ;
 *
 * Uppercase names are lexer rules, lowercase names are parser rules; the
 * first parser rule is the start rule. Throws GrammarError with a line.
 */
GrammarDefinition parse_grammar_definition(std::string_view text, std::string_view default_language = "custom");

GrammarPtr compile_grammar(std::string_view text, std::string_view default_language = "custom");
GrammarPtr load_grammar_file(const std::filesystem::path& path);

/// Built-in desk-scale grammars: "c" (C subset) and "js" (JavaScript subset).
/// Throws std::invalid_argument for unknown ids.
GrammarPtr builtin_grammar(std::string_view language_id);
std::string_view builtin_grammar_source(std::string_view language_id);

}  // namespace preduce::syntax
