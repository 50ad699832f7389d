#pragma once

#include <span>
#include <string_view>

#include "preduce/syntax/grammar.hpp"
#include "preduce/syntax/parse_tree.hpp"

namespace preduce::syntax {

/**
 * Parses `text` with the grammar's start rule.
 *
 * The parser is a memoized generalized top-down recognizer: it computes, for
 * each (expression, position), every position the expression can end at, so
 * it accepts exactly the context-free language of the (non-left-recursive)
 * grammar. Ambiguity is resolved deterministically: the first matching
 * alternative wins, earlier sequence items take the longest span, and lists
 * use the fewest repetitions.
 *
 * Throws LexError or ParseError.
 */
ParseTree parse(std::string_view text, const GrammarPtr& grammar);

/// As parse(), over an already-lexed token sequence. `text_length` is used
/// as the error offset when the input ends early.
ParseTree parse_tokens(std::span<const Token> tokens, const GrammarPtr& grammar, std::size_t text_length = 0);

/// Membership test without building a tree; never throws.
bool parses(std::string_view text, const Grammar& grammar);

}  // namespace preduce::syntax
