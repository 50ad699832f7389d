#include "preduce/syntax/program.hpp"

namespace preduce::syntax {

std::size_t count_tokens(std::string_view text, const Grammar& grammar) { return grammar.lex(text).size(); }

SourceProgram SourceProgram::from_text(std::string text, const Grammar& grammar) {
  std::size_t count = count_tokens(text, grammar);
  return SourceProgram(std::move(text), grammar.language_id(), count);
}

}  // namespace preduce::syntax
