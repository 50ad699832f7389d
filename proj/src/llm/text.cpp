#include <algorithm>
#include <cctype>
#include <regex>

#include "preduce/llm/llm.hpp"

namespace preduce::llm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  while (!text.empty()) {
    auto nl = text.find('\n');
    out.push_back(text.substr(0, nl));
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return out;
}

// Strips decoration that wraps a whole target: backticks, quotes, bold
// markers, a trailing comma.
std::string clean_target(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.back() == ',') s = trim(s.substr(0, s.size() - 1));
  for (bool changed = true; changed && s.size() >= 2;) {
    changed = false;
    for (std::string_view wrap : {"**", "`", "\"", "'"}) {
      if (s.size() >= 2 * wrap.size() && s.starts_with(wrap) && s.ends_with(wrap) &&
          s.substr(wrap.size(), s.size() - 2 * wrap.size()).find(wrap) == std::string_view::npos) {
        s = trim(s.substr(wrap.size(), s.size() - 2 * wrap.size()));
        changed = true;
      }
    }
  }
  // "`fn1` - explanation" or "`fn1`: explanation"
  if (s.starts_with("`")) {
    auto close = s.find('`', 1);
    if (close != std::string_view::npos && close > 1) s = trim(s.substr(1, close - 1));
  }
  return std::string(s);
}

bool looks_like_prose(std::string_view line) {
  std::string lower;
  for (char c : line) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "none" || lower == "n/a" || lower.starts_with("no ")) return true;
  char last = line.back();
  bool sentence_end = last == '.' || last == '!' || last == '?' || last == ':';
  bool code_punct = line.find_first_of("(){}[];=<>*&") != std::string_view::npos;
  bool long_text = std::count(line.begin(), line.end(), ' ') >= 4;
  return !code_punct && (sentence_end || long_text);
}

// Splits the inside of `[...]` at commas outside brackets and quotes.
std::vector<std::string> split_bracketed(std::string_view inner) {
  std::vector<std::string> out;
  int depth = 0;
  char quote = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < inner.size(); ++i) {
    char c = inner[i];
    if (quote != 0) {
      if (c == '\\') ++i;
      else if (c == quote) quote = 0;
      continue;
    }
    if (c == '"' || c == '\'' || c == '`') quote = c;
    else if (c == '(' || c == '[' || c == '{') ++depth;
    else if ((c == ')' || c == ']' || c == '}') && depth > 0) --depth;
    else if (c == ',' && depth == 0) {
      out.emplace_back(inner.substr(start, i - start));
      start = i + 1;
    }
  }
  out.emplace_back(inner.substr(start));
  return out;
}

}  // namespace

std::string extract_code(std::string_view completion) {
  auto open = completion.find("```");
  if (open == std::string_view::npos) return std::string(trim(completion));
  std::string_view rest = completion.substr(open + 3);
  auto close_same_line = rest.find("```");
  auto nl = rest.find('\n');
  if (close_same_line != std::string_view::npos && (nl == std::string_view::npos || close_same_line < nl)) {
    return std::string(trim(rest.substr(0, close_same_line)));
  }
  // Skip the info string ("c", "cpp", ...).
  rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
  auto close = rest.find("```");
  return std::string(trim(rest.substr(0, close)));
}

std::vector<std::string> parse_target_list(std::string_view completion) {
  std::vector<std::string> raw;
  std::vector<std::string_view> lines;
  for (auto line : lines_of(completion)) {
    line = trim(line);
    if (line.empty() || line.starts_with("```")) continue;
    lines.push_back(line);
  }

  static const std::regex marker(R"(^(?:\d+[.):]|[-*+•]|\(\d+\)|#\d+[.:]?)\s+(.*)$)");
  auto bracket = std::find_if(lines.begin(), lines.end(), [](std::string_view l) {
    return l.size() >= 2 && l.front() == '[' && l.back() == ']';
  });
  std::vector<std::string> marked;
  for (auto line : lines) {
    std::match_results<std::string_view::const_iterator> m;
    if (std::regex_match(line.begin(), line.end(), m, marker)) marked.push_back(m[1].str());
  }

  if (bracket != lines.end()) {
    raw = split_bracketed(bracket->substr(1, bracket->size() - 2));
  } else if (!marked.empty()) {
    raw = std::move(marked);
  } else {
    for (auto line : lines) {
      if (!looks_like_prose(line)) raw.emplace_back(line);
    }
  }

  std::vector<std::string> out;
  for (const auto& r : raw) {
    std::string t = clean_target(r);
    if (t.empty() || std::find(out.begin(), out.end(), t) != out.end()) continue;
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace preduce::llm
