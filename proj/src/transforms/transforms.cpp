#include "preduce/transforms/transforms.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

namespace preduce::transforms {

namespace embedded {
extern const char* const builtin_transforms;
}

namespace {

constexpr std::string_view kProgram = "{PROGRAM}";
constexpr std::string_view kTarget = "{TARGET}";

std::size_t occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + needle.size())) ++n;
  return n;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool valid_name(std::string_view name) {
  if (name.empty() || !(std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_')) return false;
  return std::all_of(name.begin(), name.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

void check_spec(const TransformationSpec& spec, std::size_t line) {
  auto fail = [&](const std::string& msg) { throw SchemaError(spec.name + ": " + msg, line); };
  if (spec.primary.empty()) fail("missing primary question");
  if (spec.followup.empty()) fail("missing followup question");
  if (spec.single_level.empty()) fail("missing single_level question");
  if (occurrences(spec.primary, kProgram) != 1) fail("primary question needs exactly one {PROGRAM}");
  if (occurrences(spec.primary, kTarget) != 0) fail("primary question cannot use {TARGET}");
  if (occurrences(spec.followup, kProgram) == 0 || occurrences(spec.followup, kTarget) == 0) {
    fail("followup question needs {PROGRAM} and {TARGET}");
  }
  if (occurrences(spec.single_level, kProgram) == 0) fail("single_level question needs {PROGRAM}");
  if (occurrences(spec.single_level, kTarget) != 0) fail("single_level question cannot use {TARGET}");
}

}  // namespace

SchemaError::SchemaError(const std::string& message, std::size_t line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

TransformationFile parse_transformation_file(std::string_view text) {
  std::vector<std::string_view> lines;
  for (std::string_view rest = text; !rest.empty();) {
    auto nl = rest.find('\n');
    lines.push_back(rest.substr(0, nl));
    if (nl == std::string_view::npos) break;
    rest.remove_prefix(nl + 1);
  }

  TransformationFile out;
  std::string default_system;
  TransformationSpec* current = nullptr;
  std::vector<std::size_t> section_lines;
  std::set<std::string> seen_keys;
  bool seen_section = false;

  auto finish = [&] {
    if (current != nullptr) check_spec(*current, section_lines.back());
  };

  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::size_t lineno = i + 1;
    std::string_view line = trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;

    if (line.front() == '@') {
      if (seen_section) throw SchemaError("directives must precede all sections", lineno);
      std::string_view rest = trim(line.substr(1));
      if (!rest.starts_with("mode")) throw SchemaError("unknown directive '" + std::string(line) + "'", lineno);
      std::string_view value = trim(rest.substr(4));
      if (value == "append") out.mode = MergeMode::append;
      else if (value == "replace") out.mode = MergeMode::replace;
      else throw SchemaError("mode must be append or replace", lineno);
      continue;
    }

    if (line.front() == '[') {
      if (line.back() != ']') throw SchemaError("unterminated section header", lineno);
      std::string name(trim(line.substr(1, line.size() - 2)));
      if (!valid_name(name)) throw SchemaError("invalid transformation name '" + name + "'", lineno);
      for (const auto& s : out.specs) {
        if (s.name == name) throw SchemaError("duplicate transformation '" + name + "'", lineno);
      }
      finish();
      out.specs.push_back(TransformationSpec{name, "", "", "", default_system});
      current = &out.specs.back();
      section_lines.push_back(lineno);
      seen_keys.clear();
      seen_section = true;
      continue;
    }

    auto colon = line.find(':');
    if (colon == std::string_view::npos) throw SchemaError("expected 'key: value'", lineno);
    std::string key(trim(line.substr(0, colon)));
    std::string_view value = trim(line.substr(colon + 1));
    std::string body;
    if (value == "<<<") {
      std::size_t j = i + 1;
      std::string acc;
      for (; j < lines.size() && trim(lines[j]) != ">>>"; ++j) {
        if (!acc.empty() || j > i + 1) acc += '\n';
        acc += lines[j];
      }
      if (j == lines.size()) throw SchemaError("unterminated <<< block", lineno);
      body = acc;
      i = j;
    } else {
      body = std::string(value);
    }

    if (current == nullptr) {
      if (key != "system") throw SchemaError("'" + key + "' outside a [section]", lineno);
      default_system = body;
      continue;
    }
    if (!seen_keys.insert(key).second) throw SchemaError("duplicate key '" + key + "'", lineno);
    if (key == "primary") current->primary = body;
    else if (key == "followup") current->followup = body;
    else if (key == "single_level") current->single_level = body;
    else if (key == "system") current->system = body;
    else throw SchemaError("unknown key '" + key + "'", lineno);
  }
  finish();
  if (out.specs.empty()) throw SchemaError("no transformations", 0);
  return out;
}

std::string_view builtin_transformations_source() { return embedded::builtin_transforms; }

const TransformationList& builtin_transformations() {
  static const TransformationList list = parse_transformation_file(embedded::builtin_transforms).specs;
  return list;
}

TransformationList load_custom(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot read transformation file " + path.string(), 0);
  std::stringstream buf;
  buf << in.rdbuf();
  auto file = parse_transformation_file(buf.str());
  if (file.mode == MergeMode::replace) return file.specs;
  TransformationList out = builtin_transformations();
  for (auto& spec : file.specs) {
    for (const auto& b : out) {
      if (b.name == spec.name) {
        throw SchemaError("transformation '" + spec.name + "' duplicates a built-in; use '@mode replace'", 0);
      }
    }
    out.push_back(std::move(spec));
  }
  return out;
}

void validate(const TransformationList& list) {
  if (list.empty()) throw SchemaError("no transformations", 0);
  std::set<std::string> names;
  for (const auto& spec : list) {
    if (!names.insert(spec.name).second) throw SchemaError("duplicate transformation '" + spec.name + "'", 0);
    check_spec(spec, 0);
  }
}

std::string instantiate(std::string_view templ, std::string_view program, std::optional<std::string_view> target) {
  if (templ.find(kProgram) == std::string_view::npos) throw MissingHole("template has no {PROGRAM} hole");
  bool has_target = templ.find(kTarget) != std::string_view::npos;
  if (target && !has_target) throw MissingHole("template has no {TARGET} hole");
  if (!target && has_target) throw MissingHole("template needs a {TARGET} value");
  std::string out;
  out.reserve(templ.size() + program.size());
  for (std::size_t i = 0; i < templ.size();) {
    if (templ.compare(i, kProgram.size(), kProgram) == 0) {
      out += program;
      i += kProgram.size();
    } else if (target && templ.compare(i, kTarget.size(), kTarget) == 0) {
      out += *target;
      i += kTarget.size();
    } else {
      out += templ[i++];
    }
  }
  return out;
}

}  // namespace preduce::transforms
