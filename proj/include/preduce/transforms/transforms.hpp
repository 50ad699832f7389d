#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace preduce::transforms {

/// A prompt-driven transformation. Templates use the holes {PROGRAM} and
/// {TARGET}.
struct TransformationSpec {
  std::string name;
  std::string primary;       ///< asks for a target list; {PROGRAM}
  std::string followup;      ///< transforms one target; {PROGRAM}, {TARGET}
  std::string single_level;  ///< picks and transforms one target; {PROGRAM}
  std::string system;        ///< system prompt, may be empty

  friend bool operator==(const TransformationSpec&, const TransformationSpec&) = default;
};

using TransformationList = std::vector<TransformationSpec>;

class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& message, std::size_t line);
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class MissingHole : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class MergeMode { append, replace };

struct TransformationFile {
  MergeMode mode = MergeMode::append;
  TransformationList specs;
};

/**
 * Parses the transformation file format (see docs/transformations.md):
 *
 *   @mode append            optional; or `replace`
 *   system: <<<             default system prompt for later sections
 *   ...
 *   >>>
 *   [Name]
 *   primary: <<<
 *   ...{PROGRAM}...
 *   >>>
 *   followup: ...           single-line values are allowed too
 *   single_level: ...
 *
 * Throws SchemaError with the offending line.
 */
TransformationFile parse_transformation_file(std::string_view text);

/// The five built-in transformations in application order.
const TransformationList& builtin_transformations();
std::string_view builtin_transformations_source();

/// Built-ins merged with the specs in `path` according to its @mode.
TransformationList load_custom(const std::filesystem::path& path);

/// Checks hole placement and name uniqueness; SchemaError with line 0.
void validate(const TransformationList& list);

/// Substitutes {PROGRAM} and, when given, {TARGET} in one pass; the inserted
/// texts are never rescanned. MissingHole if the template lacks {PROGRAM},
/// lacks {TARGET} while a target is given, or has {TARGET} without one.
std::string instantiate(std::string_view templ, std::string_view program,
                        std::optional<std::string_view> target = std::nullopt);

}  // namespace preduce::transforms
