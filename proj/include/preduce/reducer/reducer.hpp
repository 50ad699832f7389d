#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>

#include "preduce/oracle/oracle.hpp"
#include "preduce/syntax/grammar.hpp"
#include "preduce/syntax/parse_tree.hpp"
#include "preduce/syntax/program.hpp"

namespace preduce::reducer {

using syntax::SourceProgram;

/// A reducer produced a candidate the grammar rejects. Always a bug.
class ReducerDefect : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct ReductionConfig {
  int max_passes = 20;
  bool enable_subtree_replacement = true;
};

struct ReductionOutcome {
  SourceProgram program;
  std::size_t size_before = 0;
  std::size_t size_after = 0;
  std::size_t oracle_queries = 0;  ///< queries_total delta, cache hits included
  std::size_t candidates = 0;      ///< candidates generated and parse-checked
  int passes = 0;
  std::chrono::duration<double> wall_time{0};
};

/// Hierarchical delta debugging: ddmin over the deletable nodes of each tree
/// level in turn, top-down.
syntax::ParseTree hdd_reduce(const syntax::ParseTree& tree, oracle::PropertyOracle& oracle);

/// Grammar-aware reduction by weight-ordered node deletion and same-rule
/// subtree replacement, repeated until a pass makes no progress.
/// The input program must satisfy the oracle.
ReductionOutcome perses_reduce(const syntax::ParseTree& tree, oracle::PropertyOracle& oracle,
                               const ReductionConfig& config = {});

class GenericReducer {
 public:
  virtual ~GenericReducer() = default;
  virtual ReductionOutcome reduce(const SourceProgram& program, oracle::PropertyOracle& oracle) = 0;
  [[nodiscard]] virtual std::string name() const = 0;
};

class PersesReducer final : public GenericReducer {
 public:
  PersesReducer(syntax::GrammarPtr grammar, ReductionConfig config = {});
  ReductionOutcome reduce(const SourceProgram& program, oracle::PropertyOracle& oracle) override;
  [[nodiscard]] std::string name() const override { return "perses"; }

 private:
  syntax::GrammarPtr grammar_;
  ReductionConfig config_;
};

struct ExternalReducerConfig {
  /// Shell command; `{file}` and `{test}` expand to quoted absolute paths.
  std::string command;
  std::filesystem::path test_script;
  std::string file_name = "candidate";
  std::chrono::milliseconds timeout{3'600'000};
};

/// Runs an off-the-shelf reducer on a copy of the program. Its result is
/// re-checked against the oracle; anything unusable yields the input back.
class ExternalReducer final : public GenericReducer {
 public:
  ExternalReducer(syntax::GrammarPtr grammar, ExternalReducerConfig config);
  ReductionOutcome reduce(const SourceProgram& program, oracle::PropertyOracle& oracle) override;
  [[nodiscard]] std::string name() const override { return "external"; }

 private:
  syntax::GrammarPtr grammar_;
  ExternalReducerConfig config_;
};

}  // namespace preduce::reducer
