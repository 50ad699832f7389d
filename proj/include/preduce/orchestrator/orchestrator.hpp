#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "preduce/llm/llm.hpp"
#include "preduce/oracle/oracle.hpp"
#include "preduce/reducer/reducer.hpp"
#include "preduce/syntax/grammar.hpp"
#include "preduce/transforms/transforms.hpp"

namespace preduce::orchestrator {

using syntax::SourceProgram;

enum class PromptingMode { multi, single };

/// How the target list is drawn from the n answers to a primary question.
enum class TargetPolicy {
  first_nonempty,  ///< the first answer that parses to a non-empty list
  union_all,       ///< all answers' lists concatenated, first occurrence kept
};

struct Sampling {
  std::string model = "gpt-4o";
  double temperature = 1.0;
  int n = 5;
};

struct Budget {
  std::optional<int> max_iterations;
  std::optional<std::size_t> max_llm_queries;
  std::optional<std::chrono::duration<double>> wall_clock;
};

struct OrchestratorConfig {
  Sampling sampling;
  PromptingMode prompting = PromptingMode::multi;
  TargetPolicy target_policy = TargetPolicy::first_nonempty;
  Budget budget;
  /// Run directory to persist into; nothing is written when empty.
  std::filesystem::path run_dir;
  /// Extension for persisted programs, e.g. ".c".
  std::string program_extension = ".txt";
};

/// The input program does not satisfy the property.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CandidateStatus { unparseable, failed, passed, selected };
const char* to_string(CandidateStatus status);

struct CandidateRecord {
  std::size_t index = 0;                ///< completion index
  std::optional<std::size_t> tokens;    ///< absent when it does not lex
  CandidateStatus status = CandidateStatus::unparseable;
  std::string file;                     ///< relative to the run directory
};

struct Event {
  std::string phase;
  int iteration = 0;
  std::string transformation;
  std::string target;
  std::vector<std::string> targets;
  std::vector<CandidateRecord> candidates;
  std::optional<std::size_t> size_before;
  std::optional<std::size_t> size_after;
  bool accepted = false;
  std::string detail;
  oracle::OracleCounters oracle;
  std::size_t llm_queries = 0;
  double elapsed_s = 0;
  std::string timestamp;
};

struct Attribution {
  std::string transformation;
  std::size_t applications = 0;    ///< phases run
  std::size_t adoptions = 0;       ///< candidates adopted across those phases
  std::size_t decrease_count = 0;  ///< phases ending smaller than they started
  long long sum_alone = 0;         ///< LLM step only
  long long sum_combined = 0;      ///< LLM step plus the following reduction
  double mean_alone = 0;
  double mean_combined = 0;
};

struct RunResult {
  SourceProgram program;
  std::size_t original_tokens = 0;
  bool completed = true;
  std::string stop_reason;  ///< "fixpoint" or the budget that fired
  int iterations = 0;
  std::vector<Event> events;
  std::vector<Attribution> attribution;
  oracle::OracleCounters oracle;
  llm::LlmStats llm;
  std::size_t llm_queries = 0;
  std::chrono::duration<double> wall_time{0};
};

/**
 * Alternates a generic reducer with LLM-driven transformations until an
 * iteration no longer shrinks the program:
 *
 *   P = reduce(P)
 *   repeat
 *     P_min = P
 *     for T in transformations:
 *       for target in ask(T.primary, P): P = best passing answer to T.followup
 *       P = reduce(P)
 *   until |P| >= |P_min|
 *   return P_min
 */
class Orchestrator {
 public:
  /// `llm` may be null only with an empty transformation list, which leaves
  /// plain generic reduction.
  Orchestrator(syntax::GrammarPtr grammar, oracle::PropertyOracle& oracle, llm::LlmClient* llm,
               transforms::TransformationList transformations, OrchestratorConfig config,
               std::shared_ptr<reducer::GenericReducer> reducer = nullptr);

  /// Throws PreconditionError if `program` fails the oracle; propagates
  /// OracleSetupError and llm::AuthError.
  RunResult run(const SourceProgram& program);

 private:
  class Run;

  syntax::GrammarPtr grammar_;
  oracle::PropertyOracle& oracle_;
  llm::LlmClient* llm_;
  transforms::TransformationList transformations_;
  OrchestratorConfig config_;
  std::shared_ptr<reducer::GenericReducer> reducer_;
};

/// Index of the smallest candidate among those marked passing; ties go to
/// the earliest. nullopt if none passes.
std::optional<std::size_t> select_smallest_passing(const std::vector<std::size_t>& sizes,
                                                   const std::vector<bool>& passing);

/// Per-transformation size deltas from the event log, in `order`.
std::vector<Attribution> attribute_sizes(const std::vector<Event>& events, const std::vector<std::string>& order);

nlohmann::json to_json(const Event& event);

}  // namespace preduce::orchestrator
