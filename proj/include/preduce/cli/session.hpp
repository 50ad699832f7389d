#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "preduce/orchestrator/orchestrator.hpp"
#include "preduce/report/report.hpp"

namespace preduce::cli {

/// Bad flags, unreadable inputs, grammar/transformation file errors, missing
/// credentials.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SessionOptions {
  std::filesystem::path input;
  std::filesystem::path test;
  std::string lang;                    ///< empty: from the input's extension
  std::filesystem::path grammar;       ///< overrides lang
  std::string model = "gpt-4o";
  double temperature = 1.0;
  int num_responses = 5;
  std::filesystem::path transforms;    ///< empty: built-ins
  std::string prompting = "multi";
  std::string target_policy = "first";
  std::filesystem::path mock_fixtures;
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key_env = "OPENAI_API_KEY";
  bool native_n = true;
  std::filesystem::path price_table;
  std::optional<int> max_iterations;
  std::optional<std::size_t> max_llm_queries;
  std::optional<double> wall_clock_budget;
  double timeout = 60;
  int jobs = 1;
  bool parallel_safe = false;
  bool generic_only = false;
  std::string reducer = "perses";
  std::string external_command;
  int max_passes = 20;
  bool subtree_replacement = true;
  /// Run directories go to <out_dir>/run/<timestamp>; empty: the input's directory.
  std::filesystem::path out_dir;
  /// Exact run directory; overrides out_dir.
  std::filesystem::path run_dir;
  bool write_min = true;
};

struct SessionResult {
  orchestrator::RunResult run;
  report::RunContext context;
  std::filesystem::path run_dir;
  std::filesystem::path min_path;
};

/// Language id for a file extension ("c", "js"), empty if unknown.
std::string language_for(const std::filesystem::path& file);

/// Builds every component from `options`, runs the reduction and writes the
/// run directory, report files and (optionally) `<input>.min`.
/// Throws ConfigError, oracle::OracleSetupError, orchestrator::PreconditionError
/// and llm::AuthError.
SessionResult run_session(const SessionOptions& options);

}  // namespace preduce::cli
