#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "preduce/orchestrator/orchestrator.hpp"

namespace preduce::report {

/// Run facts the orchestrator does not know about.
struct RunContext {
  std::string input;
  std::string output;
  std::string language;
  std::string mode;  ///< "llm" or "generic"
  std::string reducer;
  orchestrator::Sampling sampling;
  std::string prompting;
  std::string target_policy;
  std::vector<std::string> transformations;
};

/// "hh:mm:ss", hours unbounded.
std::string format_hms(double seconds);

nlohmann::json report_json(const orchestrator::RunResult& result, const RunContext& context);
std::string report_text(const orchestrator::RunResult& result, const RunContext& context);

/// Copy of a report or event with wall-clock dependent fields removed.
nlohmann::json without_timing(nlohmann::json doc);

}  // namespace preduce::report
