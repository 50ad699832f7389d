#include "preduce/report/report.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

namespace preduce::report {

using json = nlohmann::json;

std::string format_hms(double seconds) {
  long long total = std::llround(std::max(0.0, seconds));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld", total / 3600, (total / 60) % 60, total % 60);
  return buf;
}

json report_json(const orchestrator::RunResult& r, const RunContext& ctx) {
  json j;
  j["input"] = ctx.input;
  j["output"] = ctx.output;
  j["language"] = ctx.language;
  j["mode"] = ctx.mode;
  j["completed"] = r.completed;
  j["stop_reason"] = r.stop_reason;
  j["original_tokens"] = r.original_tokens;
  j["final_tokens"] = r.program.token_count();
  j["iterations"] = r.iterations;
  j["wall_time_s"] = r.wall_time.count();
  j["wall_time_hms"] = format_hms(r.wall_time.count());
  j["config"] = {{"reducer", ctx.reducer},
                 {"model", ctx.sampling.model},
                 {"temperature", ctx.sampling.temperature},
                 {"num_responses", ctx.sampling.n},
                 {"prompting", ctx.prompting},
                 {"target_policy", ctx.target_policy},
                 {"transformations", ctx.transformations}};
  j["oracle"] = {{"queries_total", r.oracle.queries_total},
                 {"cache_hits", r.oracle.cache_hits},
                 {"executions", r.oracle.executions},
                 {"failures", r.oracle.failures},
                 {"timeouts", r.oracle.timeouts}};
  j["llm"] = {{"queries", r.llm_queries},
              {"wire_calls", r.llm.wire_calls},
              {"retries", r.llm.retries},
              {"failed_queries", r.llm.failures},
              {"prompt_tokens", r.llm.usage.prompt_tokens},
              {"completion_tokens", r.llm.usage.completion_tokens},
              {"latency_s", r.llm.latency.count()},
              {"cost_usd", r.llm.cost ? json(*r.llm.cost) : json(nullptr)}};
  j["attribution"] = json::array();
  for (const auto& a : r.attribution) {
    j["attribution"].push_back({{"transformation", a.transformation},
                                {"applications", a.applications},
                                {"adoptions", a.adoptions},
                                {"decrease_count", a.decrease_count},
                                {"sum_alone", a.sum_alone},
                                {"sum_combined", a.sum_combined},
                                {"mean_alone", a.mean_alone},
                                {"mean_combined", a.mean_combined}});
  }
  j["events"] = r.events.size();
  return j;
}

std::string report_text(const orchestrator::RunResult& r, const RunContext& ctx) {
  std::ostringstream os;
  auto row = [&](const std::string& k, const std::string& v) { os << std::left << std::setw(22) << k << v << '\n'; };
  row("input", ctx.input);
  row("output", ctx.output);
  row("status", r.completed ? "completed (" + r.stop_reason + ")" : "stopped by budget (" + r.stop_reason + ")");
  row("tokens", std::to_string(r.original_tokens) + " -> " + std::to_string(r.program.token_count()));
  row("iterations", std::to_string(r.iterations));
  row("time", format_hms(r.wall_time.count()));
  row("oracle queries", std::to_string(r.oracle.queries_total) + " (" + std::to_string(r.oracle.executions) +
                            " executed, " + std::to_string(r.oracle.cache_hits) + " cached, " +
                            std::to_string(r.oracle.timeouts) + " timed out)");
  if (ctx.mode == "llm") {
    row("llm queries", std::to_string(r.llm_queries));
    row("llm tokens", std::to_string(r.llm.usage.prompt_tokens) + " prompt, " +
                          std::to_string(r.llm.usage.completion_tokens) + " completion");
    std::ostringstream cost;
    if (r.llm.cost) cost << "$" << std::fixed << std::setprecision(4) << *r.llm.cost;
    else cost << "n/a";
    row("llm cost", cost.str());
    os << '\n'
       << std::left << std::setw(26) << "transformation" << std::right << std::setw(8) << "runs" << std::setw(10)
       << "adopted" << std::setw(12) << "alone" << std::setw(12) << "combined" << std::setw(10) << "shrank" << '\n';
    for (const auto& a : r.attribution) {
      os << std::left << std::setw(26) << a.transformation << std::right << std::setw(8) << a.applications
         << std::setw(10) << a.adoptions << std::setw(12) << std::fixed << std::setprecision(1) << a.mean_alone
         << std::setw(12) << a.mean_combined << std::setw(10) << a.decrease_count << '\n';
    }
  }
  return os.str();
}

json without_timing(json doc) {
  static const char* keys[] = {"wall_time_s", "wall_time_hms", "latency_s", "elapsed_s", "timestamp", "run_dir"};
  if (doc.is_object()) {
    for (const char* k : keys) doc.erase(k);
    for (auto& [k, v] : doc.items()) v = without_timing(v);
  } else if (doc.is_array()) {
    for (auto& v : doc) v = without_timing(v);
  }
  return doc;
}

}  // namespace preduce::report
