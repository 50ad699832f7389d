#include "preduce/cli/app.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <ostream>

#include "preduce/cli/bench.hpp"
#include "preduce/llm/llm.hpp"
#include "preduce/oracle/oracle.hpp"

namespace preduce::cli {

namespace {

void add_shared_flags(CLI::App& cmd, SessionOptions& o) {
  cmd.add_option("--lang", o.lang, "Built-in language (c, js); default from the input extension");
  cmd.add_option("--grammar", o.grammar, "Grammar file; overrides --lang");
  cmd.add_option("--model", o.model, "Model id")->capture_default_str();
  cmd.add_option("--temperature", o.temperature, "Sampling temperature")->capture_default_str();
  cmd.add_option("--num-responses", o.num_responses, "Completions per query (n)")->capture_default_str();
  cmd.add_option("--transforms", o.transforms, "Transformation file; default the built-in set");
  cmd.add_option("--prompting", o.prompting, "multi or single")->capture_default_str();
  cmd.add_option("--target-policy", o.target_policy, "first or union")->capture_default_str();
  cmd.add_option("--mock-fixtures", o.mock_fixtures, "Serve completions from a fixture directory");
  cmd.add_option("--base-url", o.base_url, "Chat-completion endpoint base URL")->capture_default_str();
  cmd.add_option("--api-key-env", o.api_key_env, "Environment variable holding the API key")->capture_default_str();
  cmd.add_flag("!--no-native-n", o.native_n, "Issue one request per completion");
  cmd.add_option("--price-table", o.price_table, "JSON price table for cost estimates");
  cmd.add_option("--max-iterations", o.max_iterations, "Outer-loop iteration budget");
  cmd.add_option("--max-llm-queries", o.max_llm_queries, "LLM query budget");
  cmd.add_option("--wall-clock-budget", o.wall_clock_budget, "Wall-clock budget in seconds");
  cmd.add_option("--timeout", o.timeout, "Per-check timeout of the test script in seconds")->capture_default_str();
  cmd.add_option("--jobs", o.jobs, "Concurrent oracle checks")->capture_default_str();
  cmd.add_flag("--parallel-safe", o.parallel_safe, "The test script may run concurrently");
  cmd.add_option("--reducer", o.reducer, "perses or external")->capture_default_str();
  cmd.add_option("--external-command", o.external_command, "External reducer command with {file} and {test}");
  cmd.add_option("--max-passes", o.max_passes, "Fixpoint pass limit of the generic reducer")->capture_default_str();
  cmd.add_flag("!--no-subtree-replacement", o.subtree_replacement, "Disable same-rule subtree replacement");
  cmd.add_option("--out-dir", o.out_dir, "Parent of run directories");
}

int run_reduce(const SessionOptions& o, std::ostream& out, std::ostream& err) {
  auto result = run_session(o);
  out << report::report_text(result.run, result.context);
  out << "run directory: " << result.run_dir.string() << "\n";
  if (o.write_min) out << "result: " << result.min_path.string() << "\n";
  if (!result.run.completed) {
    err << "preduce: budget exhausted (" << result.run.stop_reason << "); best result so far written\n";
    return exit_budget;
  }
  return exit_ok;
}

int run_bench_cmd(const BenchOptions& b, std::ostream& out, std::ostream& err) {
  auto rows = run_bench(b, err);
  if (!b.csv.empty()) {
    std::ofstream csv(b.csv);
    if (!csv) throw ConfigError("cannot write " + b.csv.string());
    write_csv(csv, b.configs, rows);
  } else {
    write_csv(out, b.configs, rows);
  }
  out << bench_table(b.configs, rows);
  return exit_ok;
}

}  // namespace

int run_app(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Program reducer combining a syntax-guided reducer with LLM transformations", "preduce"};
  app.require_subcommand(1);

  SessionOptions reduce_opts;
  auto* reduce = app.add_subcommand("reduce", "Reduce one program");
  reduce->add_option("--input", reduce_opts.input, "Program to reduce")->required();
  reduce->add_option("--test", reduce_opts.test, "Property test script (exit 0 = property holds)")->required();
  reduce->add_flag("--generic-only", reduce_opts.generic_only, "Skip the LLM transformations");
  reduce->add_option("--run-dir", reduce_opts.run_dir, "Exact run directory");
  add_shared_flags(*reduce, reduce_opts);

  BenchOptions bench_opts;
  auto* bench = app.add_subcommand("bench", "Reduce every corpus entry under several configurations");
  bench->add_option("--corpus", bench_opts.corpus, "Corpus directory")->required();
  bench->add_option("--configs", bench_opts.configs, "generic, llm, external, llm-external")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_option("--repeats", bench_opts.repeats, "Runs per entry and config")->capture_default_str();
  bench->add_option("--csv", bench_opts.csv, "CSV output file; default stdout");
  add_shared_flags(*bench, bench_opts.base);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "preduce: " << e.what() << "\n";
    const CLI::App* sub = reduce->parsed() ? reduce : bench->parsed() ? bench : &app;
    err << sub->help();
    return exit_config;
  }

  try {
    if (reduce->parsed()) return run_reduce(reduce_opts, out, err);
    bench_opts.out_dir = bench_opts.base.out_dir;
    return run_bench_cmd(bench_opts, out, err);
  } catch (const ConfigError& e) {
    err << "preduce: " << e.what() << "\n";
    return exit_config;
  } catch (const llm::AuthError& e) {
    err << "preduce: " << e.what() << "\n";
    return exit_config;
  } catch (const oracle::OracleSetupError& e) {
    err << "preduce: oracle setup failed: " << e.what() << "\n";
    return exit_oracle_setup;
  } catch (const orchestrator::PreconditionError& e) {
    err << "preduce: " << e.what() << "\n";
    return exit_oracle_setup;
  } catch (const std::exception& e) {
    err << "preduce: internal error: " << e.what() << "\n";
    return exit_internal;
  }
}

}  // namespace preduce::cli
