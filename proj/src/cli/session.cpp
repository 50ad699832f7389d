#include "preduce/cli/session.hpp"

#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "preduce/llm/http_transport.hpp"
#include "preduce/llm/scripted_transport.hpp"
#include "preduce/syntax/errors.hpp"
#include "preduce/syntax/grammar_file.hpp"
#include "preduce/syntax/parser.hpp"

namespace preduce::cli {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(std::string("cannot read ") + what + " " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
}

fs::path fresh_run_dir(const fs::path& parent) {
  auto now = std::chrono::system_clock::now();
  auto t = std::chrono::system_clock::to_time_t(now);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  ::gmtime_r(&t, &tm);
  std::ostringstream name;
  name << std::put_time(&tm, "%Y%m%d-%H%M%S") << '-' << std::setw(3) << std::setfill('0') << ms;
  fs::path dir = parent / "run" / name.str();
  for (int suffix = 1; fs::exists(dir); ++suffix) dir = parent / "run" / (name.str() + "-" + std::to_string(suffix));
  return dir;
}

syntax::GrammarPtr resolve_grammar(const SessionOptions& o, std::string& language) {
  try {
    if (!o.grammar.empty()) {
      auto g = syntax::load_grammar_file(o.grammar);
      language = g->language_id();
      return g;
    }
    language = o.lang.empty() ? language_for(o.input) : o.lang;
    if (language.empty()) {
      throw ConfigError("cannot tell the language of " + o.input.string() + "; pass --lang or --grammar");
    }
    return syntax::builtin_grammar(language);
  } catch (const syntax::GrammarError& e) {
    throw ConfigError(std::string("grammar: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::shared_ptr<llm::LlmTransport> resolve_transport(const SessionOptions& o) {
  if (!o.mock_fixtures.empty()) {
    try {
      return llm::ScriptedTransport::from_directory(o.mock_fixtures);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("mock fixtures: ") + e.what());
    }
  }
  llm::HttpConfig cfg;
  cfg.base_url = o.base_url;
  cfg.api_key_env = o.api_key_env;
  cfg.native_n = o.native_n;
  try {
    return std::make_shared<llm::HttpTransport>(cfg);
  } catch (const llm::AuthError& e) {
    throw ConfigError(std::string(e.what()) + " (or use --mock-fixtures, or --generic-only)");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

std::string language_for(const fs::path& file) {
  auto ext = file.extension().string();
  if (ext == ".c" || ext == ".h" || ext == ".i") return "c";
  if (ext == ".js" || ext == ".mjs" || ext == ".cjs") return "js";
  return "";
}

SessionResult run_session(const SessionOptions& o) {
  if (o.input.empty()) throw ConfigError("--input is required");
  if (o.test.empty()) throw ConfigError("--test is required");
  if (o.num_responses < 1) throw ConfigError("--num-responses must be at least 1");
  if (o.temperature < 0 || o.temperature > 2) throw ConfigError("--temperature must be within [0, 2]");
  if (o.jobs < 1) throw ConfigError("--jobs must be at least 1");
  if (o.timeout <= 0) throw ConfigError("--timeout must be positive");
  if (o.max_passes < 1) throw ConfigError("--max-passes must be at least 1");
  if (o.max_iterations && *o.max_iterations < 0) throw ConfigError("--max-iterations must not be negative");
  if (o.prompting != "multi" && o.prompting != "single") throw ConfigError("--prompting must be multi or single");
  if (o.target_policy != "first" && o.target_policy != "union") throw ConfigError("--target-policy must be first or union");
  if (o.reducer != "perses" && o.reducer != "external") throw ConfigError("--reducer must be perses or external");
  if (o.reducer == "external" && o.external_command.empty()) throw ConfigError("--reducer external needs --external-command");

  std::string language;
  auto grammar = resolve_grammar(o, language);
  std::string text = read_file(o.input, "input");
  syntax::SourceProgram input;
  try {
    input = syntax::SourceProgram::from_text(text, *grammar);
    (void)syntax::parse(text, grammar);
  } catch (const syntax::LexError& e) {
    throw ConfigError(o.input.string() + ": " + e.what());
  } catch (const syntax::ParseError& e) {
    throw ConfigError(o.input.string() + ": " + e.what());
  }

  transforms::TransformationList transformations;
  if (!o.generic_only) {
    try {
      transformations = o.transforms.empty() ? transforms::builtin_transformations() : transforms::load_custom(o.transforms);
    } catch (const transforms::SchemaError& e) {
      throw ConfigError(std::string("transformations: ") + e.what());
    }
  }

  std::shared_ptr<llm::LlmTransport> transport;
  if (!o.generic_only) transport = resolve_transport(o);
  std::optional<llm::PriceTable> prices;
  if (!o.price_table.empty()) {
    try {
      prices = llm::PriceTable::load(o.price_table);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }

  fs::path run_dir = o.run_dir;
  if (run_dir.empty()) {
    fs::path parent = o.out_dir.empty() ? fs::absolute(o.input).parent_path() : o.out_dir;
    run_dir = fresh_run_dir(parent);
  }
  std::error_code ec;
  fs::create_directories(run_dir, ec);
  if (ec) throw ConfigError("cannot create run directory " + run_dir.string());

  oracle::ScriptConfig sc;
  sc.script = o.test;
  sc.candidate_name = o.input.filename().string();
  sc.timeout = std::chrono::milliseconds(static_cast<long long>(o.timeout * 1000));
  sc.parallel_safe = o.parallel_safe;
  oracle::PropertyOracle oracle(std::make_shared<oracle::ScriptTest>(sc), o.jobs);

  std::unique_ptr<llm::LlmClient> client;
  if (transport) client = std::make_unique<llm::LlmClient>(transport, llm::RetryPolicy{}, prices, run_dir / "llm.jsonl");

  std::shared_ptr<reducer::GenericReducer> generic;
  if (o.reducer == "external") {
    reducer::ExternalReducerConfig ec_cfg;
    ec_cfg.command = o.external_command;
    ec_cfg.test_script = o.test;
    ec_cfg.file_name = o.input.filename().string();
    generic = std::make_shared<reducer::ExternalReducer>(grammar, ec_cfg);
  } else {
    reducer::ReductionConfig rc;
    rc.max_passes = o.max_passes;
    rc.enable_subtree_replacement = o.subtree_replacement;
    generic = std::make_shared<reducer::PersesReducer>(grammar, rc);
  }

  orchestrator::OrchestratorConfig oc;
  oc.sampling = {o.model, o.temperature, o.num_responses};
  oc.prompting = o.prompting == "single" ? orchestrator::PromptingMode::single : orchestrator::PromptingMode::multi;
  oc.target_policy = o.target_policy == "union" ? orchestrator::TargetPolicy::union_all
                                                : orchestrator::TargetPolicy::first_nonempty;
  oc.budget.max_iterations = o.max_iterations;
  oc.budget.max_llm_queries = o.max_llm_queries;
  if (o.wall_clock_budget) oc.budget.wall_clock = std::chrono::duration<double>(*o.wall_clock_budget);
  oc.run_dir = run_dir;
  oc.program_extension = o.input.extension().string().empty() ? ".txt" : o.input.extension().string();

  orchestrator::Orchestrator orch(grammar, oracle, client.get(), transformations, oc, generic);

  SessionResult out;
  out.run_dir = run_dir;
  out.run = orch.run(input);
  out.min_path = o.input;
  out.min_path += ".min";

  auto& ctx = out.context;
  ctx.input = o.input.string();
  ctx.output = o.write_min ? out.min_path.string() : "";
  ctx.language = language;
  ctx.mode = o.generic_only ? "generic" : "llm";
  ctx.reducer = generic->name();
  ctx.sampling = oc.sampling;
  ctx.prompting = o.prompting;
  ctx.target_policy = o.target_policy;
  for (const auto& t : transformations) ctx.transformations.push_back(t.name);

  if (o.write_min) write_file(out.min_path, out.run.program.text());
  write_file(run_dir / ("final" + oc.program_extension), out.run.program.text());
  write_file(run_dir / "report.json", report::report_json(out.run, ctx).dump(2) + "\n");
  write_file(run_dir / "report.txt", report::report_text(out.run, ctx));
  return out;
}

}  // namespace preduce::cli
