#include "preduce/orchestrator/orchestrator.hpp"

#include <algorithm>
#include <ctime>
#include <iomanip>
#include <sstream>

#include "preduce/syntax/errors.hpp"
#include "preduce/syntax/parser.hpp"

namespace preduce::orchestrator {

namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

const char* to_string(CandidateStatus status) {
  switch (status) {
    case CandidateStatus::unparseable: return "unparseable";
    case CandidateStatus::failed: return "failed";
    case CandidateStatus::passed: return "passed";
    case CandidateStatus::selected: return "selected";
  }
  return "?";
}

std::optional<std::size_t> select_smallest_passing(const std::vector<std::size_t>& sizes,
                                                   const std::vector<bool>& passing) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < sizes.size() && i < passing.size(); ++i) {
    if (passing[i] && (!best || sizes[i] < sizes[*best])) best = i;
  }
  return best;
}

json to_json(const Event& e) {
  json j;
  j["phase"] = e.phase;
  j["iteration"] = e.iteration;
  if (!e.transformation.empty()) j["transformation"] = e.transformation;
  if (!e.target.empty()) j["target"] = e.target;
  if (e.phase == "primary_query") j["targets"] = e.targets;
  if (!e.candidates.empty()) {
    j["candidates"] = json::array();
    for (const auto& c : e.candidates) {
      json cj{{"index", c.index}, {"status", to_string(c.status)}};
      cj["tokens"] = c.tokens ? json(*c.tokens) : json(nullptr);
      if (!c.file.empty()) cj["file"] = c.file;
      j["candidates"].push_back(std::move(cj));
    }
  }
  if (e.size_before) j["size_before"] = *e.size_before;
  if (e.size_after) j["size_after"] = *e.size_after;
  j["accepted"] = e.accepted;
  if (!e.detail.empty()) j["detail"] = e.detail;
  j["oracle"] = {{"queries_total", e.oracle.queries_total},
                 {"cache_hits", e.oracle.cache_hits},
                 {"executions", e.oracle.executions},
                 {"failures", e.oracle.failures},
                 {"timeouts", e.oracle.timeouts}};
  j["llm_queries"] = e.llm_queries;
  j["elapsed_s"] = e.elapsed_s;
  j["timestamp"] = e.timestamp;
  return j;
}

std::vector<Attribution> attribute_sizes(const std::vector<Event>& events, const std::vector<std::string>& order) {
  std::vector<Attribution> out;
  for (const auto& name : order) out.push_back(Attribution{name});
  auto slot = [&](const std::string& name) -> Attribution& {
    for (auto& a : out) {
      if (a.transformation == name) return a;
    }
    out.push_back(Attribution{name});
    return out.back();
  };

  // A phase runs from the first LLM query of a transformation to the
  // reduction that follows it.
  bool in_phase = false;
  std::size_t phase_start = 0;
  std::size_t adopted = 0;
  for (const auto& e : events) {
    bool query = e.phase == "primary_query" || e.phase == "followup_query" || e.phase == "single_query";
    if (query && !in_phase) {
      in_phase = true;
      phase_start = e.size_before.value_or(0);
      adopted = 0;
    }
    if (query && e.accepted) ++adopted;
    if (e.phase == "reduce" && !e.transformation.empty() && e.size_before && e.size_after) {
      std::size_t start = in_phase ? phase_start : *e.size_before;
      auto& a = slot(e.transformation);
      ++a.applications;
      a.adoptions += adopted;
      long long alone = static_cast<long long>(*e.size_before) - static_cast<long long>(start);
      long long combined = static_cast<long long>(*e.size_after) - static_cast<long long>(start);
      a.sum_alone += alone;
      a.sum_combined += combined;
      if (combined < 0) ++a.decrease_count;
      in_phase = false;
      adopted = 0;
    }
  }
  for (auto& a : out) {
    if (a.applications > 0) {
      a.mean_alone = static_cast<double>(a.sum_alone) / static_cast<double>(a.applications);
      a.mean_combined = static_cast<double>(a.sum_combined) / static_cast<double>(a.applications);
    }
  }
  return out;
}

namespace {

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  auto t = std::chrono::system_clock::to_time_t(now);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  ::gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0') << ms << 'Z';
  return os.str();
}

struct BudgetStop {
  std::string reason;
};

}  // namespace

class Orchestrator::Run {
 public:
  Run(Orchestrator& owner, const SourceProgram& input) : o_(owner), current_(input), start_(Clock::now()) {
    if (!o_.config_.run_dir.empty()) {
      fs::create_directories(o_.config_.run_dir / "candidates");
      fs::create_directories(o_.config_.run_dir / "iterations");
      events_file_.open(o_.config_.run_dir / "events.jsonl", std::ios::trunc);
      if (!events_file_) throw std::runtime_error("cannot write " + (o_.config_.run_dir / "events.jsonl").string());
    }
  }

  RunResult execute() {
    RunResult result;
    result.original_tokens = current_.token_count();
    if (!o_.oracle_.check(current_)) throw PreconditionError("the input program does not satisfy the property test");

    SourceProgram best = current_;
    try {
      reduce("initial_reduce", "");
      best = current_;
      save_iteration(0);
      for (int iteration = 1;; ++iteration) {
        iteration_ = iteration;
        if (o_.config_.budget.max_iterations && iteration > *o_.config_.budget.max_iterations) {
          throw BudgetStop{"max_iterations"};
        }
        best = current_;
        emit(make("iteration_start"), current_.token_count(), std::nullopt);
        for (const auto& spec : o_.transformations_) {
          if (o_.config_.prompting == PromptingMode::multi) {
            multi_level(spec);
          } else {
            single_level(spec);
          }
          reduce("reduce", spec.name);
        }
        save_iteration(iteration);
        result.iterations = iteration;
        Event end = make("iteration_end");
        end.accepted = current_.token_count() < best.token_count();
        emit(std::move(end), best.token_count(), current_.token_count());
        if (current_.token_count() >= best.token_count()) break;
      }
      result.stop_reason = "fixpoint";
      emit(make("terminate"), std::nullopt, best.token_count());
    } catch (const BudgetStop& stop) {
      if (current_.token_count() < best.token_count()) best = current_;
      result.completed = false;
      result.stop_reason = stop.reason;
      Event e = make("budget_stop");
      e.detail = stop.reason;
      emit(std::move(e), std::nullopt, best.token_count());
    }

    result.program = best;
    result.iterations = std::max(result.iterations, iteration_);
    result.events = std::move(events_);
    std::vector<std::string> names;
    for (const auto& s : o_.transformations_) names.push_back(s.name);
    result.attribution = attribute_sizes(result.events, names);
    result.oracle = o_.oracle_.snapshot_counters();
    if (o_.llm_ != nullptr) result.llm = o_.llm_->stats();
    result.llm_queries = llm_queries_;
    result.wall_time = Clock::now() - start_;
    return result;
  }

 private:
  Event make(std::string phase, std::string transformation = "") {
    Event e;
    e.phase = std::move(phase);
    e.iteration = iteration_;
    e.transformation = std::move(transformation);
    return e;
  }

  void emit(Event e, std::optional<std::size_t> before, std::optional<std::size_t> after) {
    e.size_before = before;
    e.size_after = after;
    e.oracle = o_.oracle_.snapshot_counters();
    e.llm_queries = llm_queries_;
    e.elapsed_s = std::chrono::duration<double>(Clock::now() - start_).count();
    e.timestamp = iso_timestamp();
    if (events_file_.is_open()) {
      events_file_ << to_json(e).dump() << '\n';
      events_file_.flush();
    }
    events_.push_back(std::move(e));
  }

  void check_wall_clock() {
    const auto& limit = o_.config_.budget.wall_clock;
    if (limit && Clock::now() - start_ >= *limit) throw BudgetStop{"wall_clock"};
  }

  void reduce(const char* phase, const std::string& transformation) {
    check_wall_clock();
    std::size_t before = current_.token_count();
    auto outcome = o_.reducer_->reduce(current_, o_.oracle_);
    Event e = make(phase, transformation);
    e.accepted = outcome.program.token_count() < before;
    if (outcome.program.token_count() <= before) current_ = std::move(outcome.program);
    emit(std::move(e), before, current_.token_count());
  }

  // Sends one query; transient failures come back as an empty answer with
  // the error in `detail`.
  std::vector<std::string> ask(const transforms::TransformationSpec& spec, const std::string& prompt,
                               std::string& detail) {
    check_wall_clock();
    const auto& max = o_.config_.budget.max_llm_queries;
    if (max && llm_queries_ >= *max) throw BudgetStop{"max_llm_queries"};
    llm::LlmRequest request;
    request.system_prompt = spec.system;
    request.user_prompt = prompt;
    request.temperature = o_.config_.sampling.temperature;
    request.n = o_.config_.sampling.n;
    request.model_id = o_.config_.sampling.model;
    ++llm_queries_;
    try {
      return o_.llm_->complete(request).completions;
    } catch (const llm::AuthError&) {
      throw;
    } catch (const llm::LlmError& e) {
      detail = e.what();
      return {};
    }
  }

  void multi_level(const transforms::TransformationSpec& spec) {
    std::string detail;
    std::size_t before = current_.token_count();
    auto answers = ask(spec, transforms::instantiate(spec.primary, current_.text()), detail);
    std::vector<std::string> targets;
    for (const auto& a : answers) {
      auto list = llm::parse_target_list(a);
      if (o_.config_.target_policy == TargetPolicy::first_nonempty) {
        if (!list.empty()) {
          targets = std::move(list);
          break;
        }
      } else {
        for (auto& t : list) {
          if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(std::move(t));
        }
      }
    }
    Event e = make("primary_query", spec.name);
    e.targets = targets;
    e.detail = detail;
    emit(std::move(e), before, before);

    for (const auto& target : targets) {
      std::string fdetail;
      std::size_t fbefore = current_.token_count();
      auto completions = ask(spec, transforms::instantiate(spec.followup, current_.text(), target), fdetail);
      Event f = make("followup_query", spec.name);
      f.target = target;
      f.detail = fdetail;
      adopt_best(completions, f);
      emit(std::move(f), fbefore, current_.token_count());
    }
  }

  void single_level(const transforms::TransformationSpec& spec) {
    std::string detail;
    std::size_t before = current_.token_count();
    auto completions = ask(spec, transforms::instantiate(spec.single_level, current_.text()), detail);
    Event e = make("single_query", spec.name);
    e.detail = detail;
    adopt_best(completions, e);
    emit(std::move(e), before, current_.token_count());
  }

  // Parse-gates and oracle-checks every completion, then adopts the
  // smallest passing one, even if it is larger than the current program.
  void adopt_best(const std::vector<std::string>& completions, Event& event) {
    std::vector<SourceProgram> programs;
    std::vector<std::size_t> which;
    std::size_t serial = ++query_serial_;
    for (std::size_t i = 0; i < completions.size(); ++i) {
      CandidateRecord rec;
      rec.index = i;
      std::string code = llm::extract_code(completions[i]);
      rec.file = save_candidate(event, serial, i, code);
      try {
        auto program = SourceProgram::from_text(code, *o_.grammar_);
        rec.tokens = program.token_count();
        if (syntax::parses(code, *o_.grammar_)) {
          programs.push_back(std::move(program));
          which.push_back(i);
        }
      } catch (const syntax::LexError&) {
      }
      event.candidates.push_back(std::move(rec));
    }
    if (programs.empty()) return;

    std::vector<bool> verdicts = programs.size() == 1 || !o_.oracle_.concurrent()
                                     ? sequential_checks(programs)
                                     : o_.oracle_.check_batch(programs);
    std::vector<std::size_t> sizes;
    for (std::size_t k = 0; k < programs.size(); ++k) {
      sizes.push_back(programs[k].token_count());
      event.candidates[which[k]].status = verdicts[k] ? CandidateStatus::passed : CandidateStatus::failed;
    }
    if (auto pick = select_smallest_passing(sizes, verdicts)) {
      event.candidates[which[*pick]].status = CandidateStatus::selected;
      event.accepted = true;
      current_ = std::move(programs[*pick]);
    }
  }

  std::vector<bool> sequential_checks(const std::vector<SourceProgram>& programs) {
    std::vector<bool> out;
    for (const auto& p : programs) out.push_back(o_.oracle_.check(p));
    return out;
  }

  std::string save_candidate(const Event& event, std::size_t serial, std::size_t index, const std::string& code) {
    if (o_.config_.run_dir.empty()) return "";
    std::ostringstream name;
    name << "candidates/q" << std::setw(4) << std::setfill('0') << serial << '-' << event.transformation << '-'
         << index << o_.config_.program_extension;
    std::ofstream(o_.config_.run_dir / name.str(), std::ios::binary) << code;
    return name.str();
  }

  void save_iteration(int iteration) {
    if (o_.config_.run_dir.empty()) return;
    auto path = o_.config_.run_dir / "iterations" / ("iteration-" + std::to_string(iteration) + o_.config_.program_extension);
    std::ofstream(path, std::ios::binary) << current_.text();
  }

  Orchestrator& o_;
  SourceProgram current_;
  Clock::time_point start_;
  std::ofstream events_file_;
  std::vector<Event> events_;
  int iteration_ = 0;
  std::size_t llm_queries_ = 0;
  std::size_t query_serial_ = 0;
};

Orchestrator::Orchestrator(syntax::GrammarPtr grammar, oracle::PropertyOracle& oracle, llm::LlmClient* llm,
                           transforms::TransformationList transformations, OrchestratorConfig config,
                           std::shared_ptr<reducer::GenericReducer> reducer)
    : grammar_(std::move(grammar)),
      oracle_(oracle),
      llm_(llm),
      transformations_(std::move(transformations)),
      config_(std::move(config)),
      reducer_(std::move(reducer)) {
  if (!reducer_) reducer_ = std::make_shared<reducer::PersesReducer>(grammar_);
  if (!transformations_.empty()) {
    transforms::validate(transformations_);
    if (llm_ == nullptr) throw std::invalid_argument("transformations need an LLM client");
  }
  if (config_.sampling.n < 1) throw std::invalid_argument("number of responses must be at least 1");
  if (config_.sampling.temperature < 0 || config_.sampling.temperature > 2) {
    throw std::invalid_argument("temperature must be within [0, 2]");
  }
}

RunResult Orchestrator::run(const SourceProgram& program) {
  Run run(*this, program);
  return run.execute();
}

}  // namespace preduce::orchestrator
