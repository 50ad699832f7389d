#include "preduce/oracle/oracle.hpp"

#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <thread>

#include "preduce/util/process.hpp"

namespace preduce::oracle {
namespace fs = std::filesystem;

namespace {

fs::path make_temp_root() {
  try {
    return util::make_temp_dir("preduce-oracle");
  } catch (const util::ProcessError& e) {
    throw OracleSetupError(e.what());
  }
}

}  // namespace

ScriptTest::ScriptTest(ScriptConfig config) : config_(std::move(config)) {
  std::error_code ec;
  if (!fs::exists(config_.script, ec)) {
    throw OracleSetupError("property test script not found: " + config_.script.string());
  }
  config_.script = fs::absolute(config_.script);
  if (::access(config_.script.c_str(), X_OK) != 0) {
    throw OracleSetupError("property test script is not executable: " + config_.script.string());
  }
  if (config_.candidate_name.empty() || config_.candidate_name.find('/') != std::string::npos) {
    throw OracleSetupError("invalid candidate file name '" + config_.candidate_name + "'");
  }
  if (config_.work_root.empty()) {
    config_.work_root = make_temp_root();
    owns_root_ = true;
  } else {
    fs::create_directories(config_.work_root, ec);
    if (ec || !fs::is_directory(config_.work_root)) {
      throw OracleSetupError("cannot create oracle work directory " + config_.work_root.string());
    }
  }
}

ScriptTest::~ScriptTest() {
  if (owns_root_ && !config_.keep_work_dirs) {
    std::error_code ec;
    fs::remove_all(config_.work_root, ec);
  }
}

Verdict ScriptTest::run(const SourceProgram& program) {
  std::size_t n;
  {
    std::lock_guard<std::mutex> lock(counter_mutex_);
    n = next_dir_++;
  }
  fs::path dir = config_.work_root / ("check-" + std::to_string(n));
  std::error_code ec;
  fs::remove_all(dir, ec);
  if (!fs::create_directory(dir, ec) || ec) {
    throw OracleSetupError("cannot create oracle work directory " + dir.string());
  }
  {
    std::ofstream out(dir / config_.candidate_name, std::ios::binary);
    if (!out) throw OracleSetupError("cannot write candidate into " + dir.string());
    out << program.text();
  }
  util::ProcessSpec spec;
  spec.argv = {config_.script.string(), config_.candidate_name};
  spec.cwd = dir;
  spec.stdout_path = dir / ".stdout";
  spec.stderr_path = dir / ".stderr";
  spec.timeout = config_.timeout;
  std::optional<int> status;
  try {
    status = util::run_process(spec);
  } catch (const util::ProcessError& e) {
    throw OracleSetupError(e.what());
  }
  if (!config_.keep_work_dirs) fs::remove_all(dir, ec);
  if (!status) return Verdict::timeout;
  return *status == 0 ? Verdict::pass : Verdict::fail;
}

PropertyOracle::PropertyOracle(std::shared_ptr<PropertyTest> test, int jobs)
    : test_(std::move(test)), jobs_(std::max(jobs, 1)) {
  if (!test_) throw OracleSetupError("no property test configured");
}

bool PropertyOracle::check(const SourceProgram& program) {
  std::promise<bool> promise;
  std::shared_future<bool> existing;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    ++counters_.queries_total;
    auto it = cache_.find(program.text());
    if (it != cache_.end()) {
      ++counters_.cache_hits;
      existing = it->second;
    } else {
      ++counters_.executions;
      cache_.emplace(program.text(), promise.get_future().share());
    }
  }
  if (existing.valid()) return existing.get();

  Verdict verdict;
  try {
    if (concurrent()) {
      verdict = test_->run(program);
    } else {
      std::lock_guard<std::mutex> exec(exec_mutex_);
      verdict = test_->run(program);
    }
  } catch (...) {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      cache_.erase(program.text());
    }
    promise.set_exception(std::current_exception());
    throw;
  }
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (verdict == Verdict::fail) ++counters_.failures;
    if (verdict == Verdict::timeout) ++counters_.timeouts;
  }
  bool ok = verdict == Verdict::pass;
  promise.set_value(ok);
  return ok;
}

std::vector<bool> PropertyOracle::check_batch(std::span<const SourceProgram> programs) {
  std::vector<bool> results(programs.size(), false);
  if (!concurrent() || programs.size() < 2) {
    for (std::size_t i = 0; i < programs.size(); ++i) results[i] = check(programs[i]);
    return results;
  }
  for (std::size_t base = 0; base < programs.size(); base += static_cast<std::size_t>(jobs_)) {
    std::size_t end = std::min(programs.size(), base + static_cast<std::size_t>(jobs_));
    std::vector<std::future<bool>> pending;
    for (std::size_t i = base; i < end; ++i) {
      pending.push_back(std::async(std::launch::async, [this, &programs, i] { return check(programs[i]); }));
    }
    for (std::size_t i = base; i < end; ++i) results[i] = pending[i - base].get();
  }
  return results;
}

OracleCounters PropertyOracle::snapshot_counters() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return counters_;
}

}  // namespace preduce::oracle
