#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "preduce/syntax/program.hpp"

namespace preduce::oracle {

using syntax::SourceProgram;

/// The property test cannot run at all (work dir, missing script, ...).
class OracleSetupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Verdict { pass, fail, timeout };

/// One way of deciding the property for a program text.
class PropertyTest {
 public:
  virtual ~PropertyTest() = default;
  virtual Verdict run(const SourceProgram& program) = 0;
  /// True when concurrent run() calls are safe.
  [[nodiscard]] virtual bool parallel_safe() const { return false; }
};

/// In-process predicate over program text.
class PredicateTest final : public PropertyTest {
 public:
  explicit PredicateTest(std::function<bool(std::string_view)> predicate, bool parallel_safe = true)
      : predicate_(std::move(predicate)), parallel_safe_(parallel_safe) {}

  Verdict run(const SourceProgram& program) override {
    return predicate_(program.text()) ? Verdict::pass : Verdict::fail;
  }
  [[nodiscard]] bool parallel_safe() const override { return parallel_safe_; }

 private:
  std::function<bool(std::string_view)> predicate_;
  bool parallel_safe_;
};

struct ScriptConfig {
  std::filesystem::path script;
  /// File name the candidate is written to; the input file's basename.
  std::string candidate_name = "candidate";
  /// Parent of the per-check working directories; empty = fresh temp dir.
  std::filesystem::path work_root;
  std::chrono::milliseconds timeout{60'000};
  bool parallel_safe = false;
  bool keep_work_dirs = false;
};

/**
 * Interestingness script: each run writes the candidate to
 * `<fresh dir>/<candidate_name>`, executes the script with that directory as
 * its working directory (candidate name also passed as argv[1]), and passes
 * iff the script exits 0 before the timeout. Timed-out scripts are killed
 * with their whole process group.
 */
class ScriptTest final : public PropertyTest {
 public:
  explicit ScriptTest(ScriptConfig config);
  ~ScriptTest() override;
  ScriptTest(const ScriptTest&) = delete;
  ScriptTest& operator=(const ScriptTest&) = delete;

  Verdict run(const SourceProgram& program) override;
  [[nodiscard]] bool parallel_safe() const override { return config_.parallel_safe; }
  [[nodiscard]] const std::filesystem::path& work_root() const noexcept { return config_.work_root; }

 private:
  ScriptConfig config_;
  bool owns_root_ = false;
  std::mutex counter_mutex_;
  std::size_t next_dir_ = 0;
};

struct OracleCounters {
  std::size_t queries_total = 0;
  std::size_t cache_hits = 0;
  std::size_t executions = 0;
  std::size_t failures = 0;  ///< executions that returned fail
  std::size_t timeouts = 0;  ///< executions that timed out (also false)

  friend bool operator==(const OracleCounters&, const OracleCounters&) = default;
};

/**
 * ψ: program → bool with an exact-content cache. A given text is executed at
 * most once per oracle, even under concurrent callers. Calls are serialized
 * unless the test is parallel-safe and `jobs > 1`.
 */
class PropertyOracle {
 public:
  explicit PropertyOracle(std::shared_ptr<PropertyTest> test, int jobs = 1);

  bool check(const SourceProgram& program);
  /// Checks every program, running up to `jobs` at once when permitted.
  /// Results are in input order.
  std::vector<bool> check_batch(std::span<const SourceProgram> programs);

  [[nodiscard]] OracleCounters snapshot_counters() const;
  [[nodiscard]] int jobs() const noexcept { return jobs_; }
  [[nodiscard]] bool concurrent() const noexcept { return jobs_ > 1 && test_->parallel_safe(); }

 private:
  std::shared_ptr<PropertyTest> test_;
  int jobs_;
  mutable std::mutex mutex_;
  std::mutex exec_mutex_;
  std::unordered_map<std::string, std::shared_future<bool>> cache_;
  OracleCounters counters_;
};

}  // namespace preduce::oracle
