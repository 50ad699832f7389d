#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "preduce/oracle/oracle.hpp"
#include "preduce/util/process.hpp"

using namespace preduce::oracle;
namespace fs = std::filesystem;

namespace {

class ScratchDir {
 public:
  ScratchDir() : path_(preduce::util::make_temp_dir("preduce-oracle-test")) {}
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

  fs::path script(const std::string& name, const std::string& body) const {
    fs::path p = path_ / name;
    std::ofstream(p) << "#!/bin/sh\n" << body << "\n";
    fs::permissions(p, fs::perms::owner_all);
    return p;
  }

 private:
  fs::path path_;
};

SourceProgram program(std::string text) { return SourceProgram(std::move(text), "c", 0); }

std::shared_ptr<ScriptTest> script_test(const fs::path& script, const fs::path& root,
                                        std::chrono::milliseconds timeout = std::chrono::seconds(10)) {
  ScriptConfig cfg;
  cfg.script = script;
  cfg.candidate_name = "prog.c";
  cfg.work_root = root;
  cfg.timeout = timeout;
  return std::make_shared<ScriptTest>(cfg);
}

}  // namespace

TEST(Oracle, ExitZeroPasses) {
  ScratchDir dir;
  PropertyOracle oracle(script_test(dir.script("ok.sh", "exit 0"), dir.path() / "work"));
  EXPECT_TRUE(oracle.check(program("int x;")));
}

TEST(Oracle, GrepScriptDecidesByContent) {
  ScratchDir dir;
  auto script = dir.script("grep.sh", "grep -q 'ad\\[2\\]\\[1\\]\\[0\\]' \"$1\"");
  PropertyOracle oracle(script_test(script, dir.path() / "work"));
  EXPECT_TRUE(oracle.check(program("int main(){ s = s ^ ad[2][1][0]; }")));
  EXPECT_FALSE(oracle.check(program("")));
}

TEST(Oracle, ScriptRunsInFreshDirectoryWithCandidateFile) {
  ScratchDir dir;
  // Fails if anything but the candidate (and redirected output) is present.
  auto script = dir.script("fresh.sh",
                           "[ \"$1\" = prog.c ] || exit 1\n"
                           "[ -f prog.c ] || exit 1\n"
                           "n=$(ls | wc -l)\n[ \"$n\" -eq 1 ] || exit 1\n"
                           "touch leftover");
  PropertyOracle oracle(script_test(script, dir.path() / "work"));
  EXPECT_TRUE(oracle.check(program("a;")));
  EXPECT_TRUE(oracle.check(program("b;")));
}

TEST(Oracle, CacheHitSkipsExecution) {
  ScratchDir dir;
  PropertyOracle oracle(script_test(dir.script("ok.sh", "exit 0"), dir.path() / "work"));
  oracle.check(program("x;"));
  auto first = oracle.snapshot_counters();
  EXPECT_TRUE(oracle.check(program("x;")));
  auto second = oracle.snapshot_counters();
  EXPECT_EQ(second.executions, first.executions);
  EXPECT_EQ(second.cache_hits, first.cache_hits + 1);
}

TEST(Oracle, FreshCountersAreZero) {
  PropertyOracle oracle(std::make_shared<PredicateTest>([](std::string_view) { return true; }));
  EXPECT_EQ(oracle.snapshot_counters(), OracleCounters{});
}

TEST(Oracle, CountersTrackDistinctAndRepeatedQueries) {
  PropertyOracle oracle(std::make_shared<PredicateTest>([](std::string_view t) { return t.size() > 1; }));
  oracle.check(program("a"));
  oracle.check(program("bb"));
  oracle.check(program("ccc"));
  oracle.check(program("bb"));
  auto c = oracle.snapshot_counters();
  EXPECT_EQ(c.queries_total, 4u);
  EXPECT_EQ(c.cache_hits, 1u);
  EXPECT_EQ(c.executions, 3u);
  EXPECT_EQ(c.failures, 1u);
  EXPECT_EQ(c.queries_total, c.cache_hits + c.executions);
}

TEST(Oracle, CacheKeyIsExactText) {
  PropertyOracle oracle(std::make_shared<PredicateTest>([](std::string_view) { return true; }));
  oracle.check(program("a;"));
  oracle.check(program("a ;"));
  EXPECT_EQ(oracle.snapshot_counters().executions, 2u);
}

TEST(Oracle, TimeoutIsFalseAndCounted) {
  ScratchDir dir;
  auto script = dir.script("slow.sh", "sleep 5");
  PropertyOracle oracle(script_test(script, dir.path() / "work", std::chrono::milliseconds(200)));
  auto t0 = std::chrono::steady_clock::now();
  EXPECT_FALSE(oracle.check(program("x;")));
  EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(3));
  auto c = oracle.snapshot_counters();
  EXPECT_EQ(c.timeouts, 1u);
  EXPECT_EQ(c.failures, 0u);
}

TEST(Oracle, MissingScriptIsSetupError) {
  ScratchDir dir;
  ScriptConfig cfg;
  cfg.script = dir.path() / "absent.sh";
  EXPECT_THROW(ScriptTest{cfg}, OracleSetupError);
}

TEST(Oracle, NonExecutableScriptIsSetupError) {
  ScratchDir dir;
  fs::path p = dir.path() / "plain.sh";
  std::ofstream(p) << "exit 0\n";
  fs::permissions(p, fs::perms::owner_read | fs::perms::owner_write);
  ScriptConfig cfg;
  cfg.script = p;
  EXPECT_THROW(ScriptTest{cfg}, OracleSetupError);
}

TEST(Oracle, UncreatableWorkRootIsSetupError) {
  ScratchDir dir;
  fs::path file = dir.path() / "file";
  std::ofstream(file) << "x";
  ScriptConfig cfg;
  cfg.script = dir.script("ok.sh", "exit 0");
  cfg.work_root = file / "sub";
  EXPECT_THROW(ScriptTest{cfg}, OracleSetupError);
}

TEST(Oracle, ConcurrentBatchRunsEachTextOnce) {
  std::atomic<int> runs{0};
  auto test = std::make_shared<PredicateTest>([&](std::string_view t) {
    ++runs;
    return t.find('z') != std::string_view::npos;
  });
  PropertyOracle oracle(test, 4);
  ASSERT_TRUE(oracle.concurrent());
  std::vector<SourceProgram> batch;
  for (int i = 0; i < 40; ++i) batch.push_back(program(std::string(1, static_cast<char>('a' + i % 26))));
  auto verdicts = oracle.check_batch(batch);
  ASSERT_EQ(verdicts.size(), batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) EXPECT_EQ(verdicts[i], batch[i].text() == "z");
  EXPECT_EQ(runs.load(), 26);
  auto c = oracle.snapshot_counters();
  EXPECT_EQ(c.queries_total, 40u);
  EXPECT_EQ(c.executions, 26u);
}

TEST(Oracle, ParallelScriptsWithSeparateDirectories) {
  ScratchDir dir;
  ScriptConfig cfg;
  cfg.script = dir.script("len.sh", "[ $(wc -c < \"$1\") -gt 2 ]");
  cfg.work_root = dir.path() / "work";
  cfg.parallel_safe = true;
  PropertyOracle oracle(std::make_shared<ScriptTest>(cfg), 4);
  std::vector<SourceProgram> batch{program("a"), program("abc"), program("ab"), program("abcd")};
  auto v = oracle.check_batch(batch);
  EXPECT_EQ(v, (std::vector<bool>{false, true, false, true}));
}
