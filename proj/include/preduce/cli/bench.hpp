#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "preduce/cli/session.hpp"

namespace preduce::cli {

/// One corpus entry, read from `<dir>/entry.json`:
///   {"program": "bug.c", "test": "check.sh", "lang": "c",
///    "grammar": "x.grammar", "mock_fixtures": "fixtures"}
/// (grammar and mock_fixtures optional; paths relative to the entry).
struct BenchEntry {
  std::string name;
  std::filesystem::path program;
  std::filesystem::path test;
  std::string lang;
  std::filesystem::path grammar;
  std::filesystem::path mock_fixtures;
};

struct BenchOptions {
  std::filesystem::path corpus;
  std::vector<std::string> configs{"generic", "llm"};
  int repeats = 5;
  std::filesystem::path csv;
  std::filesystem::path out_dir;
  /// Flags shared by every run (model, budgets, timeout, ...).
  SessionOptions base;
};

struct ConfigStats {
  double size_mean = 0, size_std = 0, time_mean = 0, time_std = 0;
};

struct BenchRow {
  std::string entry;
  bool ok = true;
  std::string error;
  std::size_t original_tokens = 0;
  std::vector<ConfigStats> stats;  ///< parallel to BenchOptions::configs
};

std::vector<BenchEntry> load_corpus(const std::filesystem::path& corpus);

/// Mean and sample standard deviation (0 for fewer than two values).
std::pair<double, double> mean_std(const std::vector<double>& values);

/// Runs every entry under every config `repeats` times. Failures are kept
/// per entry; the batch continues.
std::vector<BenchRow> run_bench(const BenchOptions& options, std::ostream& log);

void write_csv(std::ostream& out, const std::vector<std::string>& configs, const std::vector<BenchRow>& rows);
std::string bench_table(const std::vector<std::string>& configs, const std::vector<BenchRow>& rows);

}  // namespace preduce::cli
