#include "preduce/cli/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <ostream>
#include <sstream>

namespace preduce::cli {

namespace fs = std::filesystem;

namespace {

BenchEntry read_entry(const fs::path& dir) {
  std::ifstream in(dir / "entry.json");
  if (!in) throw ConfigError("cannot read " + (dir / "entry.json").string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError((dir / "entry.json").string() + ": " + e.what());
  }
  auto path_of = [&](const char* key) -> fs::path {
    if (!j.contains(key)) return {};
    return dir / j.at(key).get<std::string>();
  };
  BenchEntry e;
  e.name = dir.filename().string();
  try {
    e.program = path_of("program");
    e.test = path_of("test");
    e.lang = j.value("lang", "");
    e.grammar = path_of("grammar");
    e.mock_fixtures = path_of("mock_fixtures");
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError((dir / "entry.json").string() + ": " + ex.what());
  }
  if (e.program.empty() || e.test.empty()) {
    throw ConfigError((dir / "entry.json").string() + ": \"program\" and \"test\" are required");
  }
  return e;
}

SessionOptions options_for(const BenchOptions& opts, const BenchEntry& entry, const std::string& config) {
  SessionOptions s = opts.base;
  s.input = entry.program;
  s.test = entry.test;
  s.lang = entry.lang;
  s.grammar = entry.grammar;
  if (!entry.mock_fixtures.empty()) s.mock_fixtures = entry.mock_fixtures;
  s.write_min = false;
  if (config == "generic") {
    s.generic_only = true;
    s.reducer = "perses";
  } else if (config == "llm") {
    s.generic_only = false;
    s.reducer = "perses";
  } else if (config == "external") {
    s.generic_only = true;
    s.reducer = "external";
  } else if (config == "llm-external") {
    s.generic_only = false;
    s.reducer = "external";
  } else {
    throw ConfigError("unknown bench config '" + config + "'");
  }
  return s;
}

std::string fixed(double v, int digits) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(digits) << v;
  return o.str();
}

}  // namespace

std::vector<BenchEntry> load_corpus(const fs::path& corpus) {
  std::error_code ec;
  if (!fs::is_directory(corpus, ec)) throw ConfigError("corpus is not a directory: " + corpus.string());
  std::vector<fs::path> dirs;
  for (const auto& d : fs::directory_iterator(corpus)) {
    auto name = d.path().filename().string();
    if (!d.is_directory() || name.empty() || name[0] == '_' || name[0] == '.') continue;
    if (fs::exists(d.path() / "entry.json")) dirs.push_back(d.path());
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<BenchEntry> out;
  for (const auto& d : dirs) out.push_back(read_entry(d));
  if (out.empty()) throw ConfigError("no entries in corpus " + corpus.string());
  return out;
}

std::pair<double, double> mean_std(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  double sum = 0;
  for (double v : values) sum += v;
  double mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double sq = 0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size() - 1))};
}

std::vector<BenchRow> run_bench(const BenchOptions& opts, std::ostream& log) {
  if (opts.repeats < 1) throw ConfigError("--repeats must be at least 1");
  if (opts.configs.empty()) throw ConfigError("no bench configs given");
  for (const auto& c : opts.configs) (void)options_for(opts, BenchEntry{"", "x", "x", "", {}, {}}, c);
  auto entries = load_corpus(opts.corpus);
  fs::path out_dir = opts.out_dir.empty() ? fs::path("bench-out") : opts.out_dir;

  std::vector<BenchRow> rows;
  for (const auto& entry : entries) {
    BenchRow row;
    row.entry = entry.name;
    try {
      for (const auto& config : opts.configs) {
        std::vector<double> sizes, times;
        for (int rep = 0; rep < opts.repeats; ++rep) {
          auto s = options_for(opts, entry, config);
          s.run_dir = out_dir / "bench" / entry.name / (config + "-" + std::to_string(rep + 1));
          std::error_code ec;
          fs::remove_all(s.run_dir, ec);
          log << entry.name << " " << config << " #" << rep + 1 << "\n";
          auto result = run_session(s);
          row.original_tokens = result.run.original_tokens;
          sizes.push_back(static_cast<double>(result.run.program.token_count()));
          times.push_back(result.run.wall_time.count());
        }
        ConfigStats st;
        std::tie(st.size_mean, st.size_std) = mean_std(sizes);
        std::tie(st.time_mean, st.time_std) = mean_std(times);
        row.stats.push_back(st);
      }
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
      row.stats.clear();
      log << entry.name << " ERROR: " << e.what() << "\n";
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_csv(std::ostream& out, const std::vector<std::string>& configs, const std::vector<BenchRow>& rows) {
  out << "entry,status,original_tokens";
  for (const auto& c : configs) out << ',' << c << "_size_mean," << c << "_size_std," << c << "_time_mean," << c << "_time_std";
  out << '\n';
  for (const auto& r : rows) {
    out << r.entry << ',' << (r.ok ? "OK" : "ERROR") << ',';
    if (r.ok) out << r.original_tokens;
    for (std::size_t i = 0; i < configs.size(); ++i) {
      if (r.ok && i < r.stats.size()) {
        const auto& s = r.stats[i];
        out << ',' << fixed(s.size_mean, 2) << ',' << fixed(s.size_std, 2) << ',' << fixed(s.time_mean, 3) << ','
            << fixed(s.time_std, 3);
      } else {
        out << ",,,,";
      }
    }
    out << '\n';
  }
}

std::string bench_table(const std::vector<std::string>& configs, const std::vector<BenchRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> head{"entry", "original"};
  for (const auto& c : configs) {
    head.push_back(c + " size");
    head.push_back(c + " time");
  }
  cells.push_back(head);
  for (const auto& r : rows) {
    std::vector<std::string> line{r.entry};
    if (!r.ok) {
      line.push_back("ERROR: " + r.error);
      cells.push_back(line);
      continue;
    }
    line.push_back(std::to_string(r.original_tokens));
    for (const auto& s : r.stats) {
      line.push_back(fixed(s.size_mean, 1) + " ± " + fixed(s.size_std, 1));
      line.push_back(report::format_hms(s.time_mean) + " ± " + report::format_hms(s.time_std));
    }
    cells.push_back(line);
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& line : cells) {
    if (line.size() != head.size()) continue;
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  std::ostringstream o;
  for (const auto& line : cells) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (i) o << "  ";
      if (line.size() == head.size() && i + 1 < line.size()) {
        o << std::left << std::setw(static_cast<int>(width[i])) << line[i];
      } else {
        o << line[i];
      }
    }
    o << '\n';
  }
  return o.str();
}

}  // namespace preduce::cli
