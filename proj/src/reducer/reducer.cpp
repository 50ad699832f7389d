#include "preduce/reducer/reducer.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <queue>
#include <sstream>
#include <tuple>

#include "preduce/reducer/ddmin.hpp"
#include "preduce/reducer/working_tree.hpp"
#include "preduce/syntax/errors.hpp"
#include "preduce/syntax/parser.hpp"
#include "preduce/util/process.hpp"

namespace preduce::reducer {
namespace fs = std::filesystem;
using syntax::NodeKind;
using syntax::ParseTree;

namespace {

using Clock = std::chrono::steady_clock;

// Renders edits of a working tree, verifies each candidate still parses and
// asks the oracle, lazily or in batches of `jobs` when the oracle allows it.
class CandidateRunner {
 public:
  CandidateRunner(const syntax::GrammarPtr& grammar, oracle::PropertyOracle& oracle)
      : grammar_(grammar), oracle_(oracle) {}

  SourceProgram materialize(const WorkingTree& tree, const TreeEdit& edit) {
    auto lexemes = tree.render(edit);
    std::string text = syntax::join_tokens(lexemes);
    ++candidates_;
    try {
      (void)syntax::parse(text, grammar_);
    } catch (const std::exception& e) {
      throw ReducerDefect("reducer produced an unparseable candidate (" + std::string(e.what()) + "):\n" + text);
    }
    return SourceProgram(std::move(text), grammar_->language_id(), lexemes.size());
  }

  // Index of the first passing edit; `passed` receives its program.
  std::optional<std::size_t> first_passing(const WorkingTree& tree, const std::vector<TreeEdit>& edits,
                                           SourceProgram* passed) {
    std::size_t step = oracle_.concurrent() ? static_cast<std::size_t>(oracle_.jobs()) : 1;
    for (std::size_t base = 0; base < edits.size(); base += step) {
      std::vector<SourceProgram> batch;
      std::vector<std::size_t> index;
      for (std::size_t i = base; i < std::min(edits.size(), base + step); ++i) {
        if (!tree.keeps_plus_lists(edits[i])) continue;
        batch.push_back(materialize(tree, edits[i]));
        index.push_back(i);
      }
      if (batch.empty()) continue;
      std::vector<bool> verdicts;
      if (batch.size() == 1) {
        verdicts.push_back(oracle_.check(batch[0]));
      } else {
        verdicts = oracle_.check_batch(batch);
      }
      for (std::size_t k = 0; k < batch.size(); ++k) {
        if (verdicts[k]) {
          if (passed != nullptr) *passed = std::move(batch[k]);
          return index[k];
        }
      }
    }
    return std::nullopt;
  }

  [[nodiscard]] std::size_t candidates() const noexcept { return candidates_; }

 private:
  syntax::GrammarPtr grammar_;
  oracle::PropertyOracle& oracle_;
  std::size_t candidates_ = 0;
};

// ddmin over `items`; the edit for a kept subset deletes everything else.
// Returns the kept items and updates `best` when something was removed.
std::vector<int> minimize_kept(const WorkingTree& tree, CandidateRunner& runner, const std::vector<int>& items,
                               SourceProgram& best) {
  return ddmin_by_rounds(items, [&](const std::vector<std::vector<int>>& subsets) -> std::optional<std::size_t> {
    std::vector<TreeEdit> edits;
    edits.reserve(subsets.size());
    for (const auto& kept : subsets) {
      TreeEdit e;
      for (int id : items) {
        if (std::find(kept.begin(), kept.end(), id) == kept.end()) e.deleted.push_back(id);
      }
      edits.push_back(std::move(e));
    }
    return runner.first_passing(tree, edits, &best);
  });
}

TreeEdit deletion_of_rest(const std::vector<int>& items, const std::vector<int>& kept) {
  TreeEdit e;
  for (int id : items) {
    if (std::find(kept.begin(), kept.end(), id) == kept.end()) e.deleted.push_back(id);
  }
  return e;
}

ParseTree reparse(const std::string& text, const syntax::GrammarPtr& grammar) {
  try {
    return syntax::parse(text, grammar);
  } catch (const std::exception& e) {
    throw ReducerDefect("reduced program no longer parses: " + std::string(e.what()));
  }
}

// One weight-ordered sweep over the tree. Returns true if anything was
// accepted; `best` then holds the new program.
bool perses_pass(const ParseTree& tree, CandidateRunner& runner, const ReductionConfig& config,
                 SourceProgram& best) {
  WorkingTree wt(tree);
  std::vector<std::size_t> rank(tree.node_count(), 0);
  {
    auto order = wt.preorder();
    for (std::size_t i = 0; i < order.size(); ++i) rank[static_cast<std::size_t>(order[i])] = i;
  }
  auto weights = wt.weights();

  // Heaviest first, document order among equals.
  using Entry = std::tuple<std::size_t, std::size_t, int>;
  auto worse = [](const Entry& a, const Entry& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
    return std::get<1>(a) > std::get<1>(b);
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> queue(worse);
  auto push = [&](int id) {
    if (weights[static_cast<std::size_t>(id)] > 0 && wt.node(id).kind != NodeKind::token) {
      queue.emplace(weights[static_cast<std::size_t>(id)], rank[static_cast<std::size_t>(id)], id);
    }
  };
  push(wt.root());

  bool changed = false;
  while (!queue.empty()) {
    auto [w, r, id] = queue.top();
    queue.pop();
    if (!wt.alive(id)) continue;
    (void)r;
    if (w != weights[static_cast<std::size_t>(id)]) {
      push(id);
      continue;
    }
    int next = id;
    const auto& n = wt.node(id);
    switch (n.kind) {
      case NodeKind::star:
      case NodeKind::plus: {
        std::vector<int> items = n.children;
        auto kept = minimize_kept(wt, runner, items, best);
        if (kept.size() < items.size()) {
          wt.apply(deletion_of_rest(items, kept));
          weights = wt.weights();
          changed = true;
        }
        break;
      }
      case NodeKind::optional:
        if (!n.children.empty()) {
          TreeEdit e;
          e.deleted.push_back(id);
          if (runner.first_passing(wt, {e}, &best)) {
            wt.apply(e);
            weights = wt.weights();
            changed = true;
          }
        }
        break;
      case NodeKind::rule:
        if (config.enable_subtree_replacement) {
          auto candidates = wt.same_rule_descendants(id);
          std::erase_if(candidates, [&](int d) { return weights[static_cast<std::size_t>(d)] >= w; });
          std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) {
            return weights[static_cast<std::size_t>(a)] < weights[static_cast<std::size_t>(b)];
          });
          std::vector<TreeEdit> edits;
          for (int d : candidates) edits.push_back(TreeEdit{{}, id, d});
          if (auto hit = runner.first_passing(wt, edits, &best)) {
            wt.apply(edits[*hit]);
            weights = wt.weights();
            next = edits[*hit].replace_with;
            changed = true;
          }
        }
        break;
      case NodeKind::token:
      case NodeKind::group:
        break;
    }
    if (next != id) {
      push(next);
      continue;
    }
    for (int c : wt.node(id).children) push(c);
  }
  return changed;
}

}  // namespace

ParseTree hdd_reduce(const ParseTree& tree, oracle::PropertyOracle& oracle) {
  CandidateRunner runner(tree.grammar_ptr(), oracle);
  ParseTree current = tree;
  SourceProgram best;
  for (int level = 0;; ++level) {
    WorkingTree wt(current);
    std::vector<int> items;
    bool deeper = false;
    for (int id : wt.preorder()) {
      int d = wt.depth(id);
      if (d > level) deeper = true;
      if (d == level && wt.deletable(id)) items.push_back(id);
    }
    if (!items.empty()) {
      auto kept = minimize_kept(wt, runner, items, best);
      if (kept.size() < items.size()) {
        wt.apply(deletion_of_rest(items, kept));
        current = reparse(syntax::join_tokens(wt.render()), tree.grammar_ptr());
      }
    }
    if (!deeper) break;
  }
  return current;
}

ReductionOutcome perses_reduce_impl(const ParseTree& tree, oracle::PropertyOracle& oracle,
                                    const ReductionConfig& config, SourceProgram original) {
  if (config.max_passes < 1) throw std::invalid_argument("max_passes must be at least 1");
  auto start = Clock::now();
  auto before = oracle.snapshot_counters();
  CandidateRunner runner(tree.grammar_ptr(), oracle);

  ReductionOutcome out;
  out.size_before = original.token_count();
  SourceProgram best = std::move(original);
  ParseTree current = tree;
  for (int pass = 0; pass < config.max_passes; ++pass) {
    ++out.passes;
    std::size_t size = best.token_count();
    if (!perses_pass(current, runner, config, best)) break;
    current = reparse(best.text(), tree.grammar_ptr());
    if (best.token_count() >= size) break;
  }
  out.program = std::move(best);
  out.size_after = out.program.token_count();
  out.oracle_queries = oracle.snapshot_counters().queries_total - before.queries_total;
  out.candidates = runner.candidates();
  out.wall_time = Clock::now() - start;
  return out;
}

ReductionOutcome perses_reduce(const ParseTree& tree, oracle::PropertyOracle& oracle, const ReductionConfig& config) {
  SourceProgram original(tree.serialize(), tree.grammar().language_id(), tree.token_count());
  return perses_reduce_impl(tree, oracle, config, std::move(original));
}

PersesReducer::PersesReducer(syntax::GrammarPtr grammar, ReductionConfig config)
    : grammar_(std::move(grammar)), config_(config) {
  if (config_.max_passes < 1) throw std::invalid_argument("max_passes must be at least 1");
}

ReductionOutcome PersesReducer::reduce(const SourceProgram& program, oracle::PropertyOracle& oracle) {
  auto tree = syntax::parse(program.text(), grammar_);
  return perses_reduce_impl(tree, oracle, config_, program);
}

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::string expand(std::string command, const std::string& key, const std::string& value) {
  for (std::size_t pos = command.find(key); pos != std::string::npos; pos = command.find(key, pos + value.size())) {
    command.replace(pos, key.size(), value);
  }
  return command;
}

}  // namespace

ExternalReducer::ExternalReducer(syntax::GrammarPtr grammar, ExternalReducerConfig config)
    : grammar_(std::move(grammar)), config_(std::move(config)) {
  if (config_.command.find("{file}") == std::string::npos) {
    throw std::invalid_argument("external reducer command needs a {file} placeholder");
  }
}

ReductionOutcome ExternalReducer::reduce(const SourceProgram& program, oracle::PropertyOracle& oracle) {
  auto start = Clock::now();
  auto before = oracle.snapshot_counters();
  ReductionOutcome out;
  out.size_before = program.token_count();
  out.program = program;

  fs::path dir = util::make_temp_dir("preduce-external");
  fs::path file = dir / config_.file_name;
  {
    std::ofstream f(file, std::ios::binary);
    f << program.text();
  }
  std::string command = expand(config_.command, "{file}", shell_quote(file.string()));
  if (!config_.test_script.empty()) {
    command = expand(command, "{test}", shell_quote(fs::absolute(config_.test_script).string()));
  }

  util::ProcessSpec spec;
  spec.argv = {"/bin/sh", "-c", command};
  spec.cwd = dir;
  spec.stdout_path = dir / ".reducer.stdout";
  spec.stderr_path = dir / ".reducer.stderr";
  spec.timeout = config_.timeout;
  (void)util::run_process(spec);

  std::ifstream in(file, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  std::error_code ec;
  fs::remove_all(dir, ec);

  try {
    auto reduced = SourceProgram::from_text(buf.str(), *grammar_);
    out.candidates = 1;
    if (reduced.token_count() < program.token_count() && oracle.check(reduced)) out.program = std::move(reduced);
  } catch (const syntax::LexError&) {
  }
  out.size_after = out.program.token_count();
  out.passes = 1;
  out.oracle_queries = oracle.snapshot_counters().queries_total - before.queries_total;
  out.wall_time = Clock::now() - start;
  return out;
}

}  // namespace preduce::reducer
