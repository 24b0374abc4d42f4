// Exhaustive search for the smallest test suites that meet a criterion on a
// single decision expression.
//
// Assignments that drive the same path are interchangeable for every
// criterion, so the search runs over distinct paths. Each path is named by
// the lowest assignment producing it, with '-' for inputs the path never
// reads ("TT", "TF", "F-" for a && b).
#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cfdg/coverage.hpp"
#include "cfdg/expr.hpp"
#include "cfdg/inference.hpp"

namespace cfdg {

struct RunClass {
  std::string name;
  Assignment assignment;
  Run run;
};

/// One run per distinct path, in order of the lowest assignment.
inline std::vector<RunClass> run_classes(const DecisionExpr& expr, std::size_t max_symbols = 16) {
  auto symbols = expr.symbols();
  auto g = expr_to_cfg(expr);
  std::vector<RunClass> out;
  std::set<std::vector<VertexId>> seen;
  for (auto& [a, run] : enumerate_runs(expr, max_symbols)) {
    if (!seen.insert(run.path).second) continue;
    std::set<std::string> read;
    for (const auto& v : run.path)
      if (g.cfg.contains(v) && g.cfg.is_condition(g.cfg.index_of(v)))
        for (const auto& s : g.condition(v).symbols) read.insert(s);
    std::set<std::string> unread;
    for (const auto& s : symbols)
      if (!read.contains(s)) unread.insert(s);
    auto name = vector_string(symbols, a, unread);
    run.test_name = name;
    out.push_back({name, a, run});
  }
  return out;
}

struct MinimalSuites {
  /// Unset when even the suite of every run misses an obligation.
  std::optional<std::size_t> minimal_size;
  std::vector<TestSuite> suites;
  /// Obligations no suite can meet, as "kind subject".
  std::vector<std::string> unsatisfiable;
};

inline MinimalSuites minimal_suites(const DecisionExpr& expr, Criterion criterion,
                                    Semantics semantics = Semantics::Masking,
                                    LoopMode loop_mode = LoopMode::Traversal) {
  constexpr std::size_t kMaxSymbols = 10;
  if (expr.symbols().size() > kMaxSymbols)
    throw HarnessError(HarnessErrorKind::TooManySymbols,
                       "exhaustive suite search supports at most " + std::to_string(kMaxSymbols) +
                           " symbols");
  auto classes = run_classes(expr, kMaxSymbols);
  auto cfdg = create_cfdg(expr_to_cfg(expr).cfg).cfdg;
  EvalOptions opt{semantics, loop_mode};

  MinimalSuites result;
  {
    TestSuite all;
    for (const auto& c : classes) all.add(c.run);
    auto report = evaluate(cfdg, all, criterion, opt);
    for (const auto& o : report.obligations)
      if (!o.satisfied())
        result.unsatisfiable.push_back(std::string(to_string(o.kind)) + " " + o.subject);
    if (!result.unsatisfiable.empty()) return result;
  }

  const std::size_t n = classes.size();
  for (std::size_t k = 0; k <= n; ++k) {
    // Walk every k-subset in lexicographic order of indices.
    std::vector<std::size_t> pick(k);
    for (std::size_t i = 0; i < k; ++i) pick[i] = i;
    while (true) {
      TestSuite suite;
      for (auto i : pick) suite.add(classes[i].run);
      if (evaluate(cfdg, suite, criterion, opt).complete()) result.suites.push_back(std::move(suite));
      std::size_t i = k;
      while (i > 0 && pick[i - 1] == n - k + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
    if (!result.suites.empty()) {
      result.minimal_size = k;
      break;
    }
  }
  return result;
}

}  // namespace cfdg
