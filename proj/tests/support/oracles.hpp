// Brute-force reference implementations used by the tests. None of them call
// into the code they check: dominators come from path enumeration, coverage
// verdicts from a short-circuit evaluator working on the expression tree.
#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cfdg/coverage.hpp"
#include "cfdg/expr.hpp"
#include "cfdg/graph.hpp"

namespace oracle {

using cfdg::Cfg;
using cfdg::VertexId;

/// Dominators by intersecting the vertex sets of every simple path from the
/// single entry. Unreachable vertices get an empty set. Exponential; small
/// graphs only.
inline std::map<VertexId, std::set<VertexId>> dominators_by_paths(const Cfg& cfg) {
  std::map<VertexId, std::optional<std::set<VertexId>>> acc;
  auto entries = cfg.entry_indices();
  if (entries.size() != 1) return {};
  std::vector<std::size_t> path;
  std::vector<bool> on(cfg.size(), false);
  std::function<void(std::size_t)> walk = [&](std::size_t v) {
    path.push_back(v);
    on[v] = true;
    std::set<VertexId> here;
    for (auto p : path) here.insert(cfg.id(p));
    auto& slot = acc[cfg.id(v)];
    if (!slot) {
      slot = here;
    } else {
      std::set<VertexId> both;
      for (const auto& x : *slot)
        if (here.contains(x)) both.insert(x);
      slot = both;
    }
    for (auto s : cfg.succ(v))
      if (!on[s]) walk(s);
    on[v] = false;
    path.pop_back();
  };
  walk(entries.front());
  std::map<VertexId, std::set<VertexId>> out;
  for (const auto& v : cfg.vertices()) {
    auto it = acc.find(v);
    out[v] = it == acc.end() ? std::set<VertexId>{} : *it->second;
  }
  return out;
}

/// One test of a single-decision expression, seen through its conditions.
struct Evaluation {
  std::string name;
  std::map<std::size_t, bool> value;  // condition index -> value, if evaluated
  std::size_t last = 0;               // condition whose edge leaves the decision
  bool outcome = false;
};

/// Short-circuit evaluator on the expression tree. A condition is a maximal
/// subtree without && or || at its root.
class ExprModel {
 public:
  explicit ExprModel(const cfdg::DecisionExpr& e) : e_(e) { number(e.root()); }

  std::size_t conditions() const { return roots_.size(); }

  Evaluation run(const cfdg::Assignment& a, std::string name) const {
    Evaluation ev;
    ev.name = std::move(name);
    ev.outcome = eval(e_.root(), a, ev);
    return ev;
  }

 private:
  static bool sc(const cfdg::DecisionExpr::Node& n) {
    return !n.is_cond && (n.op == cfdg::OpKind::ScAnd || n.op == cfdg::OpKind::ScOr);
  }

  void number(std::size_t i) {
    const auto& n = e_.node(i);
    if (!sc(n)) {
      index_[i] = roots_.size();
      roots_.push_back(i);
      return;
    }
    number(n.left);
    number(n.right);
  }

  bool plain(std::size_t i, const cfdg::Assignment& a) const {
    const auto& n = e_.node(i);
    if (n.is_cond) return a.at(n.symbol) != n.negated;
    bool l = plain(n.left, a), r = plain(n.right, a);
    switch (n.op) {
      case cfdg::OpKind::And:
      case cfdg::OpKind::ScAnd: return l && r;
      case cfdg::OpKind::Or:
      case cfdg::OpKind::ScOr: return l || r;
      case cfdg::OpKind::Xor: return l != r;
    }
    return false;
  }

  bool eval(std::size_t i, const cfdg::Assignment& a, Evaluation& ev) const {
    const auto& n = e_.node(i);
    if (!sc(n)) {
      bool v = plain(i, a);
      ev.value[index_.at(i)] = v;
      ev.last = index_.at(i);
      return v;
    }
    bool l = eval(n.left, a, ev);
    if (n.op == cfdg::OpKind::ScAnd && !l) return false;
    if (n.op == cfdg::OpKind::ScOr && l) return true;
    return eval(n.right, a, ev);
  }

  const cfdg::DecisionExpr& e_;
  std::vector<std::size_t> roots_;
  std::map<std::size_t, std::size_t> index_;
};

/// Satisfied and total obligations per kind.
using KindCounts = std::map<cfdg::ObligationKind, std::pair<std::size_t, std::size_t>>;

inline KindCounts counts_of(const cfdg::CoverageReport& r) {
  KindCounts out;
  for (const auto& o : r.obligations) {
    auto& c = out[o.kind];
    c.first += o.satisfied() ? 1 : 0;
    c.second += 1;
  }
  return out;
}

/// The coverage conditions evaluated directly on a set of evaluations of one
/// decision with `k` conditions. Graph shape: entry, k conditions, T, F, exit.
inline KindCounts coverage_counts(const std::vector<Evaluation>& suite, std::size_t k,
                                  cfdg::Criterion criterion, cfdg::Semantics semantics,
                                  cfdg::LoopMode mode) {
  using K = cfdg::ObligationKind;
  using cfdg::Criterion;
  const bool edge_set = mode == cfdg::LoopMode::EdgeSet;
  KindCounts out;
  auto add = [&](K kind, bool ok) {
    auto& c = out[kind];
    c.first += ok ? 1 : 0;
    c.second += 1;
  };
  auto any = [&](auto pred) {
    for (const auto& t : suite)
      if (pred(t)) return true;
    return false;
  };

  auto sc = [&] {
    add(K::VertexVisit, !suite.empty());  // entry
    add(K::VertexVisit, !suite.empty());  // exit
    add(K::VertexVisit, any([](const Evaluation& t) { return t.outcome; }));
    add(K::VertexVisit, any([](const Evaluation& t) { return !t.outcome; }));
    for (std::size_t c = 0; c < k; ++c)
      add(K::VertexVisit, any([&](const Evaluation& t) { return t.value.contains(c); }));
  };
  // One run passes a loop-free decision once, so a single run never shows
  // two outcomes or both edges of a condition.
  auto dc = [&] {
    bool t = any([](const Evaluation& e) { return e.outcome; });
    bool f = any([](const Evaluation& e) { return !e.outcome; });
    add(K::DecisionOutcome, !edge_set && t && f);
  };
  auto cc = [&] {
    for (std::size_t c = 0; c < k; ++c) {
      bool t = any([&](const Evaluation& e) { return e.value.contains(c) && e.value.at(c); });
      bool f = any([&](const Evaluation& e) { return e.value.contains(c) && !e.value.at(c); });
      add(K::ConditionOutcome, !edge_set && t && f);
    }
  };
  auto agree = [&](const Evaluation& a, const Evaluation& b, std::size_t v) {
    for (std::size_t c = 0; c < k; ++c) {
      if (c == v) continue;
      bool in_a = a.value.contains(c), in_b = b.value.contains(c);
      switch (semantics) {
        case cfdg::Semantics::PaperLiteral: break;
        case cfdg::Semantics::Strict:
          if (in_a != in_b || (in_a && a.value.at(c) != b.value.at(c))) return false;
          break;
        case cfdg::Semantics::Masking:
          if (in_a && in_b && a.value.at(c) != b.value.at(c)) return false;
          break;
      }
    }
    return true;
  };
  enum class Pair { Mcc, Fpc, Mcdc };
  auto pairs = [&](Pair rule) {
    for (std::size_t v = 0; v < k; ++v) {
      bool ok = false;
      for (const auto& a : suite)
        for (const auto& b : suite) {
          if (!a.value.contains(v) || !b.value.contains(v) || a.value.at(v) == b.value.at(v))
            continue;
          bool flip = a.outcome != b.outcome;
          if (rule == Pair::Fpc) ok |= flip;
          if (rule == Pair::Mcc) ok |= agree(a, b, v);
          if (rule == Pair::Mcdc) {
            if (semantics == cfdg::Semantics::PaperLiteral) flip = flip && a.last == b.last;
            ok |= flip && agree(a, b, v);
          }
        }
      add(K::IndependencePair, ok);
    }
  };

  switch (criterion) {
    case Criterion::SC: sc(); break;
    case Criterion::DC: dc(); break;
    case Criterion::CC: cc(); break;
    case Criterion::DCC: sc(); dc(); cc(); break;
    case Criterion::MCC: pairs(Pair::Mcc); break;
    case Criterion::FPC: pairs(Pair::Fpc); break;
    case Criterion::MCDC:
      add(K::EntryVisit, !suite.empty());
      add(K::ExitVisit, !suite.empty());
      dc();
      cc();
      pairs(Pair::Mcdc);
      break;
  }
  return out;
}

}  // namespace oracle
