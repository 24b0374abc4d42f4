// Decision inference: groups condition vertices of a Cfg into decisions.
//
// Every condition vertex starts in its own decision. A merge pass walks
// forward from each decision through successor conditions and fuses a
// decision with the one reached through successor s when the two share a
// successor other than s. Short-circuit operators always produce that shape:
// every operand of `&&` sends its false edge to one common target, every
// operand of `||` its true edge.
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cfdg/graph.hpp"

namespace cfdg {

struct MergeStats {
  /// How often each vertex was visited: once when the top-level loop starts
  /// a merge from it, once when a merge marks it visited.
  std::map<VertexId, std::size_t> vertex_visit_counts;
  std::size_t merges_performed = 0;
  /// Condition vertices with an edge to themselves; such edges are ignored.
  std::vector<VertexId> self_loops;

  std::size_t max_visit_count() const {
    std::size_t m = 0;
    for (const auto& [v, n] : vertex_visit_counts) m = std::max(m, n);
    return m;
  }
};

/// Shared mutable state of one inference run: the vertex to decision map and
/// the visited flags. Decisions are shared objects; merging two of them makes
/// every member of either map to the union.
class DecisionMap {
 public:
  using Index = Cfg::Index;

  explicit DecisionMap(const Cfg& cfg);

  /// Runs the merge procedure on the decision currently holding `member`.
  /// Returns the successors of that decision after merging.
  std::set<VertexId> merge(const VertexId& member);

  /// Top-level pass over all condition vertices in ascending VertexId order.
  void merge_all();

  bool visited(const VertexId& v) const { return visited_[cfg_->index_of(v)]; }

  /// Members of the decision currently holding `member`.
  std::set<VertexId> decision_of(const VertexId& member) const;

  std::vector<Decision> decisions() const;
  MergeStats stats() const;

 private:
  struct Group {
    Index parent;
    Index entry;
    std::vector<Index> members;
    std::unordered_set<Index> successors;
  };

  Index root(Index g) const {
    while (groups_[g].parent != g) g = groups_[g].parent;
    return g;
  }
  Index group_of(Index vertex) const { return root(owner_[vertex]); }
  void touch(Index v);
  Index run_merge(Index group);
  bool shares_successor(Index d1, Index s, Index d2) const;
  void unite(Index d1, Index d2);

  const Cfg* cfg_;
  std::vector<Index> rank_;     // position in reverse postorder
  std::vector<Index> owner_;    // vertex -> group, kNone for non-conditions
  std::vector<Group> groups_;
  std::vector<bool> visited_;
  std::vector<std::uint8_t> visits_;
  std::vector<std::size_t> discovered_;
  std::size_t discovery_clock_ = 0;
  std::size_t merges_ = 0;
  std::vector<Index> self_loops_;

  static constexpr Index kNone = static_cast<Index>(-1);
};

inline DecisionMap::DecisionMap(const Cfg& cfg)
    : cfg_(&cfg),
      rank_(cfg.size(), 0),
      owner_(cfg.size(), kNone),
      visited_(cfg.size(), false),
      visits_(cfg.size(), 0),
      discovered_(cfg.size(), kNone) {
  auto order = reverse_postorder(cfg);
  for (std::size_t k = 0; k < order.size(); ++k) rank_[order[k]] = k;
  for (Index v = 0; v < cfg.size(); ++v) {
    if (!cfg.is_condition(v)) continue;
    Group g{groups_.size(), v, {v}, {}};
    for (auto s : cfg.succ(v)) {
      if (s == v) {
        self_loops_.push_back(v);
        continue;
      }
      g.successors.insert(s);
    }
    owner_[v] = groups_.size();
    groups_.push_back(std::move(g));
  }
}

inline void DecisionMap::touch(Index v) {
  ++visits_[v];
  if (discovered_[v] == kNone) discovered_[v] = discovery_clock_++;
}

inline bool DecisionMap::shares_successor(Index d1, Index s, Index d2) const {
  const auto& a = groups_[d1].successors;
  const auto& b = groups_[d2].successors;
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  for (auto x : small)
    if (x != s && large.contains(x)) return true;
  return false;
}

inline void DecisionMap::unite(Index d1, Index d2) {
  if (d1 == d2) return;
  ++merges_;
  // Union by size; the surviving group keeps d1's entry.
  Index keep = d1, drop = d2;
  if (groups_[d1].members.size() < groups_[d2].members.size()) std::swap(keep, drop);
  auto entry = groups_[d1].entry;
  auto& k = groups_[keep];
  auto& d = groups_[drop];
  k.members.insert(k.members.end(), d.members.begin(), d.members.end());
  if (k.successors.size() < d.successors.size()) std::swap(k.successors, d.successors);
  k.successors.insert(d.successors.begin(), d.successors.end());
  k.entry = entry;
  d.parent = keep;
  d.members.clear();
  d.successors.clear();
}

// Explicit-stack form of the recursive merge so that long chains of
// conditions cannot exhaust the call stack.
inline DecisionMap::Index DecisionMap::run_merge(Index start) {
  struct Frame {
    Index group;                 // D1, possibly stale; resolve with root()
    std::vector<Index> pending;  // successors(D1) snapshot, in visit order
    std::size_t next = 0;
    Index entered = kNone;       // s whose decision is being merged below
  };

  auto snapshot = [&](Index group) {
    const auto& succ = groups_[group].successors;
    std::vector<Index> out(succ.begin(), succ.end());
    // Topological order: a successor that can reach another is tried first.
    std::sort(out.begin(), out.end(), [&](Index a, Index b) { return rank_[a] < rank_[b]; });
    return out;
  };

  std::vector<Frame> stack;
  stack.push_back(Frame{start, snapshot(start)});
  Index returned = kNone;

  while (true) {
    auto& f = stack.back();
    if (f.entered != kNone) {
      Index d1 = root(f.group);
      Index d2 = root(returned);
      if (d1 != d2 && shares_successor(d1, f.entered, d2)) unite(d1, d2);
      f.entered = kNone;
    }
    if (f.next < f.pending.size()) {
      Index s = f.pending[f.next++];
      if (visited_[s]) continue;
      visited_[s] = true;
      touch(s);
      if (!cfg_->is_condition(s)) continue;
      f.entered = s;
      Index d2 = group_of(s);
      stack.push_back(Frame{d2, snapshot(d2)});
      continue;
    }
    returned = root(f.group);
    stack.pop_back();
    if (stack.empty()) return returned;
  }
}

inline std::set<VertexId> DecisionMap::merge(const VertexId& member) {
  Index v = cfg_->index_of(member);
  if (owner_[v] == kNone) {
    throw GraphError(GraphErrorKind::InvalidDecision,
                     "vertex '" + member + "' is not a condition", {member});
  }
  Index g = run_merge(group_of(v));
  std::set<VertexId> out;
  for (auto s : groups_[g].successors) out.insert(cfg_->id(s));
  return out;
}

inline void DecisionMap::merge_all() {
  std::vector<Index> conditions;
  for (Index v = 0; v < cfg_->size(); ++v)
    if (owner_[v] != kNone) conditions.push_back(v);
  std::sort(conditions.begin(), conditions.end(),
            [&](Index a, Index b) { return cfg_->id(a) < cfg_->id(b); });
  for (auto v : conditions) {
    if (visited_[v]) continue;
    touch(v);
    run_merge(group_of(v));
  }
}

inline std::set<VertexId> DecisionMap::decision_of(const VertexId& member) const {
  Index v = cfg_->index_of(member);
  std::set<VertexId> out;
  if (owner_[v] == kNone) return out;
  for (auto m : groups_[group_of(v)].members) out.insert(cfg_->id(m));
  return out;
}

inline std::vector<Decision> DecisionMap::decisions() const {
  struct Found {
    std::size_t first_seen;
    Index group;
  };
  std::vector<Found> found;
  for (Index g = 0; g < groups_.size(); ++g) {
    if (groups_[g].parent != g) continue;
    std::size_t first = kNone;
    for (auto m : groups_[g].members) first = std::min(first, discovered_[m]);
    found.push_back({first, g});
  }
  // Decisions are numbered in order of first member discovery; members never
  // touched (merge() used directly) fall back to vertex order.
  std::sort(found.begin(), found.end(), [&](const Found& a, const Found& b) {
    if (a.first_seen != b.first_seen) return a.first_seen < b.first_seen;
    return groups_[a.group].entry < groups_[b.group].entry;
  });
  std::vector<Decision> out;
  for (const auto& f : found) {
    const auto& g = groups_[f.group];
    Decision d;
    for (auto m : g.members) d.members.insert(cfg_->id(m));
    d.entry = cfg_->id(g.entry);
    d.id = out.size();
    out.push_back(std::move(d));
  }
  return out;
}

inline MergeStats DecisionMap::stats() const {
  MergeStats s;
  for (Index v = 0; v < cfg_->size(); ++v)
    if (visits_[v] > 0) s.vertex_visit_counts.emplace(cfg_->id(v), visits_[v]);
  s.merges_performed = merges_;
  for (auto v : self_loops_) s.self_loops.push_back(cfg_->id(v));
  return s;
}

struct CfdgResult {
  Cfdg cfdg;
  MergeStats stats;
};

inline CfdgResult create_cfdg(const Cfg& cfg) {
  DecisionMap map(cfg);
  map.merge_all();
  return CfdgResult{Cfdg(cfg, map.decisions()), map.stats()};
}

struct NormalizeResult {
  Cfg cfg;
  /// Removed vertex -> the condition its incoming edge now points to.
  std::map<VertexId, VertexId> contracted;
};

/// Contracts pass-through vertices (indegree 1, outdegree 1) sitting between
/// two condition vertices. A vertex is kept when contracting it would give its
/// predecessor a parallel edge, and when its edge onward is a back edge: a
/// loop latch is the body of the loop, not part of its decision.
inline NormalizeResult normalize_interstitial(const Cfg& cfg) {
  NormalizeResult result;
  auto roots = cfg.entry_indices();
  DominatorTree dom(cfg, roots);
  std::vector<bool> removed(cfg.size(), false);
  std::map<std::pair<Cfg::Index, Cfg::Index>, Cfg::Index> redirect;  // (pred, p) -> succ
  std::set<std::pair<Cfg::Index, Cfg::Index>> added;

  for (Cfg::Index p = 0; p < cfg.size(); ++p) {
    if (cfg.indegree(p) != 1 || cfg.outdegree(p) != 1) continue;
    auto in = cfg.pred(p)[0];
    auto out = cfg.succ(p)[0];
    if (in == p || out == p || !cfg.is_condition(in) || !cfg.is_condition(out)) continue;
    if (dom.dominates(out, p)) continue;
    if (removed[in] || removed[out]) continue;
    if (cfg.has_edge(in, out) || added.contains({in, out})) continue;
    removed[p] = true;
    redirect[{in, p}] = out;
    added.insert({in, out});
    result.contracted.emplace(cfg.id(p), cfg.id(out));
  }

  CfgData data;
  for (Cfg::Index v = 0; v < cfg.size(); ++v)
    if (!removed[v]) data.vertices.push_back(cfg.id(v));
  for (const auto& e : cfg.edges()) {
    auto t = cfg.index_of(e.tail);
    auto h = cfg.index_of(e.head);
    if (removed[t]) continue;
    if (removed[h]) {
      data.edges.push_back({e.tail, cfg.id(redirect.at({t, h}))});
      continue;
    }
    data.edges.push_back(e);
  }
  for (const auto& [k, v] : cfg.labels())
    if (!result.contracted.contains(k)) data.labels.emplace(k, v);
  data.edge_labels = cfg.edge_labels();
  result.cfg = Cfg::build(std::move(data));
  return result;
}

enum class DecisionCheck { TwoExternalSuccessors, SingleDominatingEntry, SharedSuccessor };

inline std::string_view to_string(DecisionCheck c) {
  switch (c) {
    case DecisionCheck::TwoExternalSuccessors: return "two-external-successors";
    case DecisionCheck::SingleDominatingEntry: return "single-dominating-entry";
    case DecisionCheck::SharedSuccessor: return "shared-successor";
  }
  return "?";
}

struct CheckResult {
  DecisionCheck check;
  bool passed = true;
  std::vector<VertexId> counterexamples{};
  std::string detail{};
};

struct DecisionVerification {
  std::size_t decision_id = 0;
  std::vector<CheckResult> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
};

struct VerificationReport {
  std::vector<DecisionVerification> decisions;

  bool passed() const {
    return std::all_of(decisions.begin(), decisions.end(),
                       [](const auto& d) { return d.passed(); });
  }
  std::vector<std::string> messages() const;
};

inline std::vector<std::string> VerificationReport::messages() const {
  std::vector<std::string> out;
  for (const auto& d : decisions) {
    for (const auto& c : d.checks) {
      if (c.passed) continue;
      std::string line = "Decision " + std::to_string(d.decision_id) + ": " +
                         std::string(to_string(c.check)) + " failed";
      if (!c.detail.empty()) line += " (" + c.detail + ")";
      if (!c.counterexamples.empty()) {
        line += ":";
        for (const auto& v : c.counterexamples) line += " " + v;
      }
      out.push_back(std::move(line));
    }
  }
  return out;
}

/// Checks each decision for (1) exactly two external successors, (2) a single
/// member entered from outside that dominates every member, and (3) every
/// member sharing a successor with the rest of the decision.
inline VerificationReport verify_decision_invariants(const Cfdg& cfdg) {
  const auto& cfg = cfdg.cfg();
  auto roots = cfg.entry_indices();
  DominatorTree dom(cfg, roots);
  VerificationReport report;

  for (const auto& d : cfdg.decisions()) {
    DecisionVerification v{d.id, {}};

    auto ext = cfdg.external_successors(d);
    CheckResult two{DecisionCheck::TwoExternalSuccessors};
    if (ext.size() != 2) {
      two.passed = false;
      two.counterexamples.assign(ext.begin(), ext.end());
      two.detail = std::to_string(ext.size()) + " external successors";
    }
    v.checks.push_back(std::move(two));

    CheckResult entry{DecisionCheck::SingleDominatingEntry};
    std::vector<VertexId> entered;
    for (const auto& m : d.members) {
      auto i = cfg.index_of(m);
      bool from_outside = cfg.indegree(i) == 0;
      for (auto p : cfg.pred(i))
        if (!d.members.contains(cfg.id(p))) from_outside = true;
      if (from_outside) entered.push_back(m);
    }
    if (entered.size() != 1) {
      entry.passed = false;
      if (entered.empty()) {
        entry.detail = "no member is entered from outside the decision";
        entry.counterexamples.assign(d.members.begin(), d.members.end());
      } else {
        entry.detail = std::to_string(entered.size()) + " members entered from outside";
        auto keep = std::find(entered.begin(), entered.end(), d.entry) != entered.end()
                        ? d.entry
                        : entered.front();
        for (const auto& m : entered)
          if (m != keep) entry.counterexamples.push_back(m);
      }
    } else {
      auto e = cfg.index_of(entered.front());
      for (const auto& m : d.members) {
        if (!dom.dominates(e, cfg.index_of(m))) {
          entry.passed = false;
          entry.counterexamples.push_back(m);
        }
      }
      if (!entry.passed) entry.detail = "not dominated by " + entered.front();
    }
    v.checks.push_back(std::move(entry));

    CheckResult shared{DecisionCheck::SharedSuccessor};
    if (d.members.size() > 1) {
      for (const auto& m : d.members) {
        auto rest = d.members;
        rest.erase(m);
        auto others = successors_of(cfg, rest);
        bool found = false;
        for (const auto& s : successors_of(cfg, m))
          if (s != m && others.contains(s)) found = true;
        if (!found) {
          shared.passed = false;
          shared.counterexamples.push_back(m);
        }
      }
      if (!shared.passed) shared.detail = "member shares no successor with the rest of the decision";
    }
    v.checks.push_back(std::move(shared));

    report.decisions.push_back(std::move(v));
  }
  return report;
}

}  // namespace cfdg
