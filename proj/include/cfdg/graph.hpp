// Control-flow graph model: vertices, edges, decisions and dominators.
//
// A Cfg is immutable once built. Vertices are addressed either by their
// VertexId (the name the producer gave them) or by a dense index assigned in
// declaration order; the algorithms work on indices.
#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cfdg {

using VertexId = std::string;

struct Edge {
  VertexId tail;
  VertexId head;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

enum class GraphErrorKind {
  EmptyVertexId,
  OutdegreeViolation,
  DanglingEdge,
  UnknownVertex,
  NoUniqueEntry,
  NoExit,
  Disconnected,
  InvalidDecision,
};

inline std::string_view to_string(GraphErrorKind kind) {
  switch (kind) {
    case GraphErrorKind::EmptyVertexId: return "EmptyVertexId";
    case GraphErrorKind::OutdegreeViolation: return "OutdegreeViolation";
    case GraphErrorKind::DanglingEdge: return "DanglingEdge";
    case GraphErrorKind::UnknownVertex: return "UnknownVertex";
    case GraphErrorKind::NoUniqueEntry: return "NoUniqueEntry";
    case GraphErrorKind::NoExit: return "NoExit";
    case GraphErrorKind::Disconnected: return "Disconnected";
    case GraphErrorKind::InvalidDecision: return "InvalidDecision";
  }
  return "?";
}

class GraphError : public std::runtime_error {
 public:
  GraphError(GraphErrorKind kind, const std::string& message,
             std::vector<VertexId> vertices = {})
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        vertices_(std::move(vertices)) {}

  GraphErrorKind kind() const noexcept { return kind_; }
  const std::vector<VertexId>& vertices() const noexcept { return vertices_; }

 private:
  GraphErrorKind kind_;
  std::vector<VertexId> vertices_;
};

/// Raw description of a graph, before validation.
struct CfgData {
  std::vector<VertexId> vertices;
  std::vector<Edge> edges;
  std::map<VertexId, std::string> labels;
  std::map<Edge, std::string> edge_labels;
};

struct BuildOptions {
  /// Require a unique entry, at least one exit and weak connectivity.
  bool strict = false;
};

class Cfg {
 public:
  using Index = std::size_t;

  Cfg() = default;

  /// Validates `data` and builds the graph. Repeated vertex ids are merged;
  /// parallel edges are collapsed and listed in collapsed_edges().
  static Cfg build(CfgData data, BuildOptions options = {});

  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }

  const std::vector<VertexId>& vertices() const noexcept { return ids_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<Edge>& collapsed_edges() const noexcept { return collapsed_; }
  const std::map<VertexId, std::string>& labels() const noexcept { return labels_; }
  const std::map<Edge, std::string>& edge_labels() const noexcept { return edge_labels_; }

  bool contains(std::string_view id) const { return index_.contains(std::string(id)); }

  std::optional<Index> find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Throws GraphError(UnknownVertex) when absent.
  Index index_of(std::string_view id) const {
    auto found = find(id);
    if (!found) {
      throw GraphError(GraphErrorKind::UnknownVertex,
                       "vertex '" + std::string(id) + "' is not in the graph",
                       {std::string(id)});
    }
    return *found;
  }

  const VertexId& id(Index i) const { return ids_.at(i); }

  std::span<const Index> succ(Index i) const { return succ_.at(i); }
  std::span<const Index> pred(Index i) const { return pred_.at(i); }
  std::size_t outdegree(Index i) const { return succ_.at(i).size(); }
  std::size_t indegree(Index i) const { return pred_.at(i).size(); }

  /// A condition is a vertex with two distinct successors.
  bool is_condition(Index i) const { return outdegree(i) == 2; }

  bool has_edge(Index tail, Index head) const {
    const auto& s = succ_.at(tail);
    return std::find(s.begin(), s.end(), head) != s.end();
  }
  bool has_edge(std::string_view tail, std::string_view head) const {
    auto t = find(tail);
    auto h = find(head);
    return t && h && has_edge(*t, *h);
  }

  std::string label(std::string_view id) const {
    auto it = labels_.find(std::string(id));
    return it == labels_.end() ? std::string() : it->second;
  }

  std::optional<std::string> edge_label(const Edge& e) const {
    auto it = edge_labels_.find(e);
    if (it == edge_labels_.end()) return std::nullopt;
    return it->second;
  }

  /// Indegree-0 and outdegree-0 vertices, in declaration order.
  std::vector<Index> entry_indices() const;
  std::vector<Index> exit_indices() const;

  std::vector<std::string> warnings() const;

 private:
  std::vector<VertexId> ids_;
  std::unordered_map<VertexId, Index> index_;
  std::vector<Edge> edges_;
  std::vector<Edge> collapsed_;
  std::vector<std::vector<Index>> succ_;
  std::vector<std::vector<Index>> pred_;
  std::map<VertexId, std::string> labels_;
  std::map<Edge, std::string> edge_labels_;
};

inline Cfg Cfg::build(CfgData data, BuildOptions options) {
  Cfg g;
  for (auto& v : data.vertices) {
    if (v.empty()) throw GraphError(GraphErrorKind::EmptyVertexId, "vertex ids must be non-empty");
    if (g.index_.contains(v)) continue;
    g.index_.emplace(v, g.ids_.size());
    g.ids_.push_back(std::move(v));
  }
  g.succ_.resize(g.ids_.size());
  g.pred_.resize(g.ids_.size());

  std::set<std::pair<Index, Index>> seen;
  for (auto& e : data.edges) {
    auto t = g.find(e.tail);
    auto h = g.find(e.head);
    if (!t || !h) {
      throw GraphError(GraphErrorKind::DanglingEdge,
                       "edge " + e.tail + " -> " + e.head + " references a vertex not in the graph",
                       {t ? e.head : e.tail});
    }
    if (!seen.emplace(*t, *h).second) {
      g.collapsed_.push_back(e);
      continue;
    }
    g.succ_[*t].push_back(*h);
    g.pred_[*h].push_back(*t);
    g.edges_.push_back(std::move(e));
  }

  for (Index i = 0; i < g.size(); ++i) {
    if (g.succ_[i].size() > 2) {
      throw GraphError(GraphErrorKind::OutdegreeViolation,
                       "vertex '" + g.ids_[i] + "' has " + std::to_string(g.succ_[i].size()) +
                           " distinct successors (at most 2 allowed)",
                       {g.ids_[i]});
    }
  }

  for (auto& [k, v] : data.labels) {
    if (g.contains(k)) g.labels_.emplace(k, std::move(v));
  }
  for (auto& [k, v] : data.edge_labels) {
    if (g.has_edge(k.tail, k.head)) g.edge_labels_.emplace(k, std::move(v));
  }

  if (options.strict) {
    auto entries = g.entry_indices();
    if (entries.size() != 1) {
      std::vector<VertexId> named;
      for (auto i : entries) named.push_back(g.ids_[i]);
      throw GraphError(GraphErrorKind::NoUniqueEntry,
                       "expected exactly one indegree-0 vertex, found " +
                           std::to_string(entries.size()),
                       named);
    }
    if (g.exit_indices().empty()) {
      throw GraphError(GraphErrorKind::NoExit, "graph has no outdegree-0 vertex");
    }
    // Weak connectivity: undirected flood fill from vertex 0.
    std::vector<bool> reached(g.size(), false);
    std::vector<Index> stack{0};
    reached[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
      Index u = stack.back();
      stack.pop_back();
      for (const auto* adj : {&g.succ_[u], &g.pred_[u]}) {
        for (Index w : *adj) {
          if (!reached[w]) {
            reached[w] = true;
            ++count;
            stack.push_back(w);
          }
        }
      }
    }
    if (count != g.size()) {
      std::vector<VertexId> unreached;
      for (Index i = 0; i < g.size(); ++i)
        if (!reached[i]) unreached.push_back(g.ids_[i]);
      throw GraphError(GraphErrorKind::Disconnected, "graph is not weakly connected", unreached);
    }
  }
  return g;
}

inline std::vector<Cfg::Index> Cfg::entry_indices() const {
  std::vector<Index> out;
  for (Index i = 0; i < size(); ++i)
    if (pred_[i].empty()) out.push_back(i);
  return out;
}

inline std::vector<Cfg::Index> Cfg::exit_indices() const {
  std::vector<Index> out;
  for (Index i = 0; i < size(); ++i)
    if (succ_[i].empty()) out.push_back(i);
  return out;
}

inline std::vector<std::string> Cfg::warnings() const {
  std::vector<std::string> out;
  for (const auto& e : collapsed_)
    out.push_back("MultiEdgeCollapsed: parallel edge " + e.tail + " -> " + e.head + " collapsed");
  return out;
}

inline Cfg build_cfg(std::vector<VertexId> vertices, std::vector<Edge> edges,
                     std::map<VertexId, std::string> labels = {}, bool strict = false) {
  return Cfg::build(CfgData{std::move(vertices), std::move(edges), std::move(labels), {}},
                    BuildOptions{strict});
}

inline std::set<VertexId> successors_of(const Cfg& cfg, std::string_view vertex) {
  std::set<VertexId> out;
  for (auto s : cfg.succ(cfg.index_of(vertex))) out.insert(cfg.id(s));
  return out;
}

/// Union of the successors of every vertex in `vertices`; members of the set
/// itself are included when an edge leads to them.
inline std::set<VertexId> successors_of(const Cfg& cfg, const std::set<VertexId>& vertices) {
  std::set<VertexId> out;
  for (const auto& v : vertices)
    for (auto s : cfg.succ(cfg.index_of(v))) out.insert(cfg.id(s));
  return out;
}

inline std::pair<std::set<VertexId>, std::set<VertexId>> entry_and_exits(const Cfg& cfg) {
  std::set<VertexId> entries, exits;
  for (auto i : cfg.entry_indices()) entries.insert(cfg.id(i));
  for (auto i : cfg.exit_indices()) exits.insert(cfg.id(i));
  return {entries, exits};
}

namespace detail {

/// Reverse postorder of the vertices reachable from `roots`.
inline std::vector<Cfg::Index> reverse_postorder(const Cfg& cfg, std::span<const Cfg::Index> roots,
                                                 std::vector<bool>* seen_out = nullptr) {
  std::vector<bool> seen(cfg.size(), false);
  if (seen_out && seen_out->size() == cfg.size()) seen = *seen_out;
  std::vector<Cfg::Index> post;
  post.reserve(cfg.size());
  std::vector<std::pair<Cfg::Index, std::size_t>> stack;
  for (auto root : roots) {
    if (seen[root]) continue;
    seen[root] = true;
    stack.emplace_back(root, 0);
    while (!stack.empty()) {
      auto& [u, next] = stack.back();
      auto succ = cfg.succ(u);
      if (next < succ.size()) {
        auto w = succ[next++];
        if (!seen[w]) {
          seen[w] = true;
          stack.emplace_back(w, 0);
        }
      } else {
        post.push_back(u);
        stack.pop_back();
      }
    }
  }
  if (seen_out) *seen_out = std::move(seen);
  std::reverse(post.begin(), post.end());
  return post;
}

}  // namespace detail

/// Reverse postorder covering every vertex: DFS from the entries first, then
/// from any vertex left unreached (cycles with no entry).
inline std::vector<Cfg::Index> reverse_postorder(const Cfg& cfg) {
  std::vector<bool> seen(cfg.size(), false);
  auto entries = cfg.entry_indices();
  std::vector<Cfg::Index> order;
  // Later DFS trees are prepended so that each tree stays topologically
  // sorted with respect to the vertices it discovered.
  auto first = detail::reverse_postorder(cfg, entries, &seen);
  std::vector<std::vector<Cfg::Index>> trees{std::move(first)};
  for (Cfg::Index i = 0; i < cfg.size(); ++i) {
    if (seen[i]) continue;
    Cfg::Index root[] = {i};
    trees.push_back(detail::reverse_postorder(cfg, root, &seen));
  }
  for (auto it = trees.rbegin(); it != trees.rend(); ++it)
    order.insert(order.end(), it->begin(), it->end());
  return order;
}

/// Immediate-dominator tree (Cooper, Harvey & Kennedy iteration over reverse
/// postorder). Several roots are handled through an implicit virtual root.
class DominatorTree {
 public:
  using Index = Cfg::Index;

  DominatorTree(const Cfg& cfg, std::span<const Index> roots) : idom_(cfg.size(), kNone) {
    const Index virt = cfg.size();
    auto rpo = detail::reverse_postorder(cfg, roots);
    std::vector<std::size_t> order(cfg.size() + 1, kNone);
    for (std::size_t k = 0; k < rpo.size(); ++k) order[rpo[k]] = k + 1;
    order[virt] = 0;
    std::vector<Index> idom(cfg.size() + 1, kNone);
    idom[virt] = virt;
    std::vector<bool> is_root(cfg.size(), false);
    for (auto r : roots) {
      is_root[r] = true;
      idom[r] = virt;
    }

    auto intersect = [&](Index a, Index b) {
      while (a != b) {
        while (order[a] > order[b]) a = idom[a];
        while (order[b] > order[a]) b = idom[b];
      }
      return a;
    };

    bool changed = true;
    while (changed) {
      changed = false;
      for (Index v : rpo) {
        if (is_root[v]) continue;
        Index candidate = kNone;
        for (Index p : cfg.pred(v)) {
          if (idom[p] == kNone) continue;
          candidate = candidate == kNone ? p : intersect(p, candidate);
        }
        if (candidate != kNone && idom[v] != candidate) {
          idom[v] = candidate;
          changed = true;
        }
      }
    }
    for (Index v = 0; v < cfg.size(); ++v) idom_[v] = idom[v] == virt ? kRoot : idom[v];
  }

  bool reachable(Index v) const { return idom_.at(v) != kNone; }

  /// Immediate dominator; nullopt for roots and unreachable vertices.
  std::optional<Index> idom(Index v) const {
    auto d = idom_.at(v);
    if (d == kNone || d == kRoot) return std::nullopt;
    return d;
  }

  bool dominates(Index a, Index b) const {
    if (!reachable(a) || !reachable(b)) return false;
    for (Index cur = b;;) {
      if (cur == a) return true;
      auto up = idom_[cur];
      if (up == kRoot) return false;
      cur = up;
    }
  }

  /// All dominators of v including v itself; empty when unreachable.
  std::vector<Index> dominators_of(Index v) const {
    std::vector<Index> out;
    if (!reachable(v)) return out;
    for (Index cur = v;;) {
      out.push_back(cur);
      auto up = idom_[cur];
      if (up == kRoot) break;
      cur = up;
    }
    return out;
  }

 private:
  static constexpr Index kNone = static_cast<Index>(-1);
  static constexpr Index kRoot = static_cast<Index>(-2);
  std::vector<Index> idom_;
};

/// dominators(v) for every vertex, relative to the unique entry vertex.
/// Vertices unreachable from the entry map to the empty set.
inline std::map<VertexId, std::set<VertexId>> compute_dominators(const Cfg& cfg) {
  auto entries = cfg.entry_indices();
  if (entries.size() != 1) {
    throw GraphError(GraphErrorKind::NoUniqueEntry,
                     "dominators need exactly one entry vertex, found " +
                         std::to_string(entries.size()));
  }
  DominatorTree tree(cfg, entries);
  std::map<VertexId, std::set<VertexId>> out;
  for (Cfg::Index v = 0; v < cfg.size(); ++v) {
    auto& doms = out[cfg.id(v)];
    for (auto d : tree.dominators_of(v)) doms.insert(cfg.id(d));
  }
  return out;
}

/// A group of condition vertices forming one decision.
struct Decision {
  std::set<VertexId> members;
  VertexId entry;
  std::size_t id = 0;

  bool contains(const VertexId& v) const { return members.contains(v); }
  friend bool operator==(const Decision&, const Decision&) = default;
};

/// A Cfg together with a partition of its condition vertices into decisions.
class Cfdg {
 public:
  Cfdg() = default;

  /// Checks that decisions are disjoint, consist only of condition vertices,
  /// and together cover every condition vertex.
  Cfdg(Cfg cfg, std::vector<Decision> decisions);

  const Cfg& cfg() const noexcept { return cfg_; }
  const std::vector<Decision>& decisions() const noexcept { return decisions_; }

  const Decision* decision_of(const VertexId& v) const {
    auto it = owner_.find(v);
    return it == owner_.end() ? nullptr : &decisions_[it->second];
  }

  /// Successors of the members that lie outside the decision.
  std::set<VertexId> external_successors(const Decision& d) const {
    std::set<VertexId> out;
    for (const auto& v : successors_of(cfg_, d.members))
      if (!d.members.contains(v)) out.insert(v);
    return out;
  }

 private:
  Cfg cfg_;
  std::vector<Decision> decisions_;
  std::map<VertexId, std::size_t> owner_;
};

inline Cfdg::Cfdg(Cfg cfg, std::vector<Decision> decisions)
    : cfg_(std::move(cfg)), decisions_(std::move(decisions)) {
  for (std::size_t k = 0; k < decisions_.size(); ++k) {
    const auto& d = decisions_[k];
    if (d.members.empty())
      throw GraphError(GraphErrorKind::InvalidDecision, "decision has no members");
    if (!d.members.contains(d.entry))
      throw GraphError(GraphErrorKind::InvalidDecision,
                       "decision entry '" + d.entry + "' is not a member", {d.entry});
    for (const auto& m : d.members) {
      auto i = cfg_.index_of(m);
      if (!cfg_.is_condition(i))
        throw GraphError(GraphErrorKind::InvalidDecision,
                         "decision member '" + m + "' does not have outdegree 2", {m});
      if (!owner_.emplace(m, k).second)
        throw GraphError(GraphErrorKind::InvalidDecision,
                         "vertex '" + m + "' belongs to more than one decision", {m});
    }
  }
  for (Cfg::Index i = 0; i < cfg_.size(); ++i) {
    if (cfg_.is_condition(i) && !owner_.contains(cfg_.id(i)))
      throw GraphError(GraphErrorKind::InvalidDecision,
                       "condition vertex '" + cfg_.id(i) + "' is not in any decision",
                       {cfg_.id(i)});
  }
}

}  // namespace cfdg
