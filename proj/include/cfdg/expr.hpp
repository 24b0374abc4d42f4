// Boolean decision expressions and the single-decision programs built from
// them.
//
// Grammar (lowest to highest precedence, all left associative):
//
//   or   := and (('||' | '|') and)*
//   and  := xor (('&&' | '&') xor)*
//   xor  := unary ('^' unary)*
//   unary:= '!' unary | ident | '(' or ')'
//
// Negation is pushed down to the conditions (De Morgan), so it never shows up
// as a node of its own.
#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cfdg/graph.hpp"
#include "cfdg/trace.hpp"

namespace cfdg {

enum class OpKind { And, ScAnd, Or, ScOr, Xor };

inline std::string_view to_string(OpKind op) {
  switch (op) {
    case OpKind::And: return "&";
    case OpKind::ScAnd: return "&&";
    case OpKind::Or: return "|";
    case OpKind::ScOr: return "||";
    case OpKind::Xor: return "^";
  }
  return "?";
}

inline bool is_short_circuit(OpKind op) { return op == OpKind::ScAnd || op == OpKind::ScOr; }

using Assignment = std::map<std::string, bool>;

class ExprSyntaxError : public std::runtime_error {
 public:
  ExprSyntaxError(std::size_t position, const std::string& message)
      : std::runtime_error("syntax error at position " + std::to_string(position) + ": " + message),
        position_(position) {}
  /// 0-based character offset into the expression text.
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

enum class HarnessErrorKind { IncompleteAssignment, TooManySymbols, BadVector };

class HarnessError : public std::runtime_error {
 public:
  HarnessError(HarnessErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  HarnessErrorKind kind() const noexcept { return kind_; }

 private:
  HarnessErrorKind kind_;
};

/// Expression tree stored as an arena of nodes; value semantics.
class DecisionExpr {
 public:
  struct Node {
    bool is_cond = true;
    std::string symbol;
    bool negated = false;
    OpKind op = OpKind::And;
    std::size_t left = 0;
    std::size_t right = 0;
  };

  static DecisionExpr cond(std::string symbol, bool negated = false) {
    DecisionExpr e;
    e.nodes_.push_back(Node{true, std::move(symbol), negated});
    e.root_ = 0;
    return e;
  }

  static DecisionExpr op(OpKind kind, const DecisionExpr& l, const DecisionExpr& r) {
    DecisionExpr e;
    auto lroot = e.graft(l, l.root_);
    auto rroot = e.graft(r, r.root_);
    e.nodes_.push_back(Node{false, {}, false, kind, lroot, rroot});
    e.root_ = e.nodes_.size() - 1;
    return e;
  }

  std::size_t root() const noexcept { return root_; }
  const Node& node(std::size_t i) const { return nodes_.at(i); }
  bool is_cond(std::size_t i) const { return nodes_.at(i).is_cond; }

  /// Distinct symbols in first-occurrence (left to right) order.
  std::vector<std::string> symbols() const {
    std::vector<std::string> out;
    symbols_of(root_, out);
    return out;
  }
  void symbols_of(std::size_t i, std::vector<std::string>& out) const {
    const auto& n = nodes_.at(i);
    if (n.is_cond) {
      if (std::find(out.begin(), out.end(), n.symbol) == out.end()) out.push_back(n.symbol);
      return;
    }
    symbols_of(n.left, out);
    symbols_of(n.right, out);
  }

  /// Number of condition leaves (repeated symbols count once per leaf).
  std::size_t leaf_count() const { return leaf_count(root_); }
  std::size_t leaf_count(std::size_t i) const {
    const auto& n = nodes_.at(i);
    return n.is_cond ? 1 : leaf_count(n.left) + leaf_count(n.right);
  }

  bool evaluate(const Assignment& a) const { return evaluate(root_, a); }
  bool evaluate(std::size_t i, const Assignment& a) const {
    const auto& n = nodes_.at(i);
    if (n.is_cond) {
      auto it = a.find(n.symbol);
      if (it == a.end())
        throw HarnessError(HarnessErrorKind::IncompleteAssignment,
                           "no value for symbol '" + n.symbol + "'");
      return it->second != n.negated;
    }
    bool l = evaluate(n.left, a);
    bool r = evaluate(n.right, a);
    switch (n.op) {
      case OpKind::And:
      case OpKind::ScAnd: return l && r;
      case OpKind::Or:
      case OpKind::ScOr: return l || r;
      case OpKind::Xor: return l != r;
    }
    return false;
  }

  /// Logical complement with negation pushed to the leaves.
  DecisionExpr negated() const {
    DecisionExpr e;
    e.root_ = e.graft_negated(*this, root_);
    return e;
  }

  std::string to_string() const { return to_string(root_, true); }
  std::string to_string(std::size_t i, bool top = false) const {
    const auto& n = nodes_.at(i);
    if (n.is_cond) return (n.negated ? "!" : "") + n.symbol;
    auto s = to_string(n.left) + " " + std::string(cfdg::to_string(n.op)) + " " + to_string(n.right);
    return top ? s : "(" + s + ")";
  }

  friend bool operator==(const DecisionExpr& a, const DecisionExpr& b) {
    return a.equal(a.root_, b, b.root_);
  }

 private:
  std::size_t graft(const DecisionExpr& other, std::size_t i) {
    const auto& n = other.nodes_.at(i);
    if (n.is_cond) {
      nodes_.push_back(n);
      return nodes_.size() - 1;
    }
    auto l = graft(other, n.left);
    auto r = graft(other, n.right);
    nodes_.push_back(Node{false, {}, false, n.op, l, r});
    return nodes_.size() - 1;
  }

  std::size_t graft_negated(const DecisionExpr& other, std::size_t i) {
    const auto& n = other.nodes_.at(i);
    if (n.is_cond) {
      nodes_.push_back(Node{true, n.symbol, !n.negated});
      return nodes_.size() - 1;
    }
    std::size_t l, r;
    OpKind op = n.op;
    switch (n.op) {
      case OpKind::Xor:
        l = graft_negated(other, n.left);
        r = graft(other, n.right);
        break;
      default:
        l = graft_negated(other, n.left);
        r = graft_negated(other, n.right);
        op = n.op == OpKind::And     ? OpKind::Or
             : n.op == OpKind::Or    ? OpKind::And
             : n.op == OpKind::ScAnd ? OpKind::ScOr
                                     : OpKind::ScAnd;
    }
    nodes_.push_back(Node{false, {}, false, op, l, r});
    return nodes_.size() - 1;
  }

  bool equal(std::size_t i, const DecisionExpr& o, std::size_t j) const {
    const auto& a = nodes_.at(i);
    const auto& b = o.nodes_.at(j);
    if (a.is_cond != b.is_cond) return false;
    if (a.is_cond) return a.symbol == b.symbol && a.negated == b.negated;
    return a.op == b.op && equal(a.left, o, b.left) && equal(a.right, o, b.right);
  }

  std::vector<Node> nodes_;
  std::size_t root_ = 0;
};

namespace detail {

class ExprParser {
 public:
  explicit ExprParser(std::string_view text) : s_(text) {}

  DecisionExpr parse() {
    auto e = parse_or();
    skip();
    if (pos_ < s_.size()) throw ExprSyntaxError(pos_, "unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(std::string_view tok) {
    skip();
    if (s_.substr(pos_, tok.size()) != tok) return false;
    pos_ += tok.size();
    return true;
  }
  bool at(std::string_view tok) {
    skip();
    return s_.substr(pos_, tok.size()) == tok;
  }

  DecisionExpr parse_or() {
    auto lhs = parse_and();
    while (true) {
      if (accept("||")) lhs = DecisionExpr::op(OpKind::ScOr, lhs, parse_and());
      else if (accept("|")) lhs = DecisionExpr::op(OpKind::Or, lhs, parse_and());
      else return lhs;
    }
  }
  DecisionExpr parse_and() {
    auto lhs = parse_xor();
    while (true) {
      if (accept("&&")) lhs = DecisionExpr::op(OpKind::ScAnd, lhs, parse_xor());
      else if (accept("&")) lhs = DecisionExpr::op(OpKind::And, lhs, parse_xor());
      else return lhs;
    }
  }
  DecisionExpr parse_xor() {
    auto lhs = parse_unary();
    while (accept("^")) lhs = DecisionExpr::op(OpKind::Xor, lhs, parse_unary());
    return lhs;
  }
  DecisionExpr parse_unary() {
    if (accept("!")) return parse_unary().negated();
    skip();
    if (accept("(")) {
      auto e = parse_or();
      if (!accept(")")) throw ExprSyntaxError(pos_, "expected ')'");
      return e;
    }
    if (pos_ >= s_.size()) throw ExprSyntaxError(pos_, "unexpected end of expression");
    char c = s_[pos_];
    if (!(std::isalpha(static_cast<unsigned char>(c)) || c == '_'))
      throw ExprSyntaxError(pos_, "expected a condition name, found '" + std::string(1, c) + "'");
    auto start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    return DecisionExpr::cond(std::string(s_.substr(start, pos_ - start)));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline DecisionExpr parse_expr(std::string_view text) { return detail::ExprParser(text).parse(); }

/// One condition vertex of a generated graph.
struct ConditionVertex {
  VertexId id;
  std::size_t node;  // root of the non-short-circuit subexpression it evaluates
  VertexId true_target;
  VertexId false_target;
  std::vector<std::string> symbols;  // symbols read when the vertex is evaluated
};

struct ExprCfg {
  Cfg cfg;
  std::vector<VertexId> conditions;  // evaluation (left to right) order
  VertexId entry = "entry";
  VertexId true_exit = "T";
  VertexId false_exit = "F";
  VertexId exit = "exit";
  std::vector<ConditionVertex> details;

  const ConditionVertex& condition(const VertexId& id) const {
    for (const auto& c : details)
      if (c.id == id) return c;
    throw GraphError(GraphErrorKind::UnknownVertex, "'" + id + "' is not a condition vertex", {id});
  }
};

namespace detail {

// Collects the maximal non-short-circuit subexpressions left to right.
inline void collect_clusters(const DecisionExpr& e, std::size_t i, std::vector<std::size_t>& out) {
  const auto& n = e.node(i);
  if (n.is_cond || !is_short_circuit(n.op)) {
    out.push_back(i);
    return;
  }
  collect_clusters(e, n.left, out);
  collect_clusters(e, n.right, out);
}

}  // namespace detail

/// Maximal subexpressions not rooted at a short-circuit operator; each one
/// becomes a single condition vertex.
inline std::vector<std::size_t> condition_clusters(const DecisionExpr& e) {
  std::vector<std::size_t> out;
  detail::collect_clusters(e, e.root(), out);
  return out;
}

/// Lowers `expr` to entry -> conditions -> {T, F} -> exit. Short-circuit
/// operands become separate vertices; `a && b` sends a's false edge to the
/// false target of the whole `&&`, `a || b` sends a's true edge to its true
/// target.
inline ExprCfg expr_to_cfg(const DecisionExpr& expr) {
  ExprCfg out;
  auto clusters = condition_clusters(expr);
  std::map<std::size_t, std::size_t> cluster_of;
  // A cluster that is a bare symbol occurring once is named after it.
  std::map<std::string, std::size_t> label_count;
  for (auto c : clusters) ++label_count[expr.to_string(c, true)];
  auto vertex_name = [&](std::size_t k) -> VertexId {
    auto label = expr.to_string(clusters[k], true);
    static const std::set<std::string> reserved = {"entry", "T", "F", "exit"};
    bool plain = !label.empty() && (std::isalpha(static_cast<unsigned char>(label[0])) || label[0] == '_');
    for (char ch : label) plain &= std::isalnum(static_cast<unsigned char>(ch)) || ch == '_';
    bool clash = reserved.contains(label) ||
                 (label.size() > 1 && label[0] == 'c' &&
                  std::all_of(label.begin() + 1, label.end(),
                              [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); }));
    if (plain && !clash && label_count[label] == 1) return label;
    return "c" + std::to_string(k);
  };
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    cluster_of[clusters[k]] = k;
    ConditionVertex cv;
    cv.id = vertex_name(k);
    cv.node = clusters[k];
    std::vector<std::string> syms;
    expr.symbols_of(clusters[k], syms);
    cv.symbols = std::move(syms);
    out.details.push_back(std::move(cv));
  }

  std::function<VertexId(std::size_t, const VertexId&, const VertexId&)> lower =
      [&](std::size_t i, const VertexId& t, const VertexId& f) -> VertexId {
    if (auto it = cluster_of.find(i); it != cluster_of.end()) {
      auto& cv = out.details[it->second];
      cv.true_target = t;
      cv.false_target = f;
      return cv.id;
    }
    const auto& n = expr.node(i);
    auto rhs = lower(n.right, t, f);
    return n.op == OpKind::ScAnd ? lower(n.left, rhs, f) : lower(n.left, t, rhs);
  };
  auto first = lower(expr.root(), out.true_exit, out.false_exit);

  CfgData data;
  data.vertices.push_back(out.entry);
  data.labels[out.entry] = "entry";
  for (const auto& cv : out.details) {
    data.vertices.push_back(cv.id);
    data.labels[cv.id] = expr.to_string(cv.node, true);
    out.conditions.push_back(cv.id);
  }
  for (const auto& v : {out.true_exit, out.false_exit, out.exit}) {
    data.vertices.push_back(v);
    data.labels[v] = v;
  }
  data.edges.push_back({out.entry, first});
  for (const auto& cv : out.details) {
    data.edges.push_back({cv.id, cv.true_target});
    data.edges.push_back({cv.id, cv.false_target});
    data.edge_labels[{cv.id, cv.true_target}] = "T";
    data.edge_labels[{cv.id, cv.false_target}] = "F";
  }
  data.edges.push_back({out.true_exit, out.exit});
  data.edges.push_back({out.false_exit, out.exit});
  out.cfg = Cfg::build(std::move(data), BuildOptions{true});
  return out;
}

inline void require_complete(const DecisionExpr& expr, const Assignment& a) {
  for (const auto& s : expr.symbols())
    if (!a.contains(s))
      throw HarnessError(HarnessErrorKind::IncompleteAssignment,
                         "assignment has no value for symbol '" + s + "'");
}

/// Walks the generated graph under `assignment`, short-circuiting left to
/// right, and returns the vertex path from entry to exit.
inline Run simulate(const ExprCfg& g, const DecisionExpr& expr, const Assignment& assignment,
                    std::string name = {}) {
  require_complete(expr, assignment);
  Run run{std::move(name), {g.entry}};
  VertexId cur = g.conditions.front();
  while (cur != g.true_exit && cur != g.false_exit) {
    run.path.push_back(cur);
    const auto& cv = g.condition(cur);
    cur = expr.evaluate(cv.node, assignment) ? cv.true_target : cv.false_target;
  }
  run.path.push_back(cur);
  run.path.push_back(g.exit);
  return run;
}

inline Run simulate(const DecisionExpr& expr, const Assignment& assignment, std::string name = {}) {
  return simulate(expr_to_cfg(expr), expr, assignment, std::move(name));
}

/// Assignment number `index` over `symbols`; the first symbol is the most
/// significant bit, so index 0 is all-false.
inline Assignment assignment_at(const std::vector<std::string>& symbols, std::uint64_t index) {
  Assignment a;
  const auto k = symbols.size();
  for (std::size_t j = 0; j < k; ++j) a[symbols[j]] = (index >> (k - 1 - j)) & 1u;
  return a;
}

/// "TF-" style rendering; symbols listed in `dont_care` print as '-'.
inline std::string vector_string(const std::vector<std::string>& symbols, const Assignment& a,
                                 const std::set<std::string>& dont_care = {}) {
  std::string out;
  for (const auto& s : symbols) {
    auto it = a.find(s);
    out.push_back(dont_care.contains(s) ? '-' : (it != a.end() && it->second ? 'T' : 'F'));
  }
  return out;
}

/// Every assignment with its run, in assignment_at order. Runs are named by
/// their vector string.
inline std::vector<std::pair<Assignment, Run>> enumerate_runs(const DecisionExpr& expr,
                                                              std::size_t max_symbols = 16) {
  auto symbols = expr.symbols();
  if (symbols.size() > max_symbols)
    throw HarnessError(HarnessErrorKind::TooManySymbols,
                       "expression has " + std::to_string(symbols.size()) +
                           " symbols; at most " + std::to_string(max_symbols) + " supported");
  auto g = expr_to_cfg(expr);
  std::vector<std::pair<Assignment, Run>> out;
  for (std::uint64_t i = 0; i < (std::uint64_t{1} << symbols.size()); ++i) {
    auto a = assignment_at(symbols, i);
    auto run = simulate(g, expr, a, vector_string(symbols, a));
    out.emplace_back(std::move(a), std::move(run));
  }
  return out;
}

/// A test vector such as "TTF", "101" or "F-": one character per symbol in
/// first-occurrence order; '-' marks a don't-care input (bound to false).
struct TestVector {
  Assignment assignment;
  std::set<std::string> dont_care;
};

inline TestVector parse_test_vector(std::string_view text, const std::vector<std::string>& symbols) {
  TestVector v;
  for (std::size_t j = 0; j < symbols.size(); ++j) {
    if (j >= text.size())
      throw HarnessError(HarnessErrorKind::BadVector,
                         "vector '" + std::string(text) + "' has " + std::to_string(text.size()) +
                             " value(s) but the expression has " + std::to_string(symbols.size()) +
                             " symbols; missing value for symbol '" + symbols[j] + "'");
    switch (text[j]) {
      case 'T': case 't': case '1': v.assignment[symbols[j]] = true; break;
      case 'F': case 'f': case '0': v.assignment[symbols[j]] = false; break;
      case '-':
        v.assignment[symbols[j]] = false;
        v.dont_care.insert(symbols[j]);
        break;
      default:
        throw HarnessError(HarnessErrorKind::BadVector,
                           "vector '" + std::string(text) + "': invalid value '" +
                               std::string(1, text[j]) + "' for symbol '" + symbols[j] + "'");
    }
  }
  if (text.size() > symbols.size())
    throw HarnessError(HarnessErrorKind::BadVector,
                       "vector '" + std::string(text) + "' has " + std::to_string(text.size()) +
                           " values but the expression has only " +
                           std::to_string(symbols.size()) + " symbols");
  return v;
}

/// Every expression with 1..max_conditions distinct conditions a, b, c, ...
/// over all binary tree shapes and all five operators.
inline std::vector<DecisionExpr> enumerate_expressions(std::size_t max_conditions) {
  std::function<std::vector<DecisionExpr>(std::size_t, std::size_t)> build =
      [&](std::size_t first, std::size_t n) {
        std::vector<DecisionExpr> out;
        if (n == 1) {
          out.push_back(DecisionExpr::cond(std::string(1, static_cast<char>('a' + first))));
          return out;
        }
        for (std::size_t left = 1; left < n; ++left) {
          auto ls = build(first, left);
          auto rs = build(first + left, n - left);
          for (const auto& l : ls)
            for (const auto& r : rs)
              for (auto op : {OpKind::And, OpKind::ScAnd, OpKind::Or, OpKind::ScOr, OpKind::Xor})
                out.push_back(DecisionExpr::op(op, l, r));
        }
        return out;
      };
  std::vector<DecisionExpr> all;
  for (std::size_t n = 1; n <= max_conditions; ++n) {
    auto level = build(0, n);
    all.insert(all.end(), level.begin(), level.end());
  }
  return all;
}

}  // namespace cfdg
