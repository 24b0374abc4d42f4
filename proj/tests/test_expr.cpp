#include <functional>

#include <gtest/gtest.h>

#include "cfdg/expr.hpp"
#include "cfdg/inference.hpp"
#include "support/oracles.hpp"

using namespace cfdg;

namespace {

// Evaluates the expression text directly with a tiny recursive descent of its
// own, so simulate is never checked against itself.
class TextEval {
 public:
  TextEval(std::string s, const Assignment& a) : s_(std::move(s)), a_(a) {}
  bool value() { return orr(); }

 private:
  void ws() {
    while (i_ < s_.size() && s_[i_] == ' ') ++i_;
  }
  bool eat(const char* t) {
    ws();
    std::string tok(t);
    if (s_.compare(i_, tok.size(), tok) != 0) return false;
    i_ += tok.size();
    return true;
  }
  bool orr() {
    bool v = andd();
    while (true) {
      if (eat("||") || eat("|")) {
        bool r = andd();
        v = v || r;
      } else {
        return v;
      }
    }
  }
  bool andd() {
    bool v = xorr();
    while (true) {
      if (eat("&&") || eat("&")) {
        bool r = xorr();
        v = v && r;
      } else {
        return v;
      }
    }
  }
  bool xorr() {
    bool v = un();
    while (eat("^")) v = v != un();
    return v;
  }
  bool un() {
    if (eat("!")) return !un();
    if (eat("(")) {
      bool v = orr();
      eat(")");
      return v;
    }
    ws();
    auto start = i_;
    while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
    return a_.at(s_.substr(start, i_ - start));
  }

  std::string s_;
  const Assignment& a_;
  std::size_t i_ = 0;
};

// Number of maximal subtrees whose root is not && or ||.
std::size_t clusters_by_recursion(const DecisionExpr& e, std::size_t i) {
  const auto& n = e.node(i);
  if (n.is_cond || (n.op != OpKind::ScAnd && n.op != OpKind::ScOr)) return 1;
  return clusters_by_recursion(e, n.left) + clusters_by_recursion(e, n.right);
}

HarnessErrorKind harness_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const HarnessError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no HarnessError";
  return HarnessErrorKind::BadVector;
}

const char* const kSamples[] = {"a",          "!a",           "a && b",        "a || b",
                                "a ^ b",      "a & b",        "a | b",         "(a && b) || c",
                                "!(a || b) && c", "a & b || c",  "(a & b) && c",  "a ^ b && !c | d",
                                "(a || b) && (c || d)", "a && (b || c) && !d", "x1 && y_2 || x1"};

}  // namespace

TEST(ParseExpr, Shapes) {
  auto e = parse_expr("(a && b) || c");
  const auto& root = e.node(e.root());
  ASSERT_FALSE(root.is_cond);
  EXPECT_EQ(root.op, OpKind::ScOr);
  EXPECT_EQ(e.node(root.left).op, OpKind::ScAnd);
  EXPECT_TRUE(e.node(root.right).is_cond);
  EXPECT_EQ(e.node(root.right).symbol, "c");

  auto a = parse_expr("a");
  EXPECT_TRUE(a.node(a.root()).is_cond);
  EXPECT_EQ(parse_expr("a ^ b").node(parse_expr("a ^ b").root()).op, OpKind::Xor);
}

TEST(ParseExpr, Precedence) {
  // ^ binds tighter than &, which binds tighter than |
  auto e = parse_expr("a | b & c ^ d");
  const auto& r = e.node(e.root());
  EXPECT_EQ(r.op, OpKind::Or);
  const auto& rhs = e.node(r.right);
  EXPECT_EQ(rhs.op, OpKind::And);
  EXPECT_EQ(e.node(rhs.right).op, OpKind::Xor);
  // left associative
  auto l = parse_expr("a && b && c");
  EXPECT_EQ(l.node(l.node(l.root()).left).op, OpKind::ScAnd);
  EXPECT_TRUE(l.node(l.node(l.root()).right).is_cond);
}

TEST(ParseExpr, NegationFolds) {
  auto e = parse_expr("!a");
  EXPECT_TRUE(e.node(e.root()).is_cond);
  EXPECT_TRUE(e.node(e.root()).negated);
  EXPECT_FALSE(parse_expr("!!a").node(0).negated);
}

TEST(ParseExpr, Errors) {
  auto pos = [](const char* text) -> std::size_t {
    try {
      parse_expr(text);
    } catch (const ExprSyntaxError& e) {
      return e.position();
    }
    ADD_FAILURE() << "accepted " << text;
    return 0;
  };
  EXPECT_EQ(pos("a &&"), 4u);
  EXPECT_EQ(pos("(a || b"), 7u);
  EXPECT_EQ(pos("a b"), 2u);
  EXPECT_EQ(pos(""), 0u);
  EXPECT_EQ(pos("a && 3"), 5u);
}

TEST(Symbols, FirstOccurrenceOrder) {
  EXPECT_EQ(parse_expr("c && a || c ^ b").symbols(), (std::vector<std::string>{"c", "a", "b"}));
}

TEST(ExprToCfg, AndShape) {
  auto g = expr_to_cfg(parse_expr("a && b"));
  EXPECT_EQ(g.conditions, (std::vector<VertexId>{"a", "b"}));
  const auto& a = g.condition("a");
  const auto& b = g.condition("b");
  EXPECT_EQ(a.true_target, "b");
  EXPECT_EQ(a.false_target, "F");
  EXPECT_EQ(b.true_target, "T");
  EXPECT_EQ(b.false_target, "F");
  EXPECT_EQ(g.cfg.size(), 6u);
  EXPECT_EQ(g.cfg.edge_label({"a", "b"}), "T");
}

TEST(ExprToCfg, Listing2Shape) {
  auto g = expr_to_cfg(parse_expr("(a && b) || c"));
  ASSERT_EQ(g.conditions.size(), 3u);
  EXPECT_EQ(g.condition("a").false_target, "c");
  EXPECT_EQ(g.condition("b").false_target, "c");
  EXPECT_EQ(g.condition("b").true_target, "T");
  EXPECT_EQ(g.condition("c").true_target, "T");
  EXPECT_EQ(g.condition("c").false_target, "F");
}

TEST(ExprToCfg, NonShortCircuitCollapses) {
  EXPECT_EQ(expr_to_cfg(parse_expr("a & b")).conditions.size(), 1u);
  EXPECT_EQ(expr_to_cfg(parse_expr("(a & b) && c")).conditions.size(), 2u);
  EXPECT_EQ(expr_to_cfg(parse_expr("a ^ b | c")).conditions.size(), 1u);
}

TEST(ExprToCfg, NamesAvoidClashes) {
  // repeated symbols and reserved names fall back to positional names
  EXPECT_EQ(expr_to_cfg(parse_expr("a && a")).conditions, (std::vector<VertexId>{"c0", "c1"}));
  EXPECT_EQ(expr_to_cfg(parse_expr("T && exit")).conditions, (std::vector<VertexId>{"c0", "c1"}));
  EXPECT_EQ(expr_to_cfg(parse_expr("c1 || x")).conditions, (std::vector<VertexId>{"c0", "x"}));
}

TEST(ExprToCfg, ClusterCountMatchesRecursion) {
  for (const auto& e : enumerate_expressions(4)) {
    auto g = expr_to_cfg(e);
    ASSERT_EQ(g.conditions.size(), clusters_by_recursion(e, e.root())) << e.to_string(e.root(), true);
  }
}

TEST(Simulate, AndRuns) {
  auto e = parse_expr("a && b");
  EXPECT_EQ(simulate(e, {{"a", true}, {"b", false}}).path,
            (std::vector<VertexId>{"entry", "a", "b", "F", "exit"}));
  EXPECT_EQ(simulate(e, {{"a", false}, {"b", true}}).path,
            (std::vector<VertexId>{"entry", "a", "F", "exit"}));
  EXPECT_EQ(simulate(parse_expr("a"), {{"a", true}}).path,
            (std::vector<VertexId>{"entry", "a", "T", "exit"}));
  EXPECT_EQ(harness_kind([&] { simulate(e, {{"a", true}}); }), HarnessErrorKind::IncompleteAssignment);
}

TEST(Simulate, SinkMatchesDirectEvaluation) {
  for (const auto* text : kSamples) {
    auto e = parse_expr(text);
    auto g = expr_to_cfg(e);
    for (const auto& [a, run] : enumerate_runs(e)) {
      bool expect = TextEval(text, a).value();
      ASSERT_EQ(run.path[run.path.size() - 2], expect ? "T" : "F") << text;
      EXPECT_FALSE(validate_run(g.cfg, run)) << text;
      // the short-circuit oracle agrees on the sink as well
      EXPECT_EQ(oracle::ExprModel(e).run(a, run.test_name).outcome, expect);
    }
  }
}

TEST(EnumerateRuns, Counts) {
  auto count_true = [](const char* text) {
    std::size_t n = 0;
    for (const auto& [a, run] : enumerate_runs(parse_expr(text))) n += run.path[run.path.size() - 2] == "T";
    return n;
  };
  EXPECT_EQ(enumerate_runs(parse_expr("a && b")).size(), 4u);
  EXPECT_EQ(count_true("a && b"), 1u);
  EXPECT_EQ(enumerate_runs(parse_expr("(a && b) || c")).size(), 8u);
  EXPECT_EQ(count_true("(a && b) || c"), 5u);
  EXPECT_EQ(enumerate_runs(parse_expr("a")).size(), 2u);
  EXPECT_EQ(enumerate_runs(parse_expr("a && b")).front().second.test_name, "FF");
  EXPECT_EQ(harness_kind([] { enumerate_runs(parse_expr("a && b && c"), 2); }),
            HarnessErrorKind::TooManySymbols);
}

TEST(TestVectors, Forms) {
  std::vector<std::string> syms{"a", "b", "c"};
  auto v = parse_test_vector("TF-", syms);
  EXPECT_EQ(v.assignment, (Assignment{{"a", true}, {"b", false}, {"c", false}}));
  EXPECT_EQ(v.dont_care, std::set<std::string>{"c"});
  EXPECT_EQ(parse_test_vector("101", syms).assignment, (Assignment{{"a", true}, {"b", false}, {"c", true}}));
  EXPECT_EQ(harness_kind([&] { parse_test_vector("TF", syms); }), HarnessErrorKind::BadVector);
  EXPECT_EQ(harness_kind([&] { parse_test_vector("TFTT", syms); }), HarnessErrorKind::BadVector);
  EXPECT_EQ(harness_kind([&] { parse_test_vector("TXF", syms); }), HarnessErrorKind::BadVector);
  EXPECT_EQ(vector_string(syms, v.assignment, v.dont_care), "TF-");
}

TEST(EnumerateExpressions, Counts) {
  // n leaves: Catalan(n-1) shapes times 5^(n-1) operator choices
  EXPECT_EQ(enumerate_expressions(1).size(), 1u);
  EXPECT_EQ(enumerate_expressions(2).size(), 1u + 5u);
  EXPECT_EQ(enumerate_expressions(3).size(), 1u + 5u + 2u * 25u);
  EXPECT_EQ(enumerate_expressions(4).size(), 1u + 5u + 50u + 5u * 125u);
}

TEST(ExprCfdg, OneDecisionPerExpression) {
  for (const auto& e : enumerate_expressions(4)) {
    auto g = expr_to_cfg(e);
    auto cfdg = create_cfdg(g.cfg).cfdg;
    ASSERT_EQ(cfdg.decisions().size(), 1u) << e.to_string(e.root(), true);
    EXPECT_EQ(cfdg.decisions()[0].members, std::set<VertexId>(g.conditions.begin(), g.conditions.end()));
  }
}
