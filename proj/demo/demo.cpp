// Walks through the library on `(a && b) || c`: build the CFG, infer its
// decision, run a few tests and report MC/DC, then ask for the smallest
// suites.

#include <iostream>

#include "cfdg/cfdg.hpp"

int main() {
  auto expr = cfdg::parse_expr("(a && b) || c");
  auto graph = cfdg::expr_to_cfg(expr);
  auto inferred = cfdg::create_cfdg(graph.cfg);
  const auto& cfdg = inferred.cfdg;

  for (const auto& d : cfdg.decisions()) {
    std::cout << "decision " << d.id << " entry " << d.entry << ", members:";
    for (const auto& m : d.members) std::cout << " " << m;
    std::cout << ", exits:";
    for (const auto& s : cfdg.external_successors(d)) std::cout << " " << s;
    std::cout << "\n";
  }
  std::cout << "invariants "
            << (cfdg::verify_decision_invariants(cfdg).passed() ? "hold" : "FAIL") << "\n\n";

  cfdg::TestSuite suite;
  for (const auto* v : {"TT-", "F-F", "TFT"}) {
    auto vec = cfdg::parse_test_vector(v, expr.symbols());
    suite.add(cfdg::simulate(graph, expr, vec.assignment, v));
  }
  std::cout << cfdg::serialize_traces(suite) << "\n";
  std::cout << cfdg::format_report(cfdg::evaluate(cfdg, suite, cfdg::Criterion::MCDC)) << "\n";

  auto best = cfdg::minimal_suites(expr, cfdg::Criterion::MCDC);
  std::cout << "smallest MC/DC suites: " << best.suites.size() << " of size "
            << best.minimal_size.value_or(0) << "\n";
  for (const auto& s : best.suites) {
    std::cout << " ";
    for (const auto& r : s.runs()) std::cout << " " << r.test_name;
    std::cout << "\n";
  }

  std::cout << "\n" << cfdg::emit_annotated_dot(cfdg::parse_dot(cfdg::write_dot(graph.cfg, "demo")),
                                                std::vector<cfdg::Cfdg>{cfdg});
}
