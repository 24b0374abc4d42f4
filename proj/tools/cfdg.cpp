// cfdg: annotate compiler CFG dumps with decisions and measure coverage.
//
// Exit codes: 0 success, 1 I/O, parse or usage error, 2 invariant warnings
// under --strict, 3 coverage below 100%.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cfdg/cfdg.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kInvariant = 2;
constexpr int kIncomplete = 3;

struct Failure {
  std::string message;
};

std::string read_input(const std::string& path) {
  if (path == "-") {
    return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{path + ": cannot open for reading"};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Failure{path + ": cannot write"};
}

cfdg::DotDocument load_dot(const std::string& path, const std::string& dialect) {
  std::optional<cfdg::Dialect> d;
  if (!dialect.empty()) d = cfdg::parse_dialect(dialect);
  auto text = read_input(path);
  try {
    auto doc = cfdg::parse_dot(std::move(text), d);
    for (const auto& w : doc.warnings()) std::cerr << path << ": warning: " << w << "\n";
    return doc;
  } catch (const cfdg::DotSyntaxError& e) {
    throw Failure{path + ":" + e.what()};
  } catch (const std::exception& e) {
    throw Failure{path + ": " + e.what()};
  }
}

cfdg::DecisionExpr load_expr(const std::string& text) {
  try {
    return cfdg::parse_expr(text);
  } catch (const cfdg::ExprSyntaxError& e) {
    throw Failure{std::string(e.what()) + "\n  " + text + "\n  " + std::string(e.position(), ' ') +
                  "^"};
  }
}

/// Infers decisions for one function and reports invariant violations.
/// Returns false when any check failed.
bool infer(const cfdg::Cfg& cfg, const std::string& where, std::vector<cfdg::Cfdg>& out) {
  auto result = cfdg::create_cfdg(cfg);
  for (const auto& v : result.stats.self_loops)
    std::cerr << where << ": warning: self-loop on condition '" << v << "' ignored\n";
  auto report = cfdg::verify_decision_invariants(result.cfdg);
  for (const auto& m : report.messages()) std::cerr << where << ": warning: " << m << "\n";
  out.push_back(std::move(result.cfdg));
  return report.passed();
}

int cmd_annotate(const std::vector<std::string>& inputs, const std::string& output,
                 const std::string& dialect, bool normalize, bool strict) {
  std::string text;
  bool clean = true;
  for (const auto& path : inputs) {
    auto doc = load_dot(path, dialect);
    std::vector<cfdg::Cfdg> cfdgs;
    for (const auto& f : doc.functions) {
      auto where = path + ": function '" + f.name + "'";
      clean &= infer(normalize ? cfdg::normalize_interstitial(f.cfg).cfg : f.cfg, where, cfdgs);
    }
    try {
      text += cfdg::emit_annotated_dot(doc, cfdgs);
    } catch (const std::exception& e) {
      throw Failure{path + ": " + e.what()};
    }
  }
  write_output(output, text);
  return strict && !clean ? kInvariant : kOk;
}

struct CoverageArgs {
  std::string dot, traces, output, dialect, function;
  std::string criterion = "mcdc", semantics = "masking", loop_mode = "traversal", format = "text";
  bool normalize = false, strict = false, allow_partial = false;
};

/// The selected function, or all functions side by side.
cfdg::Cfg select_graph(const cfdg::DotDocument& doc, const std::string& function) {
  if (!function.empty()) {
    for (const auto& f : doc.functions)
      if (f.name == function) return f.cfg;
    std::string names;
    for (const auto& f : doc.functions) names += " " + f.name;
    throw Failure{"no function named '" + function + "'; available:" + names};
  }
  if (doc.functions.size() == 1) return doc.functions.front().cfg;
  cfdg::CfgData data;
  for (const auto& f : doc.functions) {
    for (const auto& v : f.cfg.vertices()) {
      if (std::find(data.vertices.begin(), data.vertices.end(), v) != data.vertices.end())
        throw Failure{"vertex '" + v + "' occurs in several functions; use --function"};
      data.vertices.push_back(v);
    }
    data.edges.insert(data.edges.end(), f.cfg.edges().begin(), f.cfg.edges().end());
    data.labels.insert(f.cfg.labels().begin(), f.cfg.labels().end());
    data.edge_labels.insert(f.cfg.edge_labels().begin(), f.cfg.edge_labels().end());
  }
  return cfdg::Cfg::build(std::move(data));
}

int cmd_coverage(const CoverageArgs& a) {
  auto doc = load_dot(a.dot, a.dialect);
  auto cfg = select_graph(doc, a.function);
  cfdg::TraceOptions trace_options{a.allow_partial, {}};
  if (a.normalize) {
    auto n = cfdg::normalize_interstitial(cfg);
    for (const auto& [v, target] : n.contracted) trace_options.drop.insert(v);
    cfg = std::move(n.cfg);
  }
  std::vector<cfdg::Cfdg> cfdgs;
  bool clean = infer(cfg, a.dot, cfdgs);
  if (a.strict && !clean) return kInvariant;
  const auto& graph = cfdgs.front();

  auto trace_text = read_input(a.traces);
  cfdg::TestSuite suite;
  std::vector<std::string> warnings;
  try {
    suite = cfdg::parse_traces(trace_text, graph.cfg(), trace_options, &warnings);
  } catch (const cfdg::TraceError& e) {
    throw Failure{a.traces + ": " + e.what()};
  }
  for (const auto& w : warnings) std::cerr << a.traces << ": warning: " << w << "\n";

  cfdg::EvalOptions opt{*cfdg::parse_semantics(a.semantics), *cfdg::parse_loop_mode(a.loop_mode)};
  auto report = cfdg::evaluate(graph, suite, *cfdg::parse_criterion(a.criterion), opt);
  write_output(a.output, a.format == "json" ? cfdg::report_to_json(report) + "\n"
                                            : cfdg::format_report(report));
  return report.complete() ? kOk : kIncomplete;
}

int cmd_gen(const std::string& expr_text, bool annotate, const std::string& name,
            const std::string& output) {
  auto expr = load_expr(expr_text);
  auto text = cfdg::write_dot(cfdg::expr_to_cfg(expr).cfg, name);
  if (annotate) {
    auto doc = cfdg::parse_dot(text, cfdg::Dialect::Generic);
    std::vector<cfdg::Cfdg> cfdgs;
    infer(doc.functions.front().cfg, "gen", cfdgs);
    text = cfdg::emit_annotated_dot(doc, cfdgs);
  }
  write_output(output, text);
  return kOk;
}

int cmd_simulate(const std::string& expr_text, const std::vector<std::string>& vectors,
                 const std::string& output) {
  auto expr = load_expr(expr_text);
  auto symbols = expr.symbols();
  auto graph = cfdg::expr_to_cfg(expr);
  cfdg::TestSuite suite;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    cfdg::TestVector v;
    try {
      v = cfdg::parse_test_vector(vectors[i], symbols);
    } catch (const cfdg::HarnessError& e) {
      throw Failure{e.what()};
    }
    auto name = "t" + std::to_string(i);
    auto run = cfdg::simulate(graph, expr, v.assignment, name);
    for (const auto& vertex : run.path) {
      if (!graph.cfg.is_condition(graph.cfg.index_of(vertex))) continue;
      for (const auto& s : graph.condition(vertex).symbols)
        if (v.dont_care.contains(s))
          std::cerr << "warning: " << name << ": input '" << s
                    << "' is marked '-' but is evaluated (taken as false)\n";
    }
    suite.add(std::move(run));
  }
  write_output(output, cfdg::serialize_traces(suite));
  return kOk;
}

int cmd_oracle(const std::string& expr_text, const std::string& criterion,
               const std::string& semantics, const std::string& loop_mode,
               const std::string& output) {
  auto expr = load_expr(expr_text);
  cfdg::MinimalSuites result;
  try {
    result = cfdg::minimal_suites(expr, *cfdg::parse_criterion(criterion),
                                  *cfdg::parse_semantics(semantics),
                                  *cfdg::parse_loop_mode(loop_mode));
  } catch (const cfdg::HarnessError& e) {
    throw Failure{e.what()};
  }
  std::string text;
  text += "criterion: " + std::string(cfdg::display_name(*cfdg::parse_criterion(criterion))) +
          "  semantics: " + semantics + "  loop-mode: " + loop_mode + "\n";
  if (!result.minimal_size) {
    text += "unsatisfiable: no suite reaches 100%\n";
    for (const auto& u : result.unsatisfiable) text += "  " + u + "\n";
    write_output(output, text);
    return kIncomplete;
  }
  text += "minimal size: " + std::to_string(*result.minimal_size) + "\n";
  text += "suites: " + std::to_string(result.suites.size()) + "\n";
  for (const auto& s : result.suites) {
    text += "  {";
    for (std::size_t i = 0; i < s.size(); ++i) text += (i ? ", " : "") + s.runs()[i].test_name;
    text += "}\n";
  }
  write_output(output, text);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Infer decisions in control-flow graphs and evaluate coverage criteria"};
  app.require_subcommand(1);

  const std::vector<std::string> criteria{"sc", "dc", "cc", "dcc", "mcc", "fpc", "mcdc"};
  const std::vector<std::string> semantics{"masking", "strict", "paper-literal"};
  const std::vector<std::string> loop_modes{"traversal", "edge-set"};
  const std::vector<std::string> dialects{"gcc", "clang", "generic"};

  std::vector<std::string> inputs;
  std::string output, dialect;
  bool normalize = false, strict = false;
  auto* annotate = app.add_subcommand("annotate", "Wrap each decision of a dot CFG in a cluster");
  annotate->add_option("inputs", inputs, "dot files, '-' for standard input")->required();
  annotate->add_option("-o,--output", output, "output path (default: standard output)");
  annotate->add_option("--dialect", dialect, "dot flavour (default: detected)")
      ->check(CLI::IsMember(dialects));
  annotate->add_flag("--normalize-interstitial", normalize,
                     "contract pass-through blocks between conditions first");
  annotate->add_flag("--strict", strict, "exit 2 when a decision fails an invariant check");

  CoverageArgs cov;
  auto* coverage = app.add_subcommand("coverage", "Evaluate a coverage criterion from run traces");
  coverage->add_option("dot", cov.dot, "dot file, '-' for standard input")->required();
  coverage->add_option("traces", cov.traces, "trace file, '-' for standard input")->required();
  coverage->add_option("--criterion", cov.criterion, "criterion (default: mcdc)")
      ->check(CLI::IsMember(criteria));
  coverage->add_option("--semantics", cov.semantics, "independence semantics (default: masking)")
      ->check(CLI::IsMember(semantics));
  coverage->add_option("--loop-mode", cov.loop_mode, "observation unit (default: traversal)")
      ->check(CLI::IsMember(loop_modes));
  coverage->add_option("--format", cov.format, "report format (default: text)")
      ->check(CLI::IsMember({"text", "json"}));
  coverage->add_option("--function", cov.function, "evaluate one function only");
  coverage->add_option("--dialect", cov.dialect, "dot flavour (default: detected)")
      ->check(CLI::IsMember(dialects));
  coverage->add_option("-o,--output", cov.output, "output path (default: standard output)");
  coverage->add_flag("--normalize-interstitial", cov.normalize,
                     "contract pass-through blocks between conditions first");
  auto* cov_strict =
      coverage->add_flag("--strict", cov.strict, "exit 2 when a decision fails an invariant check");
  coverage->add_flag("--allow-partial", cov.allow_partial, "accept traces that stop before an exit")
      ->excludes(cov_strict);

  std::string expr_text, name = "cfg";
  bool pre_annotate = false;
  auto* gen = app.add_subcommand("gen", "Generate the CFG of a boolean expression as dot");
  gen->add_option("expr", expr_text, "expression, e.g. \"(a && b) || c\"")->required();
  gen->add_flag("--annotate", pre_annotate, "include the decision cluster");
  gen->add_option("--name", name, "graph name (default: cfg)");
  gen->add_option("-o,--output", output, "output path (default: standard output)");

  std::vector<std::string> vectors;
  auto* sim = app.add_subcommand("simulate", "Print the runs of test vectors as trace lines");
  sim->add_option("expr", expr_text, "expression")->required();
  sim->add_option("vectors", vectors, "vectors such as TT, TF or F- (first symbol first)")
      ->required();
  sim->add_option("-o,--output", output, "output path (default: standard output)");

  std::string criterion = "mcdc", sem = "masking", loop_mode = "traversal";
  auto* oracle = app.add_subcommand("oracle", "List the smallest suites meeting a criterion");
  oracle->add_option("expr", expr_text, "expression (at most 10 symbols)")->required();
  oracle->add_option("--criterion", criterion, "criterion (default: mcdc)")
      ->check(CLI::IsMember(criteria));
  oracle->add_option("--semantics", sem, "independence semantics (default: masking)")
      ->check(CLI::IsMember(semantics));
  oracle->add_option("--loop-mode", loop_mode, "observation unit (default: traversal)")
      ->check(CLI::IsMember(loop_modes));
  oracle->add_option("-o,--output", output, "output path (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kError;
  }

  try {
    if (*annotate) return cmd_annotate(inputs, output, dialect, normalize, strict);
    if (*coverage) return cmd_coverage(cov);
    if (*gen) return cmd_gen(expr_text, pre_annotate, name, output);
    if (*sim) return cmd_simulate(expr_text, vectors, output);
    if (*oracle) return cmd_oracle(expr_text, criterion, sem, loop_mode, output);
  } catch (const Failure& f) {
    std::cerr << "cfdg: " << f.message << "\n";
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "cfdg: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
