#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

namespace {

struct Result {
  int status = -1;
  std::string out;
  std::string err;
};

std::string data(const std::string& name) { return std::string(CFDG_TEST_DATA) + "/" + name; }

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Result run(const std::string& args, const std::string& stdin_text = {}) {
  auto dir = std::filesystem::temp_directory_path();
  auto err_path = dir / ("cfdg_cli_err_" + std::to_string(::getpid()));
  std::string cmd = std::string(CFDG_CLI) + " " + args + " 2>" + quote(err_path.string());
  if (!stdin_text.empty()) {
    auto in_path = dir / ("cfdg_cli_in_" + std::to_string(::getpid()));
    std::ofstream(in_path, std::ios::binary) << stdin_text;
    cmd += " <" + quote(in_path.string());
  }
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  int status = ::pclose(pipe);
  r.status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err_path);
  std::filesystem::remove(err_path);
  return r;
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t c = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++c;
  return c;
}

}  // namespace

TEST(CliAnnotate, Listing2HasOneCluster) {
  auto r = run("annotate " + quote(data("listing2.dot")));
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(count(r.out, "subgraph cluster_decision_"), 1u);
  EXPECT_NE(r.out.find("label=\"Decision 0\""), std::string::npos) << r.out;
}

TEST(CliAnnotate, EmptyGraphUnchanged) {
  auto r = run("annotate " + quote(data("empty.dot")));
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out, slurp(data("empty.dot")));
}

TEST(CliAnnotate, StandardInputAndOutputFile) {
  auto out = std::filesystem::temp_directory_path() / "cfdg_cli_annotated.dot";
  auto r = run("annotate - -o " + quote(out.string()), slurp(data("listing1.dot")));
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(count(slurp(out), "subgraph cluster_decision_"), 1u);
  std::filesystem::remove(out);
}

TEST(CliAnnotate, NormalizeMergesClangLoop) {
  auto plain = run("annotate " + quote(data("clang_loop.dot")));
  EXPECT_EQ(plain.status, 0);
  EXPECT_EQ(count(plain.out, "subgraph cluster_decision_"), 2u);
  auto merged = run("annotate --normalize-interstitial " + quote(data("clang_loop.dot")));
  EXPECT_EQ(merged.status, 0) << merged.err;
  EXPECT_EQ(count(merged.out, "subgraph cluster_decision_"), 1u);
}

TEST(CliAnnotate, ErrorsExitOne) {
  auto missing = run("annotate /nonexistent/x.dot");
  EXPECT_EQ(missing.status, 1);
  EXPECT_NE(missing.err.find("cannot open"), std::string::npos);
  auto bad = run("annotate -", "graph g { a -- b }\n");
  EXPECT_EQ(bad.status, 1);
  EXPECT_EQ(run("annotate --dialect msvc " + quote(data("listing1.dot"))).status, 1);
  EXPECT_EQ(run("").status, 1);
}

TEST(CliCoverage, Listing1Mcdc) {
  auto r = run("coverage " + quote(data("listing1.dot")) + " " + quote(data("listing1.traces")));
  EXPECT_EQ(r.status, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("100"), std::string::npos) << r.out;
}

TEST(CliCoverage, SingleTraceIncomplete) {
  std::string trace = "t3: x0 a b x1 ret\n";
  auto sc = run("coverage --criterion sc " + quote(data("listing1.dot")) + " -", trace);
  EXPECT_EQ(sc.status, 0) << sc.out << sc.err;
  auto dc = run("coverage --criterion dc " + quote(data("listing1.dot")) + " -", trace);
  EXPECT_EQ(dc.status, 3) << dc.out;
}

TEST(CliCoverage, JsonReport) {
  auto r = run("coverage --format json --criterion cc --semantics strict " + quote(data("listing1.dot")) +
               " " + quote(data("listing1.traces")));
  EXPECT_EQ(r.status, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["criterion"], "cc");
  EXPECT_EQ(j["semantics"], "strict");
  EXPECT_EQ(j["loop_mode"], "traversal");
  EXPECT_DOUBLE_EQ(j["verdict_percent"].get<double>(), 100.0);
  for (const auto& o : j["obligations"]) EXPECT_EQ(o["status"], "satisfied");
}

TEST(CliCoverage, BadTraceReportsLine) {
  auto r = run("coverage " + quote(data("listing1.dot")) + " -", "t1: x0 a ret\nt2: x0 b ret\n");
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("2"), std::string::npos) << r.err;
}

TEST(CliCoverage, StrictExcludesAllowPartial) {
  auto r = run("coverage --strict --allow-partial " + quote(data("listing1.dot")) + " " +
               quote(data("listing1.traces")));
  EXPECT_EQ(r.status, 1);
}

TEST(CliCoverage, AllowPartialWarns) {
  auto r = run("coverage --allow-partial --criterion sc " + quote(data("listing1.dot")) + " -",
               "t: x0 a b\n");
  EXPECT_EQ(r.status, 3);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST(CliCoverage, UnknownFunction) {
  auto r = run("coverage --function nope " + quote(data("listing1.dot")) + " " + quote(data("listing1.traces")));
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("listing1"), std::string::npos) << r.err;
}

TEST(CliGen, ParsesAndAnnotates) {
  auto r = run("gen --annotate " + quote("(a && b) || c"));
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(count(r.out, "subgraph cluster_decision_"), 1u);
  EXPECT_NE(r.out.find("digraph cfg"), std::string::npos);
}

TEST(CliGen, SyntaxErrorShowsCaret) {
  auto r = run("gen " + quote("a &&"));
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("    ^"), std::string::npos) << r.err;
}

TEST(CliGen, OutputFeedsCoverage) {
  auto dir = std::filesystem::temp_directory_path();
  auto dot = dir / "cfdg_cli_gen.dot";
  auto traces = dir / "cfdg_cli_gen.traces";
  ASSERT_EQ(run("gen " + quote("a && b") + " -o " + quote(dot.string())).status, 0);
  ASSERT_EQ(run("simulate " + quote("a && b") + " TT TF F- -o " + quote(traces.string())).status, 0);
  EXPECT_EQ(run("coverage " + quote(dot.string()) + " " + quote(traces.string())).status, 0);
  EXPECT_EQ(run("coverage --semantics strict " + quote(dot.string()) + " " + quote(traces.string())).status, 3);
  std::filesystem::remove(dot);
  std::filesystem::remove(traces);
}

TEST(CliSimulate, TraceLines) {
  auto r = run("simulate " + quote("a && b") + " TT F-");
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(count(r.out, "\n"), 2u);
  EXPECT_EQ(r.out.rfind("t0: ", 0), 0u) << r.out;
  EXPECT_NE(r.out.find("t1: "), std::string::npos);
}

TEST(CliSimulate, DontCareEvaluatedWarns) {
  auto r = run("simulate " + quote("a && b") + " T-");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.err.find("'b'"), std::string::npos) << r.err;
  EXPECT_EQ(run("simulate " + quote("a && b") + " TTT").status, 1);
}

TEST(CliOracle, AndMcdc) {
  auto r = run("oracle " + quote("a && b"));
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("minimal size: 3"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("F-"), std::string::npos);
}

TEST(CliOracle, StrictUnsatisfiable) {
  auto r = run("oracle --semantics strict " + quote("a || b"));
  EXPECT_EQ(r.status, 3);
  EXPECT_NE(r.out.find("unsatisfiable"), std::string::npos);
  EXPECT_NE(r.out.find("independence_pair a"), std::string::npos) << r.out;
}

TEST(CliOracle, TooManySymbols) {
  auto r = run("oracle " + quote("a && b && c && d && e && f && g && h && i && j && k"));
  EXPECT_EQ(r.status, 1);
}
