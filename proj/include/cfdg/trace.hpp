// Test runs: vertex paths through a Cfg, the text trace format, and the
// split of a run into passes through one decision.
//
// Trace format, one run per line:
//
//   name: v1 v2 ... vk     # comment
//
// Tokens are whitespace separated. A token containing whitespace, '#', '"'
// or '\' (or ':' for the run name) is written in double quotes with '\"' and
// '\\' escapes.
#pragma once

#include <cctype>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cfdg/graph.hpp"

namespace cfdg {

struct Run {
  std::string test_name;
  std::vector<VertexId> path;

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (std::size_t i = 1; i < path.size(); ++i) out.push_back({path[i - 1], path[i]});
    return out;
  }
  std::set<Edge> edge_set() const {
    auto e = edges();
    return {e.begin(), e.end()};
  }

  friend bool operator==(const Run&, const Run&) = default;
};

enum class RunErrorKind { EmptyPath, UnknownVertex, NotAtEntry, NotAtExit, DanglingStep };

inline std::string_view to_string(RunErrorKind k) {
  switch (k) {
    case RunErrorKind::EmptyPath: return "EmptyPath";
    case RunErrorKind::UnknownVertex: return "UnknownVertex";
    case RunErrorKind::NotAtEntry: return "NotAtEntry";
    case RunErrorKind::NotAtExit: return "NotAtExit";
    case RunErrorKind::DanglingStep: return "DanglingStep";
  }
  return "?";
}

struct RunIssue {
  RunErrorKind kind;
  std::size_t position = 0;  // 1-based index into the path
  std::string message;
};

/// Checks that the path starts at an entry vertex, ends at an exit vertex and
/// that every consecutive pair is an edge of the graph.
inline std::optional<RunIssue> validate_run(const Cfg& cfg, const Run& run) {
  if (run.path.empty()) return RunIssue{RunErrorKind::EmptyPath, 0, "run has no vertices"};
  for (std::size_t i = 0; i < run.path.size(); ++i) {
    if (!cfg.contains(run.path[i]))
      return RunIssue{RunErrorKind::UnknownVertex, i + 1,
                      "vertex '" + run.path[i] + "' is not in the graph"};
  }
  if (cfg.indegree(cfg.index_of(run.path.front())) != 0)
    return RunIssue{RunErrorKind::NotAtEntry, 1,
                    "run starts at '" + run.path.front() + "', which is not an entry vertex"};
  for (std::size_t i = 1; i < run.path.size(); ++i) {
    if (!cfg.has_edge(run.path[i - 1], run.path[i]))
      return RunIssue{RunErrorKind::DanglingStep, i + 1,
                      "no edge " + run.path[i - 1] + " -> " + run.path[i]};
  }
  if (cfg.outdegree(cfg.index_of(run.path.back())) != 0)
    return RunIssue{RunErrorKind::NotAtExit, run.path.size(),
                    "run stops at '" + run.path.back() + "', which is not an exit vertex"};
  return std::nullopt;
}

class TraceError : public std::runtime_error {
 public:
  TraceError(std::size_t line, std::string run_name, const std::string& message,
             std::optional<RunIssue> issue = std::nullopt)
      : std::runtime_error("line " + std::to_string(line) +
                           (run_name.empty() ? "" : " (run '" + run_name + "')") + ": " + message),
        line_(line),
        run_name_(std::move(run_name)),
        issue_(std::move(issue)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& run_name() const noexcept { return run_name_; }
  const std::optional<RunIssue>& issue() const noexcept { return issue_; }

 private:
  std::size_t line_;
  std::string run_name_;
  std::optional<RunIssue> issue_;
};

class TestSuite {
 public:
  TestSuite() = default;
  explicit TestSuite(std::vector<Run> runs) {
    for (auto& r : runs) add(std::move(r));
  }

  /// Throws std::invalid_argument on a duplicate test name.
  void add(Run run) {
    if (!names_.emplace(run.test_name, runs_.size()).second)
      throw std::invalid_argument("duplicate test name '" + run.test_name + "'");
    runs_.push_back(std::move(run));
  }

  const std::vector<Run>& runs() const noexcept { return runs_; }
  std::size_t size() const noexcept { return runs_.size(); }
  bool empty() const noexcept { return runs_.empty(); }

  const Run* find(const std::string& name) const {
    auto it = names_.find(name);
    return it == names_.end() ? nullptr : &runs_[it->second];
  }

  friend bool operator==(const TestSuite& a, const TestSuite& b) { return a.runs_ == b.runs_; }

 private:
  std::vector<Run> runs_;
  std::map<std::string, std::size_t> names_;
};

namespace detail {

class TraceLineLexer {
 public:
  TraceLineLexer(std::string_view line, std::size_t line_no) : s_(line), line_(line_no) {}

  void skip_space() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ < s_.size() && s_[pos_] == '#') pos_ = s_.size();
  }
  bool done() {
    skip_space();
    return pos_ >= s_.size();
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void advance() { ++pos_; }
  std::size_t column() const { return pos_ + 1; }

  /// Reads a quoted token or a bare token ending at whitespace, '#' or any
  /// character in `stops`.
  std::string token(std::string_view stops, const std::string& run_name) {
    skip_space();
    std::string out;
    if (peek() == '"') {
      ++pos_;
      while (true) {
        if (pos_ >= s_.size())
          throw TraceError(line_, run_name, "unterminated quoted token at column " +
                                                std::to_string(column()));
        char c = s_[pos_++];
        if (c == '"') break;
        if (c == '\\') {
          if (pos_ >= s_.size())
            throw TraceError(line_, run_name, "dangling escape at end of line");
          c = s_[pos_++];
        }
        out.push_back(c);
      }
      return out;
    }
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (std::isspace(static_cast<unsigned char>(c)) || c == '#' || c == '"' ||
          stops.find(c) != std::string_view::npos)
        break;
      out.push_back(c);
      ++pos_;
    }
    return out;
  }

 private:
  std::string_view s_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

inline bool needs_quotes(std::string_view tok, bool is_name) {
  if (tok.empty()) return true;
  for (char c : tok) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '#' || c == '"' || c == '\\')
      return true;
    if (is_name && c == ':') return true;
  }
  return false;
}

inline std::string quote_token(std::string_view tok, bool is_name) {
  if (!needs_quotes(tok, is_name)) return std::string(tok);
  std::string out = "\"";
  for (char c : tok) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace detail

/// Parses trace text without checking it against a graph. Each run is paired
/// with the 1-based line it came from.
inline std::vector<std::pair<std::size_t, Run>> read_traces(std::string_view text) {
  std::vector<std::pair<std::size_t, Run>> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    start = end + 1;

    detail::TraceLineLexer lex(line, line_no);
    if (lex.done()) {
      if (end == text.size()) break;
      continue;
    }
    Run run;
    run.test_name = lex.token(":", "");
    if (run.test_name.empty())
      throw TraceError(line_no, "", "missing run name at column " + std::to_string(lex.column()));
    lex.skip_space();
    if (lex.peek() != ':')
      throw TraceError(line_no, run.test_name,
                       "expected ':' after run name at column " + std::to_string(lex.column()));
    lex.advance();
    while (!lex.done()) run.path.push_back(lex.token("", run.test_name));
    if (run.path.empty()) throw TraceError(line_no, run.test_name, "run has no vertices");
    out.emplace_back(line_no, std::move(run));
    if (end == text.size()) break;
  }
  return out;
}

struct TraceOptions {
  /// Downgrade NotAtExit (truncated traces) from an error to a warning.
  bool allow_partial = false;
  /// Vertices removed from every path before validation, e.g. those
  /// contracted by normalize_interstitial.
  std::set<VertexId> drop;
};

inline TestSuite parse_traces(std::string_view text, const Cfg& cfg, TraceOptions options = {},
                              std::vector<std::string>* warnings = nullptr) {
  TestSuite suite;
  for (auto& [line, run] : read_traces(text)) {
    if (!options.drop.empty())
      std::erase_if(run.path, [&](const VertexId& v) { return options.drop.contains(v); });
    if (auto issue = validate_run(cfg, run)) {
      if (issue->kind == RunErrorKind::NotAtExit && options.allow_partial) {
        if (warnings)
          warnings->push_back("line " + std::to_string(line) + " (run '" + run.test_name +
                              "'): partial trace, " + issue->message);
      } else {
        throw TraceError(line, run.test_name,
                         std::string(to_string(issue->kind)) + " at position " +
                             std::to_string(issue->position) + ": " + issue->message,
                         issue);
      }
    }
    if (suite.find(run.test_name))
      throw TraceError(line, run.test_name, "duplicate run name");
    suite.add(std::move(run));
  }
  return suite;
}

inline std::string serialize_traces(const TestSuite& suite) {
  std::string out;
  for (const auto& run : suite.runs()) {
    out += detail::quote_token(run.test_name, true);
    out += ':';
    for (const auto& v : run.path) {
      out += ' ';
      out += detail::quote_token(v, false);
    }
    out += '\n';
  }
  return out;
}

/// One contiguous pass of a run through a decision.
struct DecisionTraversal {
  std::string run_name;
  std::size_t first_edge = 0;      // index into run.edges()
  std::vector<Edge> internal_edges;  // edges leaving members, ending with the exit edge
  VertexId outcome;                 // external successor reached

  friend bool operator==(const DecisionTraversal&, const DecisionTraversal&) = default;
};

/// Splits the run at every edge that leaves the decision. A trailing pass
/// that never leaves (truncated trace) is dropped.
inline std::vector<DecisionTraversal> decision_traversals(const Run& run, const Decision& decision,
                                                          const Cfg& /*cfg*/) {
  std::vector<DecisionTraversal> out;
  DecisionTraversal current{run.test_name, 0, {}, {}};
  for (std::size_t i = 1; i < run.path.size(); ++i) {
    const auto& tail = run.path[i - 1];
    const auto& head = run.path[i];
    if (!decision.contains(tail)) continue;
    if (current.internal_edges.empty()) current.first_edge = i - 1;
    current.internal_edges.push_back({tail, head});
    if (!decision.contains(head)) {
      current.outcome = head;
      out.push_back(std::move(current));
      current = DecisionTraversal{run.test_name, 0, {}, {}};
    }
  }
  return out;
}

}  // namespace cfdg
