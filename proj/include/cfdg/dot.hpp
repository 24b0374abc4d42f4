// GraphViz dot reader and annotating writer for compiler CFG dumps.
//
// The reader keeps byte offsets for every statement so the writer can splice
// the original text: it renames `cluster*` subgraphs (a cluster nested in a
// cluster hides the decision boxes) and inserts one
// `subgraph cluster_decision_<f>_<n>` per decision before the closing brace
// of the function that owns it. Everything else is copied unchanged.
//
// Functions per dialect:
//   gcc      each top-level subgraph; top-level node or edge statements
//            outside any subgraph form one extra function
//   clang    each digraph; the name is taken from "CFG for 'f' function"
//   generic  each digraph
#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "cfdg/graph.hpp"

namespace cfdg {

enum class Dialect { Gcc, Clang, Generic };

inline std::string_view to_string(Dialect d) {
  switch (d) {
    case Dialect::Gcc: return "gcc";
    case Dialect::Clang: return "clang";
    case Dialect::Generic: return "generic";
  }
  return "?";
}

inline std::optional<Dialect> parse_dialect(std::string_view s) {
  if (s == "gcc") return Dialect::Gcc;
  if (s == "clang") return Dialect::Clang;
  if (s == "generic") return Dialect::Generic;
  return std::nullopt;
}

class DotSyntaxError : public std::runtime_error {
 public:
  DotSyntaxError(std::size_t line, std::size_t column, const std::string& message)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_, column_;
};

enum class DotErrorKind { NotADigraph, DecisionVertexMissing, FunctionMismatch, InvalidFunction };

inline std::string_view to_string(DotErrorKind k) {
  switch (k) {
    case DotErrorKind::NotADigraph: return "NotADigraph";
    case DotErrorKind::DecisionVertexMissing: return "DecisionVertexMissing";
    case DotErrorKind::FunctionMismatch: return "FunctionMismatch";
    case DotErrorKind::InvalidFunction: return "InvalidFunction";
  }
  return "?";
}

class DotError : public std::runtime_error {
 public:
  DotError(DotErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}
  DotErrorKind kind() const noexcept { return kind_; }

 private:
  DotErrorKind kind_;
};

/// Half-open byte range into the source text.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct DotAttr {
  std::string key;
  std::string value;
};

struct DotNodeRef {
  std::string id;
  std::optional<std::string> port;
  Span span;
};

struct NodeStmt {
  DotNodeRef node;
  std::vector<DotAttr> attrs;
};

struct EdgeStmt {
  std::vector<DotNodeRef> chain;
  std::vector<DotAttr> attrs;
  std::size_t line = 0;
};

/// `graph [...]`, `node [...]` or `edge [...]`.
struct AttrStmt {
  std::string target;
  std::vector<DotAttr> attrs;
};

/// `key = value` at statement level.
struct AssignStmt {
  DotAttr attr;
};

struct SubgraphStmt {
  std::size_t block = 0;
};

using DotStmtBody = std::variant<NodeStmt, EdgeStmt, AttrStmt, AssignStmt, SubgraphStmt>;

struct DotStmt {
  DotStmtBody body;
  Span span;
};

struct DotBlock {
  std::optional<std::string> name;
  Span name_span;  // raw name token; empty when unnamed
  Span close;      // the closing brace
  std::optional<std::size_t> parent;
  std::vector<DotStmt> stmts;
};

struct DotGraph {
  bool strict = false;
  std::string name;
  Span span;
  /// blocks[0] is the graph body; subgraphs refer to later entries.
  std::vector<DotBlock> blocks;
};

struct DotFunction {
  std::string name;
  Cfg cfg;
  std::size_t graph = 0;
  /// Block whose closing brace receives the decision clusters.
  std::size_t block = 0;
  /// Graph-level attributes in scope for the function, in source order.
  std::vector<DotAttr> passthrough_attrs;
  std::vector<std::string> warnings;
};

struct DotDocument {
  std::string source;
  Dialect dialect = Dialect::Generic;
  std::vector<DotGraph> graphs;
  std::vector<DotFunction> functions;

  std::vector<std::string> warnings() const {
    std::vector<std::string> out;
    for (const auto& f : functions)
      for (const auto& w : f.warnings) out.push_back("function '" + f.name + "': " + w);
    return out;
  }
};

inline bool is_decision_cluster_name(std::string_view name) {
  static const std::regex re(R"(cluster_decision_\d+_\d+)");
  return std::regex_match(name.begin(), name.end(), re);
}

/// gcc when a `<bb n>` block label is present, clang when an `%n:` label or a
/// "CFG for '...'" title is present, generic otherwise.
inline Dialect detect_dialect(std::string_view text) {
  if (text.find("<bb ") != std::string_view::npos || text.find("\\<bb\\ ") != std::string_view::npos)
    return Dialect::Gcc;
  static const std::regex clang_label(R"(%[0-9]+:)");
  if (text.find("CFG for '") != std::string_view::npos ||
      std::regex_search(text.begin(), text.end(), clang_label))
    return Dialect::Clang;
  return Dialect::Generic;
}

namespace detail {

enum class DotTok { Id, LBrace, RBrace, LBracket, RBracket, Semi, Comma, Colon, Equal, Arrow, Line, End };

struct DotToken {
  DotTok kind = DotTok::End;
  std::string text;  // decoded value for identifiers
  bool quoted = false;
  Span span;
  std::size_t line = 1;
  std::size_t column = 1;
};

class DotLexer {
 public:
  explicit DotLexer(std::string_view s) : s_(s) {}

  DotToken next() {
    skip();
    DotToken t;
    t.span.begin = pos_;
    t.line = line_;
    t.column = pos_ - line_start_ + 1;
    if (pos_ >= s_.size()) {
      t.span.end = pos_;
      return t;
    }
    char c = s_[pos_];
    auto single = [&](DotTok k) {
      ++pos_;
      t.kind = k;
      t.span.end = pos_;
      return t;
    };
    switch (c) {
      case '{': return single(DotTok::LBrace);
      case '}': return single(DotTok::RBrace);
      case '[': return single(DotTok::LBracket);
      case ']': return single(DotTok::RBracket);
      case ';': return single(DotTok::Semi);
      case ',': return single(DotTok::Comma);
      case ':': return single(DotTok::Colon);
      case '=': return single(DotTok::Equal);
      default: break;
    }
    if (c == '-' && pos_ + 1 < s_.size() && (s_[pos_ + 1] == '>' || s_[pos_ + 1] == '-')) {
      t.kind = s_[pos_ + 1] == '>' ? DotTok::Arrow : DotTok::Line;
      pos_ += 2;
      t.span.end = pos_;
      return t;
    }
    t.kind = DotTok::Id;
    if (c == '"') {
      t.quoted = true;
      t.text = quoted(t);
      // "a" + "b" concatenation
      while (true) {
        auto save = pos_;
        auto save_line = line_;
        auto save_start = line_start_;
        skip();
        if (pos_ < s_.size() && s_[pos_] == '+') {
          ++pos_;
          skip();
          if (pos_ < s_.size() && s_[pos_] == '"') {
            t.text += quoted(t);
            continue;
          }
          throw error("expected a quoted string after '+'");
        }
        pos_ = save;
        line_ = save_line;
        line_start_ = save_start;
        break;
      }
    } else if (c == '<') {
      t.quoted = true;
      t.text = html(t);
    } else if (is_id_start(c)) {
      while (pos_ < s_.size() && is_id_char(s_[pos_])) t.text.push_back(s_[pos_++]);
    } else if (c == '-' || c == '.' || std::isdigit(static_cast<unsigned char>(c))) {
      t.text = numeral();
    } else {
      throw error(std::string("unexpected character '") + c + "'");
    }
    t.span.end = pos_;
    return t;
  }

  DotSyntaxError error(const std::string& message) const {
    return DotSyntaxError(line_, pos_ - line_start_ + 1, message);
  }

 private:
  static bool is_id_start(char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalpha(u) || c == '_' || u >= 0x80;
  }
  static bool is_id_char(char c) {
    return is_id_start(c) || std::isdigit(static_cast<unsigned char>(c));
  }

  void newline() {
    ++line_;
    line_start_ = pos_ + 1;
  }

  void skip() {
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (c == '\n') {
        newline();
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '#' && at_line_start()) {
        // preprocessor output
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else if (c == '/' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '/') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else if (c == '/' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '*') {
        auto l = line_, col = pos_ - line_start_ + 1;
        pos_ += 2;
        while (pos_ + 1 < s_.size() && !(s_[pos_] == '*' && s_[pos_ + 1] == '/')) {
          if (s_[pos_] == '\n') newline();
          ++pos_;
        }
        if (pos_ + 1 >= s_.size()) throw DotSyntaxError(l, col, "unterminated comment");
        pos_ += 2;
      } else {
        break;
      }
    }
  }

  bool at_line_start() const {
    for (auto p = line_start_; p < pos_; ++p)
      if (s_[p] != ' ' && s_[p] != '\t') return false;
    return true;
  }

  std::string quoted(const DotToken& t) {
    std::string out;
    ++pos_;
    while (true) {
      if (pos_ >= s_.size()) throw DotSyntaxError(t.line, t.column, "unterminated string");
      char c = s_[pos_++];
      if (c == '"') break;
      if (c == '\\' && pos_ < s_.size()) {
        char n = s_[pos_];
        if (n == '"') {
          out.push_back('"');
          ++pos_;
          continue;
        }
        if (n == '\n' || (n == '\r' && pos_ + 1 < s_.size() && s_[pos_ + 1] == '\n')) {
          pos_ += n == '\r' ? 2 : 1;
          newline_at(pos_ - 1);
          continue;
        }
        out.push_back(c);
        out.push_back(n);
        ++pos_;
        continue;
      }
      if (c == '\n') newline_at(pos_ - 1);
      out.push_back(c);
    }
    return out;
  }

  void newline_at(std::size_t p) {
    ++line_;
    line_start_ = p + 1;
  }

  std::string html(const DotToken& t) {
    int depth = 0;
    auto begin = pos_;
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (c == '\n') newline_at(pos_);
      ++pos_;
      if (c == '<') ++depth;
      if (c == '>' && --depth == 0)
        return std::string(s_.substr(begin + 1, pos_ - begin - 2));
    }
    throw DotSyntaxError(t.line, t.column, "unterminated HTML string");
  }

  std::string numeral() {
    auto begin = pos_;
    if (s_[pos_] == '-') ++pos_;
    bool digits = false;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_, digits = true;
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_, digits = true;
    }
    if (!digits) throw error("malformed number");
    return std::string(s_.substr(begin, pos_ - begin));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t line_start_ = 0;
};

class DotParser {
 public:
  explicit DotParser(std::string_view text) : lex_(text) { advance(); }

  std::vector<DotGraph> parse() {
    std::vector<DotGraph> graphs;
    while (tok_.kind != DotTok::End) graphs.push_back(graph());
    return graphs;
  }

 private:
  static bool keyword(const DotToken& t, std::string_view kw) {
    if (t.kind != DotTok::Id || t.quoted || t.text.size() != kw.size()) return false;
    for (std::size_t i = 0; i < kw.size(); ++i)
      if (std::tolower(static_cast<unsigned char>(t.text[i])) != kw[i]) return false;
    return true;
  }
  static bool reserved(const DotToken& t) {
    for (auto kw : {"node", "edge", "graph", "digraph", "subgraph", "strict"})
      if (keyword(t, kw)) return true;
    return false;
  }

  void advance() {
    prev_end_ = tok_.span.end;
    tok_ = lex_.next();
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw DotSyntaxError(tok_.line, tok_.column, message);
  }

  static std::string describe(const DotToken& t) {
    switch (t.kind) {
      case DotTok::Id: return "'" + t.text + "'";
      case DotTok::LBrace: return "'{'";
      case DotTok::RBrace: return "'}'";
      case DotTok::LBracket: return "'['";
      case DotTok::RBracket: return "']'";
      case DotTok::Semi: return "';'";
      case DotTok::Comma: return "','";
      case DotTok::Colon: return "':'";
      case DotTok::Equal: return "'='";
      case DotTok::Arrow: return "'->'";
      case DotTok::Line: return "'--'";
      case DotTok::End: return "end of input";
    }
    return "?";
  }

  void expect(DotTok k, std::string_view what) {
    if (tok_.kind != k) fail("expected " + std::string(what) + ", found " + describe(tok_));
    advance();
  }

  DotGraph graph() {
    DotGraph g;
    g.span.begin = tok_.span.begin;
    if (keyword(tok_, "strict")) {
      g.strict = true;
      advance();
    }
    if (keyword(tok_, "graph"))
      throw DotError(DotErrorKind::NotADigraph,
                     "line " + std::to_string(tok_.line) + ": undirected graphs are not CFGs");
    if (!keyword(tok_, "digraph")) fail("expected 'digraph', found " + describe(tok_));
    advance();
    DotBlock root;
    if (tok_.kind == DotTok::Id && !reserved(tok_)) {
      g.name = tok_.text;
      root.name = tok_.text;
      root.name_span = tok_.span;
      advance();
    }
    expect(DotTok::LBrace, "'{'");
    g.blocks.push_back(std::move(root));
    body(g, 0);
    g.span.end = prev_end_;
    return g;
  }

  /// Parses statements up to and including the closing brace of block `b`.
  void body(DotGraph& g, std::size_t b) {
    while (tok_.kind != DotTok::RBrace) {
      if (tok_.kind == DotTok::End) fail("missing '}'");
      statement(g, b);
      if (tok_.kind == DotTok::Semi) advance();
    }
    g.blocks[b].close = tok_.span;
    advance();
  }

  std::vector<DotAttr> attr_lists() {
    std::vector<DotAttr> out;
    while (tok_.kind == DotTok::LBracket) {
      advance();
      while (tok_.kind != DotTok::RBracket) {
        if (tok_.kind != DotTok::Id) fail("expected attribute name, found " + describe(tok_));
        DotAttr a{tok_.text, "true"};
        advance();
        if (tok_.kind == DotTok::Equal) {
          advance();
          if (tok_.kind != DotTok::Id) fail("expected attribute value, found " + describe(tok_));
          a.value = tok_.text;
          advance();
        }
        out.push_back(std::move(a));
        if (tok_.kind == DotTok::Comma || tok_.kind == DotTok::Semi) advance();
      }
      advance();
    }
    return out;
  }

  DotNodeRef node_ref() {
    DotNodeRef r{tok_.text, std::nullopt, tok_.span};
    advance();
    if (tok_.kind == DotTok::Colon) {
      advance();
      if (tok_.kind != DotTok::Id) fail("expected port after ':', found " + describe(tok_));
      r.port = tok_.text;
      advance();
      if (tok_.kind == DotTok::Colon) {
        advance();
        if (tok_.kind != DotTok::Id) fail("expected compass point after ':', found " + describe(tok_));
        *r.port += ":" + tok_.text;
        advance();
      }
    }
    r.span.end = prev_end_;
    return r;
  }

  std::size_t subgraph(DotGraph& g, std::size_t parent) {
    DotBlock blk;
    blk.parent = parent;
    if (keyword(tok_, "subgraph")) {
      advance();
      if (tok_.kind == DotTok::Id && !reserved(tok_)) {
        blk.name = tok_.text;
        blk.name_span = tok_.span;
        advance();
      }
    }
    expect(DotTok::LBrace, "'{'");
    g.blocks.push_back(std::move(blk));
    auto index = g.blocks.size() - 1;
    body(g, index);
    return index;
  }

  void statement(DotGraph& g, std::size_t b) {
    DotStmt st;
    st.span.begin = tok_.span.begin;
    auto line = tok_.line;
    auto finish = [&](DotStmtBody body) {
      st.body = std::move(body);
      st.span.end = prev_end_;
      g.blocks[b].stmts.push_back(std::move(st));
    };

    if (keyword(tok_, "graph") || keyword(tok_, "node") || keyword(tok_, "edge")) {
      AttrStmt a{tok_.text, {}};
      for (auto& ch : a.target) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      advance();
      if (tok_.kind != DotTok::LBracket) fail("expected '[' after '" + a.target + "'");
      a.attrs = attr_lists();
      return finish(std::move(a));
    }
    if (keyword(tok_, "subgraph") || tok_.kind == DotTok::LBrace) {
      auto index = subgraph(g, b);
      if (tok_.kind == DotTok::Arrow || tok_.kind == DotTok::Line)
        fail("subgraphs as edge endpoints are not supported");
      return finish(SubgraphStmt{index});
    }
    if (tok_.kind != DotTok::Id || reserved(tok_)) fail("unexpected " + describe(tok_));

    // ID '=' ID
    auto first = tok_;
    auto ref = node_ref();
    if (tok_.kind == DotTok::Equal && !ref.port) {
      advance();
      if (tok_.kind != DotTok::Id) fail("expected value after '=', found " + describe(tok_));
      AssignStmt as{{first.text, tok_.text}};
      advance();
      return finish(std::move(as));
    }
    if (tok_.kind == DotTok::Line) fail("'--' is not allowed in a digraph");
    if (tok_.kind == DotTok::Arrow) {
      EdgeStmt e;
      e.line = line;
      e.chain.push_back(std::move(ref));
      while (tok_.kind == DotTok::Arrow) {
        advance();
        if (keyword(tok_, "subgraph") || tok_.kind == DotTok::LBrace)
          fail("subgraphs as edge endpoints are not supported");
        if (tok_.kind != DotTok::Id || reserved(tok_))
          fail("expected node after '->', found " + describe(tok_));
        e.chain.push_back(node_ref());
      }
      if (tok_.kind == DotTok::Line) fail("'--' is not allowed in a digraph");
      e.attrs = attr_lists();
      return finish(std::move(e));
    }
    NodeStmt n{std::move(ref), attr_lists()};
    return finish(std::move(n));
  }

  DotLexer lex_;
  DotToken tok_;
  std::size_t prev_end_ = 0;
};

inline const std::string* find_attr(const std::vector<DotAttr>& attrs, std::string_view key) {
  const std::string* found = nullptr;
  for (const auto& a : attrs)
    if (a.key == key) found = &a.value;  // last one wins
  return found;
}

/// Collects the graph of one function from the given blocks.
class FunctionBuilder {
 public:
  FunctionBuilder(const DotGraph& g, Dialect dialect) : g_(g), dialect_(dialect) {}

  void add_block(std::size_t b, bool recurse) {
    for (const auto& st : g_.blocks[b].stmts) {
      if (const auto* n = std::get_if<NodeStmt>(&st.body)) {
        vertex(n->node.id);
        if (const auto* label = find_attr(n->attrs, "label")) data_.labels[n->node.id] = *label;
      } else if (const auto* e = std::get_if<EdgeStmt>(&st.body)) {
        for (const auto& r : e->chain) vertex(r.id);
        const auto* style = find_attr(e->attrs, "style");
        if (style && style->find("invis") != std::string::npos) {
          ++invisible_;
          continue;
        }
        const auto* label = find_attr(e->attrs, "label");
        for (std::size_t i = 1; i < e->chain.size(); ++i) {
          Edge edge{e->chain[i - 1].id, e->chain[i].id};
          data_.edges.push_back(edge);
          if (label) {
            data_.edge_labels.emplace(edge, *label);
          } else if (dialect_ == Dialect::Clang && e->chain[i - 1].port) {
            const auto& port = *e->chain[i - 1].port;
            if (port == "s0") data_.edge_labels.emplace(edge, "T");
            if (port == "s1") data_.edge_labels.emplace(edge, "F");
          }
        }
      } else if (const auto* a = std::get_if<AttrStmt>(&st.body)) {
        if (a->target == "graph") attrs_.insert(attrs_.end(), a->attrs.begin(), a->attrs.end());
      } else if (const auto* as = std::get_if<AssignStmt>(&st.body)) {
        attrs_.push_back(as->attr);
      } else if (const auto* sg = std::get_if<SubgraphStmt>(&st.body)) {
        if (recurse) add_block(sg->block, true);
      }
    }
  }

  bool empty() const { return data_.vertices.empty(); }

  DotFunction build(std::string name, std::size_t graph_index, std::size_t block) {
    DotFunction f;
    f.name = std::move(name);
    f.graph = graph_index;
    f.block = block;
    f.passthrough_attrs = attrs_;
    try {
      f.cfg = Cfg::build(data_);
    } catch (const GraphError& e) {
      throw DotError(DotErrorKind::InvalidFunction, "function '" + f.name + "': " + e.what());
    }
    f.warnings = f.cfg.warnings();
    if (invisible_ > 0)
      f.warnings.push_back("ignored " + std::to_string(invisible_) + " invisible edge statement(s)");
    return f;
  }

 private:
  void vertex(const std::string& id) {
    if (seen_.insert(id).second) data_.vertices.push_back(id);
  }

  const DotGraph& g_;
  Dialect dialect_;
  CfgData data_;
  std::set<std::string> seen_;
  std::vector<DotAttr> attrs_;
  std::size_t invisible_ = 0;
};

inline std::string function_name_of(const DotGraph& g, std::size_t index) {
  static const std::regex clang_title(R"(CFG for '(.+)' function)");
  std::smatch m;
  if (std::regex_match(g.name, m, clang_title)) return m[1].str();
  return g.name.empty() ? "function" + std::to_string(index) : g.name;
}

inline bool is_bare_id(std::string_view id) {
  if (id.empty()) return false;
  auto first = static_cast<unsigned char>(id.front());
  if (std::isalpha(first) || id.front() == '_' || first >= 0x80) {
    for (char c : id) {
      auto u = static_cast<unsigned char>(c);
      if (!(std::isalnum(u) || c == '_' || u >= 0x80)) return false;
    }
    static const std::set<std::string, std::less<>> kw = {"node", "edge", "graph", "digraph",
                                                          "subgraph", "strict"};
    std::string lower(id);
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return !kw.contains(lower);
  }
  static const std::regex numeral(R"(-?(\.[0-9]+|[0-9]+(\.[0-9]*)?))");
  return std::regex_match(id.begin(), id.end(), numeral);
}

}  // namespace detail

/// Writes `id` as a dot identifier, quoting when needed.
inline std::string dot_id(std::string_view id) {
  if (detail::is_bare_id(id)) return std::string(id);
  std::string out = "\"";
  for (std::size_t i = 0; i < id.size(); ++i) {
    if (id[i] == '"') out += "\\\"";
    else if (id[i] == '\\' && i + 1 == id.size()) out += "\\\\";
    else out.push_back(id[i]);
  }
  return out + "\"";
}

/// Always-quoted form, used for labels.
inline std::string dot_id_quoted(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '\\';
    out.push_back(c);
  }
  return out + "\"";
}

inline DotDocument parse_dot(std::string text, std::optional<Dialect> dialect = std::nullopt) {
  DotDocument doc;
  doc.dialect = dialect ? *dialect : detect_dialect(text);
  doc.source = std::move(text);
  doc.graphs = detail::DotParser(doc.source).parse();

  for (std::size_t gi = 0; gi < doc.graphs.size(); ++gi) {
    const auto& g = doc.graphs[gi];
    if (doc.dialect != Dialect::Gcc) {
      detail::FunctionBuilder fb(g, doc.dialect);
      fb.add_block(0, true);
      doc.functions.push_back(fb.build(detail::function_name_of(g, doc.functions.size()), gi, 0));
      continue;
    }
    // One function per top-level subgraph; earlier decision clusters are not functions.
    detail::FunctionBuilder stray(g, doc.dialect);
    bool any_function = false;
    std::vector<DotFunction> found;
    for (const auto& st : g.blocks[0].stmts) {
      const auto* sg = std::get_if<SubgraphStmt>(&st.body);
      if (!sg) continue;
      const auto& blk = g.blocks[sg->block];
      if (blk.name && is_decision_cluster_name(*blk.name)) {
        stray.add_block(sg->block, true);
        continue;
      }
      detail::FunctionBuilder fb(g, doc.dialect);
      fb.add_block(sg->block, true);
      std::string name = blk.name.value_or("");
      if (name.starts_with("cluster_")) name = name.substr(8);
      if (name.empty()) name = "function" + std::to_string(doc.functions.size() + found.size());
      found.push_back(fb.build(name, gi, sg->block));
      any_function = true;
    }
    stray.add_block(0, false);
    if (!any_function) {
      detail::FunctionBuilder whole(g, doc.dialect);
      whole.add_block(0, true);
      doc.functions.push_back(whole.build(detail::function_name_of(g, doc.functions.size()), gi, 0));
      continue;
    }
    for (auto& f : found) doc.functions.push_back(std::move(f));
    if (!stray.empty())
      doc.functions.push_back(stray.build(detail::function_name_of(g, doc.functions.size()), gi, 0));
  }
  return doc;
}

namespace detail {

struct Splice {
  std::size_t at;
  std::size_t erase;
  std::string insert;
};

inline std::string apply_splices(const std::string& src, std::vector<Splice> edits) {
  std::stable_sort(edits.begin(), edits.end(),
                   [](const Splice& a, const Splice& b) { return a.at < b.at; });
  std::string out;
  std::size_t pos = 0;
  for (const auto& e : edits) {
    if (e.at < pos) continue;  // overlaps an earlier erase
    out.append(src, pos, e.at - pos);
    out += e.insert;
    pos = e.at + e.erase;
  }
  out.append(src, pos, std::string::npos);
  return out;
}

/// Extends a statement span to cover its whole line when it stands alone.
inline Span line_of(const std::string& src, Span s) {
  auto b = s.begin;
  while (b > 0 && (src[b - 1] == ' ' || src[b - 1] == '\t')) --b;
  auto e = s.end;
  while (e < src.size() && (src[e] == ' ' || src[e] == '\t' || src[e] == ';')) ++e;
  if ((b == 0 || src[b - 1] == '\n') && (e == src.size() || src[e] == '\n'))
    return {b, e < src.size() ? e + 1 : e};
  return s;
}

inline std::size_t block_depth(const DotGraph& g, std::size_t b) {
  std::size_t d = 0;
  while (g.blocks[b].parent) {
    b = *g.blocks[b].parent;
    ++d;
  }
  return d;
}

}  // namespace detail

/// Splices decision clusters into the document's original text. `cfdgs`
/// holds one entry per function, in document order.
inline std::string emit_annotated_dot(const DotDocument& doc, std::span<const Cfdg> cfdgs) {
  if (cfdgs.size() != doc.functions.size())
    throw DotError(DotErrorKind::FunctionMismatch,
                   std::to_string(cfdgs.size()) + " decision graph(s) for " +
                       std::to_string(doc.functions.size()) + " function(s)");
  const auto& src = doc.source;
  std::vector<detail::Splice> edits;

  for (const auto& g : doc.graphs) {
    for (std::size_t b = 1; b < g.blocks.size(); ++b) {
      const auto& blk = g.blocks[b];
      if (!blk.name || is_decision_cluster_name(*blk.name)) continue;
      if (!blk.name->starts_with("cluster")) continue;
      auto renamed = blk.name->substr(7);
      if (renamed.empty()) renamed = "_";
      bool quoted = src[blk.name_span.begin] == '"';
      edits.push_back({blk.name_span.begin, blk.name_span.end - blk.name_span.begin,
                       quoted ? "\"" + renamed + "\"" : dot_id(renamed)});
    }
    // Earlier annotations are replaced, not stacked.
    for (const auto& blk : g.blocks)
      for (const auto& st : blk.stmts)
        if (const auto* sg = std::get_if<SubgraphStmt>(&st.body)) {
          const auto& inner = g.blocks[sg->block];
          if (inner.name && is_decision_cluster_name(*inner.name)) {
            auto span = detail::line_of(src, st.span);
            edits.push_back({span.begin, span.end - span.begin, ""});
          }
        }
  }

  for (std::size_t fi = 0; fi < doc.functions.size(); ++fi) {
    const auto& f = doc.functions[fi];
    const auto& cfdg = cfdgs[fi];
    if (cfdg.decisions().empty()) continue;
    const auto& g = doc.graphs[f.graph];
    const auto& blk = g.blocks[f.block];
    auto depth = detail::block_depth(g, f.block);
    std::string indent(2 * (depth + 1), ' ');

    std::string text;
    for (const auto& d : cfdg.decisions()) {
      for (const auto& m : d.members)
        if (!f.cfg.contains(m))
          throw DotError(DotErrorKind::DecisionVertexMissing,
                         "function '" + f.name + "': decision " + std::to_string(d.id) +
                             " member '" + m + "' is not in the document");
      text += indent + "subgraph cluster_decision_" + std::to_string(fi) + "_" +
              std::to_string(d.id) + " {\n";
      text += indent + "  label=\"Decision " + std::to_string(d.id) + "\";\n";
      // Members in document order keeps the output stable.
      for (const auto& v : f.cfg.vertices())
        if (d.members.contains(v)) text += indent + "  " + dot_id(v) + ";\n";
      text += indent + "}\n";
    }

    auto at = blk.close.begin;
    auto line_start = at;
    while (line_start > 0 && (src[line_start - 1] == ' ' || src[line_start - 1] == '\t')) --line_start;
    if (line_start == 0 || src[line_start - 1] == '\n') {
      edits.push_back({line_start, 0, text});
    } else {
      edits.push_back({at, 0, "\n" + text});
    }
  }
  return detail::apply_splices(src, std::move(edits));
}

inline std::string emit_annotated_dot(const DotDocument& doc, const std::vector<Cfdg>& cfdgs) {
  return emit_annotated_dot(doc, std::span<const Cfdg>(cfdgs));
}

/// Generic-dialect dot for a Cfg. Conditions are diamonds; edge labels are kept.
inline std::string write_dot(const Cfg& cfg, std::string_view name = "cfg") {
  std::string out = "digraph " + dot_id(name) + " {\n";
  out += "  node [shape=box];\n";
  for (std::size_t i = 0; i < cfg.size(); ++i) {
    const auto& v = cfg.id(i);
    out += "  " + dot_id(v);
    std::vector<std::string> attrs;
    if (auto it = cfg.labels().find(v); it != cfg.labels().end())
      attrs.push_back("label=" + dot_id_quoted(it->second));
    if (cfg.is_condition(i)) attrs.push_back("shape=diamond");
    if (!attrs.empty()) {
      out += " [";
      for (std::size_t k = 0; k < attrs.size(); ++k) out += (k ? ", " : "") + attrs[k];
      out += "]";
    }
    out += ";\n";
  }
  for (const auto& e : cfg.edges()) {
    out += "  " + dot_id(e.tail) + " -> " + dot_id(e.head);
    if (auto it = cfg.edge_labels().find(e); it != cfg.edge_labels().end())
      out += " [label=" + dot_id_quoted(it->second) + "]";
    out += ";\n";
  }
  return out + "}\n";
}

}  // namespace cfdg
