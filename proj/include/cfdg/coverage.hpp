// Coverage criteria over a Cfdg and a test suite.
//
// Each criterion is a set of obligations. A run is a path; its edges with a
// tail inside a decision are what the decision-level criteria look at. How
// runs become observations of a decision depends on the loop mode:
//
//   traversal  every pass through the decision is one observation
//   edge-set   every run is one observation holding all of its edges
//
// Independence (MCC, MC/DC) compares two observations in which a condition v
// took different edges. The other conditions must agree:
//
//   masking        conditions evaluated in both observations took the same edges
//   strict         the edge sets over the other conditions are identical
//   paper-literal  the set comparison with c and x bound existentially, which
//                  always holds (choose c = v and both sides are empty)
//
// The outcome flip for MC/DC reads "outcome" as the external successor each
// observation reached; paper-literal instead requires one member o that took
// the edge to each of the two external successors.
#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdio>
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

enum class Criterion { SC, DC, CC, DCC, MCC, FPC, MCDC };
enum class Semantics { Masking, Strict, PaperLiteral };
enum class LoopMode { Traversal, EdgeSet };

enum class ObligationKind {
  VertexVisit,
  EntryVisit,
  ExitVisit,
  DecisionOutcome,
  ConditionOutcome,
  IndependencePair,
};

enum class Status { Satisfied, Missing };

inline constexpr Criterion kAllCriteria[] = {Criterion::SC,  Criterion::DC,  Criterion::CC,
                                             Criterion::DCC, Criterion::MCC, Criterion::FPC,
                                             Criterion::MCDC};
inline constexpr Semantics kAllSemantics[] = {Semantics::Masking, Semantics::Strict,
                                              Semantics::PaperLiteral};

inline std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::SC: return "sc";
    case Criterion::DC: return "dc";
    case Criterion::CC: return "cc";
    case Criterion::DCC: return "dcc";
    case Criterion::MCC: return "mcc";
    case Criterion::FPC: return "fpc";
    case Criterion::MCDC: return "mcdc";
  }
  return "?";
}

inline std::string_view display_name(Criterion c) {
  switch (c) {
    case Criterion::SC: return "SC";
    case Criterion::DC: return "DC";
    case Criterion::CC: return "CC";
    case Criterion::DCC: return "D/CC";
    case Criterion::MCC: return "MCC";
    case Criterion::FPC: return "FPC";
    case Criterion::MCDC: return "MC/DC";
  }
  return "?";
}

inline std::string_view to_string(Semantics s) {
  switch (s) {
    case Semantics::Masking: return "masking";
    case Semantics::Strict: return "strict";
    case Semantics::PaperLiteral: return "paper-literal";
  }
  return "?";
}

inline std::string_view to_string(LoopMode m) {
  return m == LoopMode::Traversal ? "traversal" : "edge-set";
}

inline std::string_view to_string(ObligationKind k) {
  switch (k) {
    case ObligationKind::VertexVisit: return "vertex_visit";
    case ObligationKind::EntryVisit: return "entry_visit";
    case ObligationKind::ExitVisit: return "exit_visit";
    case ObligationKind::DecisionOutcome: return "decision_outcome";
    case ObligationKind::ConditionOutcome: return "condition_outcome";
    case ObligationKind::IndependencePair: return "independence_pair";
  }
  return "?";
}

inline std::string_view to_string(Status s) { return s == Status::Satisfied ? "satisfied" : "missing"; }

namespace detail {
template <typename E, std::size_t N>
std::optional<E> enum_from(std::string_view token, const E (&values)[N]) {
  for (auto v : values)
    if (to_string(v) == token) return v;
  return std::nullopt;
}
}  // namespace detail

inline std::optional<Criterion> parse_criterion(std::string_view s) {
  return detail::enum_from(s, kAllCriteria);
}
inline std::optional<Semantics> parse_semantics(std::string_view s) {
  return detail::enum_from(s, kAllSemantics);
}
inline std::optional<LoopMode> parse_loop_mode(std::string_view s) {
  constexpr LoopMode all[] = {LoopMode::Traversal, LoopMode::EdgeSet};
  return detail::enum_from(s, all);
}
inline std::optional<ObligationKind> parse_obligation_kind(std::string_view s) {
  constexpr ObligationKind all[] = {ObligationKind::VertexVisit,      ObligationKind::EntryVisit,
                                    ObligationKind::ExitVisit,        ObligationKind::DecisionOutcome,
                                    ObligationKind::ConditionOutcome, ObligationKind::IndependencePair};
  return detail::enum_from(s, all);
}
inline std::optional<Status> parse_status(std::string_view s) {
  constexpr Status all[] = {Status::Satisfied, Status::Missing};
  return detail::enum_from(s, all);
}

struct Obligation {
  ObligationKind kind;
  std::string subject;  // vertex id, or "Decision <n>"
  Status status = Status::Missing;
  /// Run names; one entry per witness, pairs for two-run witnesses.
  std::vector<std::vector<std::string>> witnesses{};
  std::string detail{};

  bool satisfied() const { return status == Status::Satisfied; }
  friend bool operator==(const Obligation&, const Obligation&) = default;
};

struct CoverageReport {
  Criterion criterion = Criterion::SC;
  Semantics semantics = Semantics::Masking;
  LoopMode loop_mode = LoopMode::Traversal;
  std::vector<Obligation> obligations;

  std::size_t total() const { return obligations.size(); }
  std::size_t satisfied() const {
    return static_cast<std::size_t>(std::count_if(
        obligations.begin(), obligations.end(), [](const auto& o) { return o.satisfied(); }));
  }
  /// 100 when there is nothing to cover.
  double verdict_percent() const {
    return total() == 0 ? 100.0 : 100.0 * static_cast<double>(satisfied()) / static_cast<double>(total());
  }
  bool complete() const { return satisfied() == total(); }

  const Obligation* find(ObligationKind kind, std::string_view subject) const {
    for (const auto& o : obligations)
      if (o.kind == kind && o.subject == subject) return &o;
    return nullptr;
  }
  std::vector<const Obligation*> of_kind(ObligationKind kind) const {
    std::vector<const Obligation*> out;
    for (const auto& o : obligations)
      if (o.kind == kind) out.push_back(&o);
    return out;
  }

  friend bool operator==(const CoverageReport&, const CoverageReport&) = default;
};

struct EvalOptions {
  Semantics semantics = Semantics::Masking;
  LoopMode loop_mode = LoopMode::Traversal;
};

inline std::string decision_subject(const Decision& d) { return "Decision " + std::to_string(d.id); }

namespace detail {

/// Compares strings treating digit runs as numbers ("c2" < "c10").
inline bool natural_less(std::string_view a, std::string_view b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    bool da = std::isdigit(static_cast<unsigned char>(a[i]));
    bool db = std::isdigit(static_cast<unsigned char>(b[j]));
    if (da && db) {
      auto ei = i, ej = j;
      while (ei < a.size() && std::isdigit(static_cast<unsigned char>(a[ei]))) ++ei;
      while (ej < b.size() && std::isdigit(static_cast<unsigned char>(b[ej]))) ++ej;
      auto na = a.substr(i, ei - i);
      auto nb = b.substr(j, ej - j);
      while (na.size() > 1 && na.front() == '0') na.remove_prefix(1);
      while (nb.size() > 1 && nb.front() == '0') nb.remove_prefix(1);
      if (na.size() != nb.size()) return na.size() < nb.size();
      if (na != nb) return na < nb;
      i = ei;
      j = ej;
      continue;
    }
    if (a[i] != b[j]) return a[i] < b[j];
    ++i;
    ++j;
  }
  return a.size() - i < b.size() - j;
}

inline void sort_obligations(std::vector<Obligation>& obs) {
  std::stable_sort(obs.begin(), obs.end(), [](const Obligation& x, const Obligation& y) {
    if (x.kind != y.kind) return x.kind < y.kind;
    return natural_less(x.subject, y.subject);
  });
}

/// A run (edge-set mode) or one pass through the decision (traversal mode).
struct Observation {
  std::size_t run;
  std::map<VertexId, std::set<VertexId>> taken;  // member -> heads taken
  std::set<VertexId> outcomes;                   // external successors reached
};

inline const std::set<VertexId>& taken_of(const Observation& o, const VertexId& v) {
  static const std::set<VertexId> none;
  auto it = o.taken.find(v);
  return it == o.taken.end() ? none : it->second;
}

inline std::vector<Observation> observe(const Cfdg& cfdg, const Decision& d, const TestSuite& suite,
                                        LoopMode mode) {
  std::vector<Observation> out;
  for (std::size_t r = 0; r < suite.size(); ++r) {
    const auto& run = suite.runs()[r];
    if (mode == LoopMode::Traversal) {
      for (const auto& t : decision_traversals(run, d, cfdg.cfg())) {
        Observation o{r, {}, {t.outcome}};
        for (const auto& e : t.internal_edges) o.taken[e.tail].insert(e.head);
        out.push_back(std::move(o));
      }
    } else {
      Observation o{r, {}, {}};
      for (const auto& e : run.edge_set()) {
        if (!d.contains(e.tail)) continue;
        o.taken[e.tail].insert(e.head);
        if (!d.contains(e.head)) o.outcomes.insert(e.head);
      }
      if (!o.taken.empty()) out.push_back(std::move(o));
    }
  }
  return out;
}

inline bool varies(const Observation& a, const Observation& b, const VertexId& v) {
  const auto& x = taken_of(a, v);
  const auto& y = taken_of(b, v);
  for (const auto& s1 : x)
    for (const auto& s2 : y)
      if (s1 != s2) return true;
  return false;
}

inline bool others_agree(const Observation& a, const Observation& b, const Decision& d,
                         const VertexId& v, Semantics semantics) {
  switch (semantics) {
    case Semantics::PaperLiteral:
      // c = v makes both comprehensions empty, so the existential always holds.
      return true;
    case Semantics::Strict:
      for (const auto& c : d.members)
        if (c != v && taken_of(a, c) != taken_of(b, c)) return false;
      return true;
    case Semantics::Masking:
      for (const auto& c : d.members) {
        if (c == v) continue;
        const auto& x = taken_of(a, c);
        const auto& y = taken_of(b, c);
        if (!x.empty() && !y.empty() && x != y) return false;
      }
      return true;
  }
  return false;
}

inline bool is_outcome_pair(const std::set<VertexId>& ext, const VertexId& x1, const VertexId& x2) {
  return ext.size() == 2 && x1 != x2 && ext.contains(x1) && ext.contains(x2);
}

/// The two observations reached the two different external successors.
inline bool outcome_flips(const Observation& a, const Observation& b, const std::set<VertexId>& ext) {
  for (const auto& x1 : a.outcomes)
    for (const auto& x2 : b.outcomes)
      if (is_outcome_pair(ext, x1, x2)) return true;
  return false;
}

/// One member o exits to one external successor in a and the other in b.
inline bool same_member_flips(const Observation& a, const Observation& b, const Decision& d,
                              const std::set<VertexId>& ext) {
  for (const auto& o : d.members)
    for (const auto& x1 : taken_of(a, o))
      for (const auto& x2 : taken_of(b, o))
        if (is_outcome_pair(ext, x1, x2)) return true;
  return false;
}

enum class PairRule { Mcc, Fpc, Mcdc };

inline Obligation independence(const TestSuite& suite, const std::vector<Observation>& obs,
                               const Decision& d, const std::set<VertexId>& ext, const VertexId& v,
                               PairRule rule, Semantics semantics) {
  Obligation ob{ObligationKind::IndependencePair, v};
  std::size_t varying = 0, agreeing = 0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    for (std::size_t j = i; j < obs.size(); ++j) {
      const auto& a = obs[i];
      const auto& b = obs[j];
      if (!varies(a, b, v)) continue;
      ++varying;
      bool agree = rule == PairRule::Fpc || others_agree(a, b, d, v, semantics);
      if (!agree) continue;
      ++agreeing;
      bool flip = true;
      if (rule == PairRule::Fpc) {
        flip = outcome_flips(a, b, ext);
      } else if (rule == PairRule::Mcdc) {
        flip = semantics == Semantics::PaperLiteral ? same_member_flips(a, b, d, ext)
                                                    : outcome_flips(a, b, ext);
      }
      if (!flip) continue;
      ob.status = Status::Satisfied;
      ob.witnesses.push_back({suite.runs()[a.run].test_name, suite.runs()[b.run].test_name});
      return ob;
    }
  }
  if (varying == 0) {
    ob.detail = "no two observations take different edges of " + v;
  } else if (agreeing == 0) {
    ob.detail = std::to_string(varying) + " pair(s) vary " + v +
                " but none hold the other conditions fixed (" + std::string(to_string(semantics)) +
                ")";
  } else {
    ob.detail = std::to_string(agreeing) + " pair(s) vary " + v +
                " but none change the decision outcome";
  }
  return ob;
}

inline CoverageReport make_report(Criterion c, const EvalOptions& opt, std::vector<Obligation> obs) {
  sort_obligations(obs);
  return CoverageReport{c, opt.semantics, opt.loop_mode, std::move(obs)};
}

inline std::vector<Obligation> sc_obligations(const Cfdg& cfdg, const TestSuite& suite) {
  std::vector<Obligation> out;
  const auto& cfg = cfdg.cfg();
  std::map<VertexId, std::string> first_visit;
  for (const auto& run : suite.runs())
    for (const auto& v : run.path) first_visit.emplace(v, run.test_name);
  for (const auto& v : cfg.vertices()) {
    Obligation ob{ObligationKind::VertexVisit, v};
    if (auto it = first_visit.find(v); it != first_visit.end()) {
      ob.status = Status::Satisfied;
      ob.witnesses.push_back({it->second});
    } else {
      ob.detail = "not visited by any run";
    }
    out.push_back(std::move(ob));
  }
  return out;
}

inline std::vector<Obligation> dc_obligations(const Cfdg& cfdg, const TestSuite& suite,
                                              LoopMode mode) {
  std::vector<Obligation> out;
  for (const auto& d : cfdg.decisions()) {
    Obligation ob{ObligationKind::DecisionOutcome, decision_subject(d)};
    auto ext = cfdg.external_successors(d);
    auto obs = observe(cfdg, d, suite, mode);
    if (mode == LoopMode::Traversal) {
      std::map<VertexId, std::string> reached;
      for (const auto& o : obs)
        for (const auto& x : o.outcomes) reached.emplace(x, suite.runs()[o.run].test_name);
      if (reached.size() >= 2) {
        ob.status = Status::Satisfied;
        auto it = reached.begin();
        auto first = it->second;
        ob.witnesses.push_back({first, std::next(it)->second});
      } else {
        std::string missing;
        for (const auto& x : ext)
          if (!reached.contains(x)) missing += (missing.empty() ? "" : ", ") + x;
        ob.detail = "outcome(s) never reached: " + (missing.empty() ? std::string("?") : missing);
      }
    } else {
      for (const auto& o : obs) {
        if (o.outcomes.size() >= 2) {
          ob.status = Status::Satisfied;
          ob.witnesses.push_back({suite.runs()[o.run].test_name});
          break;
        }
      }
      if (!ob.satisfied()) ob.detail = "no single run reaches both outcomes";
    }
    out.push_back(std::move(ob));
  }
  return out;
}

inline std::vector<Obligation> cc_obligations(const Cfdg& cfdg, const TestSuite& suite,
                                              LoopMode mode) {
  std::vector<Obligation> out;
  const auto& cfg = cfdg.cfg();
  for (const auto& d : cfdg.decisions()) {
    auto obs = observe(cfdg, d, suite, mode);
    for (const auto& v : d.members) {
      Obligation ob{ObligationKind::ConditionOutcome, v};
      if (mode == LoopMode::Traversal) {
        std::map<VertexId, std::string> taken;
        for (const auto& o : obs)
          for (const auto& h : taken_of(o, v)) taken.emplace(h, suite.runs()[o.run].test_name);
        if (taken.size() >= 2) {
          ob.status = Status::Satisfied;
          ob.witnesses.push_back({taken.begin()->second, std::next(taken.begin())->second});
        } else {
          std::string missing;
          for (auto s : cfg.succ(cfg.index_of(v)))
            if (!taken.contains(cfg.id(s))) missing += (missing.empty() ? "" : ", ") + cfg.id(s);
          ob.detail = "edge(s) never taken: " + v + " -> " + missing;
        }
      } else {
        for (const auto& o : obs) {
          if (taken_of(o, v).size() >= 2) {
            ob.status = Status::Satisfied;
            ob.witnesses.push_back({suite.runs()[o.run].test_name});
            break;
          }
        }
        if (!ob.satisfied()) ob.detail = "no single run takes both edges of " + v;
      }
      out.push_back(std::move(ob));
    }
  }
  return out;
}

inline std::vector<Obligation> pair_obligations(const Cfdg& cfdg, const TestSuite& suite,
                                                const EvalOptions& opt, PairRule rule) {
  std::vector<Obligation> out;
  for (const auto& d : cfdg.decisions()) {
    auto obs = observe(cfdg, d, suite, opt.loop_mode);
    auto ext = cfdg.external_successors(d);
    for (const auto& v : d.members)
      out.push_back(independence(suite, obs, d, ext, v, rule, opt.semantics));
  }
  return out;
}

inline std::vector<Obligation> entry_exit_obligations(const Cfdg& cfdg, const TestSuite& suite) {
  std::vector<Obligation> out;
  const auto& cfg = cfdg.cfg();
  auto visits = [&](const VertexId& v, bool as_entry) -> const Run* {
    for (const auto& run : suite.runs()) {
      if (run.path.size() == 1 && run.path.front() == v) return &run;
      for (std::size_t i = 1; i < run.path.size(); ++i)
        if ((as_entry ? run.path[i - 1] : run.path[i]) == v) return &run;
    }
    return nullptr;
  };
  for (auto i : cfg.entry_indices()) {
    Obligation ob{ObligationKind::EntryVisit, cfg.id(i)};
    if (const auto* r = visits(cfg.id(i), true)) {
      ob.status = Status::Satisfied;
      ob.witnesses.push_back({r->test_name});
    } else {
      ob.detail = "no run leaves the entry vertex";
    }
    out.push_back(std::move(ob));
  }
  for (auto i : cfg.exit_indices()) {
    Obligation ob{ObligationKind::ExitVisit, cfg.id(i)};
    if (const auto* r = visits(cfg.id(i), false)) {
      ob.status = Status::Satisfied;
      ob.witnesses.push_back({r->test_name});
    } else {
      ob.detail = "no run reaches this exit vertex";
    }
    out.push_back(std::move(ob));
  }
  return out;
}

}  // namespace detail

/// Every vertex visited by some run.
inline CoverageReport evaluate_sc(const Cfdg& cfdg, const TestSuite& suite, EvalOptions opt = {}) {
  return detail::make_report(Criterion::SC, opt, detail::sc_obligations(cfdg, suite));
}

/// Both outcomes of every decision. In edge-set mode both must occur in one run.
inline CoverageReport evaluate_dc(const Cfdg& cfdg, const TestSuite& suite, EvalOptions opt = {}) {
  return detail::make_report(Criterion::DC, opt, detail::dc_obligations(cfdg, suite, opt.loop_mode));
}

/// Both edges of every condition. In edge-set mode both must occur in one run.
inline CoverageReport evaluate_cc(const Cfdg& cfdg, const TestSuite& suite, EvalOptions opt = {}) {
  return detail::make_report(Criterion::CC, opt, detail::cc_obligations(cfdg, suite, opt.loop_mode));
}

inline CoverageReport evaluate_dcc(const Cfdg& cfdg, const TestSuite& suite, EvalOptions opt = {}) {
  auto obs = detail::sc_obligations(cfdg, suite);
  for (auto& o : detail::dc_obligations(cfdg, suite, opt.loop_mode)) obs.push_back(std::move(o));
  for (auto& o : detail::cc_obligations(cfdg, suite, opt.loop_mode)) obs.push_back(std::move(o));
  return detail::make_report(Criterion::DCC, opt, std::move(obs));
}

/// Every condition varied while the others are held fixed.
inline CoverageReport evaluate_mcc(const Cfdg& cfdg, const TestSuite& suite, EvalOptions opt = {}) {
  return detail::make_report(Criterion::MCC, opt,
                             detail::pair_obligations(cfdg, suite, opt, detail::PairRule::Mcc));
}

/// Every condition varied together with a change of the decision outcome.
/// The other conditions are free, so the semantics option has no effect.
inline CoverageReport evaluate_fpc(const Cfdg& cfdg, const TestSuite& suite, EvalOptions opt = {}) {
  return detail::make_report(Criterion::FPC, opt,
                             detail::pair_obligations(cfdg, suite, opt, detail::PairRule::Fpc));
}

inline CoverageReport evaluate_mcdc(const Cfdg& cfdg, const TestSuite& suite, EvalOptions opt = {}) {
  auto obs = detail::entry_exit_obligations(cfdg, suite);
  for (auto& o : detail::dc_obligations(cfdg, suite, opt.loop_mode)) obs.push_back(std::move(o));
  for (auto& o : detail::cc_obligations(cfdg, suite, opt.loop_mode)) obs.push_back(std::move(o));
  for (auto& o : detail::pair_obligations(cfdg, suite, opt, detail::PairRule::Mcdc))
    obs.push_back(std::move(o));
  return detail::make_report(Criterion::MCDC, opt, std::move(obs));
}

inline CoverageReport evaluate(const Cfdg& cfdg, const TestSuite& suite, Criterion criterion,
                               EvalOptions opt = {}) {
  switch (criterion) {
    case Criterion::SC: return evaluate_sc(cfdg, suite, opt);
    case Criterion::DC: return evaluate_dc(cfdg, suite, opt);
    case Criterion::CC: return evaluate_cc(cfdg, suite, opt);
    case Criterion::DCC: return evaluate_dcc(cfdg, suite, opt);
    case Criterion::MCC: return evaluate_mcc(cfdg, suite, opt);
    case Criterion::FPC: return evaluate_fpc(cfdg, suite, opt);
    case Criterion::MCDC: return evaluate_mcdc(cfdg, suite, opt);
  }
  throw std::invalid_argument("unknown criterion");
}

/// Plain-text rendering used by the command-line tool.
inline std::string format_report(const CoverageReport& r) {
  std::string out;
  out += "criterion: " + std::string(display_name(r.criterion));
  out += "  semantics: " + std::string(to_string(r.semantics));
  out += "  loop-mode: " + std::string(to_string(r.loop_mode)) + "\n";
  char pct[32];
  std::snprintf(pct, sizeof pct, "%.2f", r.verdict_percent());
  out += "verdict: " + std::string(pct) + "% (" + std::to_string(r.satisfied()) + "/" +
         std::to_string(r.total()) + " obligations)\n";
  for (const auto& o : r.obligations) {
    out += o.satisfied() ? "  [ok]      " : "  [MISSING] ";
    auto kind = std::string(to_string(o.kind));
    kind.resize(std::max<std::size_t>(kind.size(), 18), ' ');
    out += kind + " " + o.subject;
    if (o.satisfied() && !o.witnesses.empty()) {
      out += "  by";
      for (const auto& w : o.witnesses) {
        out += " ";
        for (std::size_t k = 0; k < w.size(); ++k) out += (k ? "+" : "") + w[k];
      }
    }
    if (!o.satisfied() && !o.detail.empty()) out += "  (" + o.detail + ")";
    out += "\n";
  }
  return out;
}

}  // namespace cfdg
