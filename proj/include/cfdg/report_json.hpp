// JSON form of a CoverageReport:
//
//   {"criterion": "mcdc", "semantics": "masking", "loop_mode": "traversal",
//    "verdict_percent": 100.0, "satisfied": 7, "total": 7,
//    "obligations": [{"kind": "entry_visit", "subject": "entry",
//                     "status": "satisfied", "witnesses": [["t0"]], "detail": ""}]}
#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cfdg/coverage.hpp"

namespace cfdg {

inline nlohmann::ordered_json to_json(const CoverageReport& r) {
  nlohmann::ordered_json j;
  j["criterion"] = to_string(r.criterion);
  j["semantics"] = to_string(r.semantics);
  j["loop_mode"] = to_string(r.loop_mode);
  j["verdict_percent"] = r.verdict_percent();
  j["satisfied"] = r.satisfied();
  j["total"] = r.total();
  auto obs = nlohmann::ordered_json::array();
  for (const auto& o : r.obligations) {
    nlohmann::ordered_json jo;
    jo["kind"] = to_string(o.kind);
    jo["subject"] = o.subject;
    jo["status"] = to_string(o.status);
    jo["witnesses"] = o.witnesses;
    jo["detail"] = o.detail;
    obs.push_back(std::move(jo));
  }
  j["obligations"] = std::move(obs);
  return j;
}

inline std::string report_to_json(const CoverageReport& r, int indent = 2) {
  return to_json(r).dump(indent);
}

namespace detail {
template <typename T, typename F>
T parse_field(const nlohmann::json& j, const char* key, F parse) {
  auto v = parse(j.at(key).get<std::string>());
  if (!v) throw std::invalid_argument(std::string("bad value for '") + key + "'");
  return *v;
}
}  // namespace detail

/// Throws nlohmann::json::exception or std::invalid_argument on bad input.
inline CoverageReport report_from_json(const nlohmann::json& j) {
  CoverageReport r;
  r.criterion = detail::parse_field<Criterion>(j, "criterion", parse_criterion);
  r.semantics = detail::parse_field<Semantics>(j, "semantics", parse_semantics);
  r.loop_mode = detail::parse_field<LoopMode>(j, "loop_mode", parse_loop_mode);
  for (const auto& jo : j.at("obligations")) {
    Obligation o{detail::parse_field<ObligationKind>(jo, "kind", parse_obligation_kind),
                 jo.at("subject").get<std::string>()};
    o.status = detail::parse_field<Status>(jo, "status", parse_status);
    o.witnesses = jo.at("witnesses").get<std::vector<std::vector<std::string>>>();
    o.detail = jo.value("detail", "");
    r.obligations.push_back(std::move(o));
  }
  return r;
}

inline CoverageReport report_from_json(const std::string& text) {
  return report_from_json(nlohmann::json::parse(text));
}

}  // namespace cfdg
