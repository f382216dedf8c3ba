#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "perfeq/charge.hpp"
#include "perfeq/finite_game.hpp"
#include "perfeq/perfection.hpp"

namespace perfeq {

using Json = nlohmann::ordered_json;

inline constexpr int kReportVersion = 1;

/// Lowest-terms "p/q", integers included as "p/1".
inline std::string rat_text(const Rational& r) {
  std::string s = r.str();
  return s.find('/') == std::string::npos ? s + "/1" : s;
}

inline Json rat_json(const Rational& r) { return rat_text(r); }

inline Json strategy_json(const Strategy& s) {
  Json a = Json::array();
  for (const auto& x : s) a.push_back(rat_json(x));
  return a;
}

inline Json profile_json(const MixedProfile& p) {
  Json a = Json::array();
  for (const auto& s : p) a.push_back(strategy_json(s));
  return a;
}

inline std::string strategy_text(const Strategy& s) {
  std::string out = "(";
  for (std::size_t a = 0; a < s.size(); ++a) out += (a ? "," : "") + s[a].str();
  return out + ")";
}

inline Json bracket_json(const Bracket& b) { return Json{{"lower", rat_json(b.lower)}, {"upper", rat_json(b.upper)}}; }

inline Json br_json(const BrCheck& b) {
  Json j{{"verdict", verdict_name(b.verdict)}, {"value", bracket_json(b.value)}, {"best_pure_upper", rat_json(b.best_upper)},
         {"tol", rat_json(b.tol)}};
  if (b.tail) j["tail_bound"] = rat_json(*b.tail);
  if (b.improving) j["improving_action"] = *b.improving;
  if (!b.note.empty()) j["note"] = b.note;
  return j;
}

inline int exit_code(Verdict v) {
  switch (v) {
    case Verdict::Holds: return 0;
    case Verdict::Fails: return 1;
    default: return 2;
  }
}

struct SubClaim {
  std::string id;
  std::string description;
  Verdict verdict = Verdict::Holds;
  Json details = Json::object();
};

struct ScenarioReport {
  std::string name;
  std::vector<SubClaim> claims;
  std::vector<std::string> notes;

  Verdict verdict() const {
    Verdict v = Verdict::Holds;
    for (const auto& c : claims) v = combine(v, c.verdict);
    return v;
  }
  bool passed() const { return verdict() == Verdict::Holds; }
};

inline Json to_json(const ScenarioReport& r) {
  Json claims = Json::array();
  for (const auto& c : r.claims)
    claims.push_back(Json{{"id", c.id}, {"description", c.description}, {"verdict", verdict_name(c.verdict)},
                          {"passed", c.verdict == Verdict::Holds}, {"details", c.details}});
  Json j{{"report_version", kReportVersion}, {"command", "scenario"}, {"scenario", r.name},
         {"verdict", verdict_name(r.verdict())}, {"passed", r.passed()}, {"claims", claims}};
  if (!r.notes.empty()) j["notes"] = r.notes;
  return j;
}

inline std::string to_text(const ScenarioReport& r) {
  std::string out = "scenario " + r.name + ": " + (r.passed() ? "PASS" : verdict_name(r.verdict())) + "\n";
  for (const auto& c : r.claims) {
    out += "  [" + std::string(c.verdict == Verdict::Holds ? "pass" : verdict_name(c.verdict)) + "] " + c.id + ": " +
           c.description + "\n";
    for (const auto& [k, v] : c.details.items())
      out += "      " + k + " = " + (v.is_string() ? v.get<std::string>() : v.dump()) + "\n";
  }
  for (const auto& n : r.notes) out += "  note: " + n + "\n";
  return out;
}

}  // namespace perfeq
