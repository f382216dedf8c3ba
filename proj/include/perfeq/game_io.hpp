#pragma once

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "perfeq/charge.hpp"
#include "perfeq/families.hpp"
#include "perfeq/finite_game.hpp"
#include "perfeq/perfection.hpp"

namespace perfeq {

using AnyGame = std::variant<FiniteGame, CountableGame>;

namespace detail {

inline std::string line_col(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline Rational json_rational(const nlohmann::json& v, const std::string& where) {
  if (v.is_number_integer()) return Rational(v.get<long>());
  if (!v.is_string()) throw ParseError(where + ": expected a \"p/q\" string");
  try {
    return Rational::parse(v.get<std::string>());
  } catch (const ParseError&) {
    throw ParseError(where + ": bad rational '" + v.get<std::string>() + "'");
  }
}

inline void flatten(const nlohmann::json& v, const std::vector<std::size_t>& counts, std::size_t depth,
                    const std::string& where, std::vector<Rational>& out) {
  if (depth == counts.size()) {
    out.push_back(json_rational(v, where));
    return;
  }
  if (!v.is_array() || v.size() != counts[depth])
    throw InvariantViolation(where + ": expected an array of " + std::to_string(counts[depth]) + " entries");
  for (std::size_t k = 0; k < v.size(); ++k) flatten(v[k], counts, depth + 1, where + "[" + std::to_string(k) + "]", out);
}

inline AnyGame game_from_json(const nlohmann::json& doc, const std::string& origin) {
  if (!doc.is_object()) throw ParseError(origin + ": top level must be an object");
  if (doc.contains("family")) {
    if (!doc["family"].is_string()) throw ParseError(origin + ": family must be a string");
    return families::by_name(doc["family"].get<std::string>());
  }
  for (const char* key : {"players", "actions", "payoffs"})
    if (!doc.contains(key)) throw ParseError(origin + ": missing field '" + key + "'");
  if (!doc["players"].is_number_unsigned()) throw ParseError(origin + ": players must be a positive integer");
  std::size_t n = doc["players"].get<std::size_t>();
  const auto& actions = doc["actions"];
  const auto& payoffs = doc["payoffs"];
  if (!actions.is_array() || actions.size() != n)
    throw InvariantViolation(origin + ": actions must list one label array per player");
  if (!payoffs.is_array() || payoffs.size() != n)
    throw InvariantViolation(origin + ": payoffs must hold one tensor per player");
  std::vector<std::size_t> counts;
  std::vector<std::vector<std::string>> labels;
  for (std::size_t i = 0; i < n; ++i) {
    std::string where = origin + ": actions[" + std::to_string(i) + "]";
    if (!actions[i].is_array() || actions[i].empty()) throw InvariantViolation(where + ": needs at least one label");
    std::vector<std::string> l;
    for (const auto& a : actions[i]) {
      if (!a.is_string()) throw ParseError(where + ": labels are strings");
      l.push_back(a.get<std::string>());
    }
    counts.push_back(l.size());
    labels.push_back(std::move(l));
  }
  std::vector<std::vector<Rational>> tensors(n);
  for (std::size_t i = 0; i < n; ++i)
    flatten(payoffs[i], counts, 0, origin + ": payoffs[" + std::to_string(i) + "]", tensors[i]);
  return FiniteGame(counts, std::move(tensors), std::move(labels));
}

}  // namespace detail

/// JSON game document: {"players", "actions", "payoffs"} with "p/q" entries, or {"family": name}.
/// Syntax errors carry line and column; shape errors carry the JSON path.
inline AnyGame parse_game_text(std::string_view text, const std::string& origin = "<input>") {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) throw ParseError(origin + ": empty game file");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    std::string msg = e.what();
    if (auto p = msg.find("syntax error"); p != std::string::npos) msg = msg.substr(p);
    throw ParseError(origin + ": " + detail::line_col(text, e.byte ? e.byte - 1 : 0) + ": " + msg);
  }
  return detail::game_from_json(doc, origin);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline AnyGame parse_game_file(const std::string& path) { return parse_game_text(read_file(path), path); }

/// A builtin family name or a game file path.
inline AnyGame load_game(const std::string& ref) {
  for (const char* f : {"variant_wald", "example_3_3", "hazy_filter_game"})
    if (ref == f) return families::by_name(ref);
  return parse_game_file(ref);
}

inline nlohmann::ordered_json game_to_json(const FiniteGame& g) {
  nlohmann::ordered_json doc;
  doc["players"] = g.players();
  doc["actions"] = g.labels();
  nlohmann::ordered_json payoffs = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < g.players(); ++i) {
    std::function<nlohmann::ordered_json(std::size_t, std::size_t)> build = [&](std::size_t depth, std::size_t base) {
      nlohmann::ordered_json a = nlohmann::ordered_json::array();
      for (std::size_t k = 0; k < g.actions(depth); ++k) {
        std::size_t idx = base * g.actions(depth) + k;
        if (depth + 1 == g.players()) {
          std::string s = g.tensor(i)[idx].str();
          a.push_back(s.find('/') == std::string::npos ? s + "/1" : s);
        } else {
          a.push_back(build(depth + 1, idx));
        }
      }
      return a;
    };
    payoffs.push_back(build(0, 0));
  }
  doc["payoffs"] = payoffs;
  return doc;
}

namespace detail {

inline std::vector<std::string> split_top(std::string_view text, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : text) {
    if (c == '(' || c == '[' || c == '{') ++depth;
    if (c == ')' || c == ']' || c == '}') --depth;
    if (c == sep && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
  }
  return out;
}

}  // namespace detail

/// "(1/2,1/2,0);(0,1)" or pure labels "D;R". Each strategy must sum to exactly 1.
inline MixedProfile parse_mixed_profile(std::string_view text, const FiniteGame& g) {
  auto parts = detail::split_top(text, ';');
  if (parts.size() != g.players())
    throw ParseError("profile '" + std::string(text) + "' needs " + std::to_string(g.players()) + " strategies");
  MixedProfile p;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string& s = parts[i];
    if (!s.empty() && s.front() == '(') {
      if (s.back() != ')') throw ParseError("unbalanced parentheses in '" + s + "'");
      Strategy st;
      for (const auto& x : detail::split_top(std::string_view(s).substr(1, s.size() - 2), ',')) st.push_back(Rational::parse(x));
      p.push_back(std::move(st));
      continue;
    }
    const auto& labels = g.labels()[i];
    auto it = std::find(labels.begin(), labels.end(), s);
    if (it == labels.end()) throw ParseError("unknown action '" + s + "' for player " + std::to_string(i + 1));
    p.push_back(pure_strategy(labels.size(), static_cast<std::size_t>(it - labels.begin())));
  }
  check_profile(g, p);
  return p;
}

/// Semicolon-separated probability charges.
inline ChargeProfile parse_charge_profile(std::string_view text, std::size_t players) {
  auto parts = detail::split_top(text, ';');
  if (parts.size() != players)
    throw ParseError("profile '" + std::string(text) + "' needs " + std::to_string(players) + " charges");
  ChargeProfile out;
  for (const auto& s : parts) out.push_back(parse_probability_charge(s));
  return out;
}

struct WitnessInput {
  CountableGame game;
  ChargeProfile sigma, tau, kappa;
  std::vector<std::vector<SetExpr>> partitions;
  std::vector<std::vector<SetExpr>> carrier;
  Rational epsilon;
  Nat horizon = 40;
  Rational tol{1, 1000};
};

/// Witness document. "tau" is a list of charges, or {"mixer": K, "weight": w} meaning
/// w * wald_mixer(K) + (1 - w) * sigma_i for every player.
inline WitnessInput parse_witness_text(std::string_view text, const std::string& origin = "<input>") {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) throw ParseError(origin + ": empty witness file");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(origin + ": " + detail::line_col(text, e.byte ? e.byte - 1 : 0) + ": malformed JSON");
  }
  if (!doc.is_object()) throw ParseError(origin + ": top level must be an object");
  for (const char* key : {"game", "sigma", "partitions", "epsilon", "carrier", "tau", "kappa"})
    if (!doc.contains(key)) throw ParseError(origin + ": missing field '" + key + "'");
  AnyGame g = doc["game"].is_string() ? load_game(doc["game"].get<std::string>())
                                      : detail::game_from_json(doc["game"], origin + ": game");
  WitnessInput w{std::holds_alternative<CountableGame>(g) ? std::get<CountableGame>(g)
                                                          : embed_finite(std::get<FiniteGame>(g)),
                 {}, {}, {}, {}, {}, {}};
  std::size_t n = w.game.players();
  auto charges = [&](const char* key) {
    const auto& a = doc[key];
    if (!a.is_array() || a.size() != n)
      throw InvariantViolation(origin + ": " + key + " must list " + std::to_string(n) + " charges");
    ChargeProfile out;
    for (std::size_t i = 0; i < n; ++i) {
      if (!a[i].is_string()) throw ParseError(origin + ": " + key + "[" + std::to_string(i) + "] must be a string");
      out.push_back(parse_probability_charge(a[i].get<std::string>()));
    }
    return out;
  };
  auto sets = [&](const char* key) {
    const auto& a = doc[key];
    if (!a.is_array() || a.size() != n)
      throw InvariantViolation(origin + ": " + key + " must hold one list per player");
    std::vector<std::vector<SetExpr>> out(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!a[i].is_array()) throw ParseError(origin + ": " + key + "[" + std::to_string(i) + "] must be a list");
      for (const auto& e : a[i]) {
        if (!e.is_string()) throw ParseError(origin + ": " + key + " entries are set expressions");
        out[i].push_back(parse_setexpr(e.get<std::string>()));
      }
    }
    return out;
  };
  w.sigma = charges("sigma");
  w.kappa = charges("kappa");
  w.partitions = sets("partitions");
  w.carrier = sets("carrier");
  w.epsilon = detail::json_rational(doc["epsilon"], origin + ": epsilon");
  if (doc["tau"].is_object()) {
    const auto& t = doc["tau"];
    if (!t.contains("mixer") || !t.contains("weight")) throw ParseError(origin + ": tau needs mixer and weight");
    Charge m = wald_mixer(t["mixer"].get<std::vector<Nat>>());
    Rational wt = detail::json_rational(t["weight"], origin + ": tau.weight");
    for (std::size_t i = 0; i < n; ++i) w.tau.push_back(convex_combine({{wt, m}, {Rational(1) - wt, w.sigma[i]}}));
  } else {
    w.tau = charges("tau");
  }
  if (doc.contains("horizon")) w.horizon = doc["horizon"].get<Nat>();
  if (doc.contains("tol")) w.tol = detail::json_rational(doc["tol"], origin + ": tol");
  return w;
}

inline WitnessInput parse_witness_file(const std::string& path) { return parse_witness_text(read_file(path), path); }

}  // namespace perfeq
