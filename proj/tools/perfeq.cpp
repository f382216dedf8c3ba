// perfeq: command-line front end for the perfect-equilibrium toolkit.

#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "perfeq/game_io.hpp"
#include "perfeq/invariance.hpp"
#include "perfeq/report.hpp"
#include "perfeq/scenarios.hpp"

using namespace perfeq;

namespace {

constexpr int kUsageExit = 3;

struct RunConfig {
  std::string command;
  std::vector<std::string> inputs;
  std::string tol_text = "1/1000";
  Rational tol{1, 1000};
  Nat br_horizon = 50;
  Nat tail_horizon = 64;
  std::string format = "text";
  std::uint64_t seed = 2024;

  void validate() {
    tol = Rational::parse(tol_text);
    if (tol.sign() <= 0) throw InvalidArgument("tolerance must be positive, got " + tol.str());
    if (br_horizon < 1 || tail_horizon < 1) throw InvalidArgument("horizons must be at least 1");
  }
  bool json() const { return format == "json"; }
};

struct Outcome {
  Verdict verdict = Verdict::Holds;
  Json report = Json::object();
  std::string text;
};

Json header(const RunConfig& cfg) {
  Json j{{"report_version", kReportVersion}, {"command", cfg.command}, {"inputs", cfg.inputs}};
  return j;
}

void finish(Outcome& out, const RunConfig& cfg, Json body) {
  Json j = header(cfg);
  j["verdict"] = verdict_name(out.verdict);
  for (auto& [k, v] : body.items()) j[k] = v;
  out.report = std::move(j);
}

std::string charges_text(const ChargeProfile& p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "; " : "") + p[i].str();
  return s;
}

Json charges_json(const ChargeProfile& p) {
  Json a = Json::array();
  for (const auto& c : p) a.push_back(c.str());
  return a;
}

std::string profile_text(const MixedProfile& p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? ";" : "") + strategy_text(p[i]);
  return s;
}

std::string bracket_text(const Bracket& b) {
  if (b.exact()) return b.lower.str();
  return "[" + b.lower.str() + ", " + b.upper.str() + "]";
}

// ---------------------------------------------------------------------------------------------

Outcome cmd_nash(const RunConfig& cfg, const std::string& game_ref, const std::vector<std::string>& profiles) {
  Outcome out;
  AnyGame any = load_game(game_ref);
  Json results = Json::array();
  std::ostringstream text;
  if (auto* g = std::get_if<FiniteGame>(&any)) {
    if (profiles.empty()) {
      for (std::size_t idx = 0; idx < g->profile_count(); ++idx) {
        PureProfile a = g->unflat(idx);
        MixedProfile p;
        for (std::size_t i = 0; i < g->players(); ++i) p.push_back(pure_strategy(g->actions(i), a[i]));
        if (!is_nash(*g, p).nash) continue;
        results.push_back(Json{{"profile", profile_json(p)}, {"nash", true}});
        std::string labels;
        for (std::size_t i = 0; i < a.size(); ++i) labels += (i ? "," : "") + g->labels()[i][a[i]];
        text << "pure Nash equilibrium: (" << labels << ")\n";
      }
      if (results.empty()) text << "no pure Nash equilibrium\n";
      finish(out, cfg, Json{{"pure_equilibria", results}});
      out.text = text.str();
      return out;
    }
    for (const auto& s : profiles) {
      MixedProfile p = parse_mixed_profile(s, *g);
      NashResult r = is_nash(*g, p);
      Json e{{"profile", profile_json(p)}, {"nash", r.nash}};
      if (r.nash) {
        text << profile_text(p) << ": Nash\n";
      } else {
        out.verdict = Verdict::Fails;
        e["deviation"] = Json{{"player", r.player + 1}, {"action", g->labels()[r.player][r.action]}, {"gain", rat_json(r.gain)}};
        text << profile_text(p) << ": not Nash: player " << r.player + 1 << " gains " << r.gain.str() << " by action "
             << g->labels()[r.player][r.action] << "\n";
      }
      results.push_back(std::move(e));
    }
  } else {
    const CountableGame& cg = std::get<CountableGame>(any);
    if (profiles.empty()) throw InvalidArgument("countable games need at least one --profile");
    for (const auto& s : profiles) {
      ChargeProfile p = parse_charge_profile(s, cg.players());
      NashReport r = nash_check(cg, p, cfg.br_horizon, cfg.tol);
      out.verdict = combine(out.verdict, r.verdict);
      Json br = Json::array();
      for (const auto& b : r.players) br.push_back(br_json(b));
      results.push_back(Json{{"profile", charges_json(p)}, {"verdict", verdict_name(r.verdict)}, {"players", br}});
      text << charges_text(p) << ": " << (r.verdict == Verdict::Holds ? "Nash" : r.verdict == Verdict::Fails ? "not Nash" : "inconclusive");
      for (std::size_t i = 0; i < r.players.size(); ++i) {
        const BrCheck& b = r.players[i];
        if (b.improving) text << " (player " << i + 1 << " improves with action " << *b.improving << ")";
        else if (b.verdict == Verdict::Inconclusive) text << " (player " << i + 1 << ": " << b.note << ")";
      }
      text << "\n";
    }
  }
  finish(out, cfg, Json{{"results", results}});
  out.text = text.str();
  return out;
}

Outcome cmd_perfect(const RunConfig& cfg, const std::string& game_ref, const std::vector<std::string>& profiles,
                    const std::string& schedule_text) {
  Outcome out;
  AnyGame any = load_game(game_ref);
  auto* g = std::get_if<FiniteGame>(&any);
  if (!g) throw NotApplicable("perfect decides finite games only; use 'witness' for countable games");
  if (profiles.empty()) throw InvalidArgument("perfect needs --profile");
  std::vector<Rational> schedule;
  for (const auto& x : detail::split_top(schedule_text, ',')) schedule.push_back(Rational::parse(x));
  Json results = Json::array();
  std::ostringstream text;
  for (const auto& s : profiles) {
    MixedProfile p = parse_mixed_profile(s, *g);
    Json e{{"profile", profile_json(p)}};
    Verdict v = Verdict::Holds;
    std::string line;
    NashResult n = is_nash(*g, p);
    if (!n.nash) {
      v = Verdict::Fails;
      line = "not perfect: not Nash, player " + std::to_string(n.player + 1) + " gains " + n.gain.str() + " by action " +
             g->labels()[n.player][n.action];
      e["deviation"] = Json{{"player", n.player + 1}, {"action", g->labels()[n.player][n.action]}, {"gain", rat_json(n.gain)}};
    } else if (g->players() == 2) {
      e["method"] = "exact";
      for (std::size_t i = 0; i < 2 && v == Verdict::Holds; ++i) {
        DominanceResult d = weak_dominance(*g, i, p[i]);
        if (!d.dominated) continue;
        v = Verdict::Fails;
        line = "not perfect: dominated by " + strategy_text(d.dominator) + " for player " + std::to_string(i + 1);
        e["dominated"] = Json{{"player", i + 1}, {"dominator", strategy_json(d.dominator)}};
      }
      if (v == Verdict::Holds) line = "perfect";
    } else {
      e["method"] = "candidate";
      CandidateResult c = perfect_candidate_np(*g, p, schedule, 16, cfg.seed);
      if (c.refuted) {
        v = Verdict::Fails;
        line = "not perfect: " + c.reason;
        e["reason"] = c.reason;
      } else {
        v = Verdict::Inconclusive;
        Json ev = Json::array();
        std::size_t found = 0;
        for (const auto& x : c.evidence) {
          Json j{{"epsilon", rat_json(x.epsilon)}};
          if (x.tremble) {
            j["tremble"] = profile_json(*x.tremble);
            ++found;
          }
          ev.push_back(std::move(j));
        }
        e["evidence"] = ev;
        line = "candidate: trembles found for " + std::to_string(found) + " of " + std::to_string(c.evidence.size()) +
               " epsilons (not a certificate for more than 2 players)";
      }
    }
    e["verdict"] = verdict_name(v);
    out.verdict = combine(out.verdict, v);
    results.push_back(std::move(e));
    text << profile_text(p) << ": " << line << "\n";
  }
  finish(out, cfg, Json{{"results", results}});
  out.text = text.str();
  return out;
}

Outcome cmd_dominance(const RunConfig& cfg, const std::string& game_ref, const std::vector<std::string>& profiles) {
  Outcome out;
  AnyGame any = load_game(game_ref);
  auto* g = std::get_if<FiniteGame>(&any);
  if (!g) throw NotApplicable("dominance is decided for finite games only");
  Json results = Json::array();
  std::ostringstream text;
  auto check = [&](std::size_t i, const Strategy& s, const std::string& what, bool counts) {
    DominanceResult d = weak_dominance(*g, i, s);
    Json e{{"player", i + 1}, {"strategy", strategy_json(s)}, {"dominated", d.dominated}};
    text << "player " << i + 1 << " " << what << ": ";
    if (d.dominated) {
      e["dominator"] = strategy_json(d.dominator);
      text << "dominated by " << strategy_text(d.dominator) << "\n";
      if (counts) out.verdict = Verdict::Fails;
    } else {
      text << "undominated\n";
    }
    results.push_back(std::move(e));
  };
  if (profiles.empty()) {
    for (std::size_t i = 0; i < g->players(); ++i)
      for (std::size_t a = 0; a < g->actions(i); ++a) check(i, pure_strategy(g->actions(i), a), g->labels()[i][a], false);
  } else {
    for (const auto& s : profiles) {
      MixedProfile p = parse_mixed_profile(s, *g);
      for (std::size_t i = 0; i < g->players(); ++i) check(i, p[i], strategy_text(p[i]), true);
    }
  }
  finish(out, cfg, Json{{"results", results}});
  out.text = text.str();
  return out;
}

Outcome cmd_integrate(const RunConfig& cfg, const std::string& game_ref, const std::string& profile_text_in) {
  Outcome out;
  AnyGame any = load_game(game_ref);
  CountableGame g = std::holds_alternative<CountableGame>(any) ? std::get<CountableGame>(any)
                                                               : embed_finite(std::get<FiniteGame>(any), game_ref);
  ChargeProfile p = parse_charge_profile(profile_text_in, g.players());
  Json payoffs = Json::array();
  std::ostringstream text;
  text << "profile: " << charges_text(p) << "\n";
  for (std::size_t i = 0; i < g.players(); ++i) {
    Bracket b = integrate_bracket(p, g.payoffs[i], cfg.tol);
    payoffs.push_back(Json{{"player", i + 1}, {"bracket", bracket_json(b)}, {"exact", b.exact()}, {"width", rat_json(b.width())}});
    text << "player " << i + 1 << ": " << bracket_text(b) << "\n";
  }
  finish(out, cfg, Json{{"game", g.name}, {"profile", charges_json(p)}, {"tol", rat_json(cfg.tol)}, {"payoffs", payoffs}});
  out.text = text.str();
  return out;
}

Outcome cmd_witness(const RunConfig& cfg, const std::string& path) {
  Outcome out;
  WitnessInput w = parse_witness_file(path);
  CarrierSpec spec(w.carrier);
  TychonovNbhd nbhd(w.sigma, w.partitions, w.epsilon);
  WitnessReport r = verify_perfection_witness(w.game, w.sigma, spec, nbhd, w.tau, w.kappa, w.horizon, w.tol);
  out.verdict = r.verdict;
  Json body = scenarios::witness_json(r);
  body.erase("verdict");
  finish(out, cfg, Json{{"game", w.game.name}, {"sigma", charges_json(w.sigma)}, {"tau", charges_json(w.tau)},
                        {"kappa", charges_json(w.kappa)}, {"epsilon", rat_json(w.epsilon)}, {"witness", body}});
  std::ostringstream text;
  text << "witness for " << w.game.name << ": " << (r.verdict == Verdict::Holds ? "verified" : verdict_name(r.verdict)) << "\n";
  text << "  tau in neighborhood: " << (r.tau_in_nbhd ? "yes" : "no") << "\n";
  text << "  kappa in neighborhood: " << (r.kappa_in_nbhd ? "yes" : "no") << "\n";
  for (std::size_t i = 0; i < r.best_responses.size(); ++i)
    text << "  kappa_" << i + 1 << " best response: " << verdict_name(r.best_responses[i].verdict) << "\n";
  for (const auto& n : r.notes) text << "  note: " << n << "\n";
  out.text = text.str();
  return out;
}

Outcome cmd_pushforward(const RunConfig& cfg, const std::string& source_ref, const std::string& target_ref,
                        const std::vector<std::string>& maps, const std::vector<std::string>& profiles) {
  Outcome out;
  AnyGame src = load_game(source_ref), tgt = load_game(target_ref);
  std::ostringstream text;
  Json body;
  if (std::holds_alternative<FiniteGame>(src) && std::holds_alternative<FiniteGame>(tgt)) {
    const FiniteGame& s = std::get<FiniteGame>(src);
    const FiniteGame& t = std::get<FiniteGame>(tgt);
    if (maps.size() != s.players()) throw ArityMismatch("need one --map per player, got " + std::to_string(maps.size()));
    std::vector<std::vector<std::size_t>> table;
    for (std::size_t i = 0; i < maps.size(); ++i) table.push_back(parse_finite_map(maps[i], s.labels()[i], t.labels()[i]));
    FiniteActionMap phi(table, t.action_counts());
    bool respects = respects_payoffs(s, t, phi);
    body["respects_payoffs"] = respects;
    text << "map respects payoffs: " << (respects ? "yes" : "no") << "\n";
    if (!respects) {
      out.verdict = Verdict::Fails;
      finish(out, cfg, body);
      out.text = text.str();
      return out;
    }
    std::vector<MixedProfile> eqs;
    if (profiles.empty()) {
      for (std::size_t idx = 0; idx < s.profile_count(); ++idx) {
        PureProfile a = s.unflat(idx);
        MixedProfile p;
        for (std::size_t i = 0; i < s.players(); ++i) p.push_back(pure_strategy(s.actions(i), a[i]));
        if (s.players() == 2 && perfect_decide_2p(s, p)) eqs.push_back(p);
      }
    } else {
      for (const auto& x : profiles) eqs.push_back(parse_mixed_profile(x, s));
    }
    Json images = Json::array();
    for (const auto& p : eqs) {
      MixedProfile img = phi.pushforward(p);
      Json e{{"profile", profile_json(p)}, {"image", profile_json(img)}};
      text << profile_text(p) << " -> " << profile_text(img);
      if (s.players() == 2) {
        bool src_perfect = perfect_decide_2p(s, p), img_perfect = perfect_decide_2p(t, img);
        e["source_perfect"] = src_perfect;
        e["image_perfect"] = img_perfect;
        text << (src_perfect ? " (perfect" : " (not perfect") << " in source, " << (img_perfect ? "perfect" : "not perfect")
             << " in target)";
        if (src_perfect && !img_perfect) out.verdict = Verdict::Fails;
      } else {
        e["image_nash"] = is_nash(t, img).nash;
        text << (is_nash(t, img).nash ? " (Nash in target)" : " (not Nash in target)");
      }
      text << "\n";
      images.push_back(std::move(e));
    }
    body["pushforwards"] = images;
  } else {
    auto as_countable = [](const AnyGame& g, const std::string& name) {
      return std::holds_alternative<CountableGame>(g) ? std::get<CountableGame>(g) : embed_finite(std::get<FiniteGame>(g), name);
    };
    CountableGame s = as_countable(src, source_ref), t = as_countable(tgt, target_ref);
    if (maps.size() != s.players()) throw ArityMismatch("need one --map per player, got " + std::to_string(maps.size()));
    std::vector<NatMap> phi;
    for (const auto& m : maps) phi.push_back(parse_nat_map(m));
    RespectsReport r = respects_payoffs(s, t, phi, cfg.tail_horizon);
    body["respects_payoffs"] = r.holds;
    body["exact"] = r.exact;
    if (!r.note.empty()) body["note"] = r.note;
    text << "map respects payoffs: " << (r.holds ? "yes" : "no") << (r.exact ? "" : " (on approximants)") << "\n";
    if (!r.note.empty()) text << "  " << r.note << "\n";
    out.verdict = r.holds ? (r.exact ? Verdict::Holds : Verdict::Inconclusive) : Verdict::Fails;
    Json images = Json::array();
    for (const auto& x : profiles) {
      ChargeProfile p = parse_charge_profile(x, s.players());
      ChargeProfile img = pushforward_profile(p, phi);
      images.push_back(Json{{"profile", charges_json(p)}, {"image", charges_json(img)}});
      text << charges_text(p) << " -> " << charges_text(img) << "\n";
    }
    body["pushforwards"] = images;
  }
  finish(out, cfg, body);
  out.text = text.str();
  return out;
}

Outcome cmd_scenario(const RunConfig& cfg, const std::string& name) {
  Outcome out;
  std::vector<std::string> names = name == "all" ? scenarios::names() : std::vector<std::string>{name};
  std::vector<ScenarioReport> reps;
  for (const auto& n : names) reps.push_back(scenario_verify(n));
  std::ostringstream text;
  for (const auto& r : reps) {
    out.verdict = combine(out.verdict, r.verdict());
    text << to_text(r);
  }
  if (reps.size() == 1) {
    out.report = to_json(reps[0]);
  } else {
    Json all = Json::array();
    for (const auto& r : reps) all.push_back(to_json(r));
    out.report = header(cfg);
    out.report["verdict"] = verdict_name(out.verdict);
    out.report["scenarios"] = all;
  }
  out.text = text.str();
  return out;
}

// ---------------------------------------------------------------------------------------------
// selftest: quick randomized property suites.

Rational small_rational(std::mt19937_64& rng) {
  return Rational(static_cast<long>(rng() % 11) - 5, 1 + static_cast<long>(rng() % 4));
}

Charge random_charge(std::mt19937_64& rng) {
  static const Rational ratios[] = {Rational(1, 2), Rational(1, 3), Rational(2, 3)};
  std::vector<std::pair<Rational, Charge>> parts;
  for (int i = 0, n = 1 + static_cast<int>(rng() % 3); i < n; ++i)
    parts.emplace_back(Rational(1 + static_cast<long>(rng() % 5)), Charge::dirac(1 + rng() % 12));
  if (rng() % 2) parts.emplace_back(Rational(1 + static_cast<long>(rng() % 5)), Charge::geometric(1 + rng() % 6, ratios[rng() % 3]));
  if (rng() % 2) parts.emplace_back(Rational(1 + static_cast<long>(rng() % 5)), Charge::ultrafilter(SetExpr::ap(rng() % 6, 6)));
  Rational total;
  for (auto& p : parts) total += p.first;
  for (auto& p : parts) p.first /= total;
  return convex_combine(parts);
}

// Residues mod 2 or 3, or an initial interval and its complement.
std::vector<SetExpr> random_partition(std::mt19937_64& rng) {
  std::vector<SetExpr> cells;
  switch (rng() % 3) {
    case 0:
    case 1: {
      Nat d = 2 + rng() % 2;
      for (Nat r = 0; r < d; ++r) cells.push_back(SetExpr::ap(r, d));
      break;
    }
    default: {
      Nat m = 1 + rng() % 8;
      cells = {SetExpr::interval(1, m), SetExpr::interval(m + 1)};
    }
  }
  return cells;
}

SimpleFunction random_simple(std::mt19937_64& rng) {
  auto a = random_partition(rng), b = random_partition(rng);
  std::vector<SimpleFunction::Cell> cells;
  for (const auto& x : a)
    for (const auto& y : b) cells.push_back({{x, y}, small_rational(rng)});
  return SimpleFunction(2, std::move(cells));
}

FiniteGame random_game(std::mt19937_64& rng, std::size_t players) {
  std::vector<std::size_t> counts;
  std::size_t total = 1;
  for (std::size_t i = 0; i < players; ++i) total *= counts.emplace_back(2 + rng() % 2);
  std::vector<std::vector<Rational>> t(players, std::vector<Rational>(total));
  for (auto& v : t)
    for (auto& x : v) x = Rational(static_cast<long>(rng() % 7) - 3);
  return FiniteGame(counts, t);
}

Strategy random_strategy(std::mt19937_64& rng, std::size_t n) {
  std::vector<long> w(n);
  long total = 0;
  for (auto& x : w) total += (x = static_cast<long>(rng() % 5));
  if (total == 0) return pure_strategy(n, rng() % n);
  Strategy s;
  for (auto x : w) s.emplace_back(x, total);
  return s;
}

struct Suite {
  std::string name;
  std::size_t cases = 0, failures = 0;
};

Outcome cmd_selftest(const RunConfig& cfg) {
  Outcome out;
  std::mt19937_64 rng(cfg.seed);
  std::vector<Suite> suites;
  {
    Suite s{"multilinearity_finite"};
    for (; s.cases < 100; ++s.cases) {
      FiniteGame g = random_game(rng, 2 + rng() % 2);
      MixedProfile p;
      for (std::size_t i = 0; i < g.players(); ++i) p.push_back(random_strategy(rng, g.actions(i)));
      std::size_t i = rng() % g.players(), j = rng() % g.players();
      Strategy q = random_strategy(rng, g.actions(i));
      Rational w(static_cast<long>(rng() % 9), 8);
      MixedProfile pq = p, mixed = p;
      pq[i] = q;
      for (std::size_t a = 0; a < q.size(); ++a) mixed[i][a] = w * p[i][a] + (Rational(1) - w) * q[a];
      if (expected_payoff(g, mixed, j) != w * expected_payoff(g, p, j) + (Rational(1) - w) * expected_payoff(g, pq, j))
        ++s.failures;
    }
    suites.push_back(s);
  }
  {
    Suite s{"multilinearity_charges"};
    for (; s.cases < 50; ++s.cases) {
      SimpleFunction f = random_simple(rng);
      Charge a = random_charge(rng), b = random_charge(rng), c = random_charge(rng);
      Rational w(static_cast<long>(rng() % 9), 8);
      Charge m = convex_combine({{w, a}, {Rational(1) - w, b}});
      if (integrate_simple({m, c}, f) != w * integrate_simple({a, c}, f) + (Rational(1) - w) * integrate_simple({b, c}, f))
        ++s.failures;
    }
    suites.push_back(s);
  }
  {
    Suite s{"fubini"};
    for (; s.cases < 50; ++s.cases) {
      SimpleFunction f = random_simple(rng);
      Charge a = random_charge(rng), b = random_charge(rng);
      if (!fubini_verify(f, {a, std::nullopt}, {std::nullopt, b}).holds) ++s.failures;
    }
    suites.push_back(s);
  }
  {
    Suite s{"restricted_iso_roundtrip"};
    for (; s.cases < 50; ++s.cases) {
      Rational k(1 + static_cast<long>(rng() % 8), 10);
      RestrictedIso iso = restricted_iso(random_charge(rng).scaled(k));
      Charge psi = random_charge(rng);
      std::vector<SetExpr> probes = random_partition(rng);
      for (const auto& x : random_partition(rng)) probes.push_back(x);
      if (!iso.inverse(iso.forward(psi)).agrees_on(psi, probes)) ++s.failures;
    }
    suites.push_back(s);
  }
  {
    Suite s{"reduced_form_idempotent"};
    for (; s.cases < 50; ++s.cases) {
      FiniteGame g = random_game(rng, 2);
      ReducedForm r = reduced_form(g);
      ReducedForm rr = reduced_form(r.game);
      if (rr.game.action_counts() != r.game.action_counts() || !respects_payoffs(g, r.game, r.map)) ++s.failures;
    }
    suites.push_back(s);
  }
  {
    Suite s{"wald_mixer_best_responses"};
    CountableGame g = families::variant_wald();
    for (; s.cases < 5; ++s.cases) {
      std::vector<Nat> k;
      for (Nat x = 2 + rng() % 3; x <= 12; x += 1 + rng() % 4) k.push_back(x);
      Charge m = wald_mixer(k);
      ChargeProfile prof{m, m};
      for (Nat a = 1; a <= k.back() + 3; ++a) {
        bool in = std::find(k.begin(), k.end(), a) != k.end();
        BrCheck b = best_response_check(g, 0, Charge::dirac(a), prof, k.back() + 8, Rational(1, 1000000));
        if (b.verdict != (in ? Verdict::Holds : Verdict::Fails)) {
          ++s.failures;
          break;
        }
      }
    }
    suites.push_back(s);
  }
  Json js = Json::array();
  std::ostringstream text;
  text << "selftest (seed " << cfg.seed << ")\n";
  for (const auto& s : suites) {
    if (s.failures) out.verdict = Verdict::Fails;
    js.push_back(Json{{"suite", s.name}, {"cases", s.cases}, {"failures", s.failures}, {"passed", s.failures == 0}});
    text << "  [" << (s.failures ? "FAIL" : "pass") << "] " << s.name << ": " << s.cases - s.failures << "/" << s.cases
         << "\n";
  }
  finish(out, cfg, Json{{"seed", cfg.seed}, {"suites", js}});
  out.text = text.str();
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact analysis of perfect equilibria in finite and countable games"};
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig cfg;
  app.add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"text", "json"}));
  app.add_option("--tol", cfg.tol_text, "Integration tolerance as p/q");
  app.add_option("--horizon", cfg.br_horizon, "Best-response search horizon");
  app.add_option("--tail-horizon", cfg.tail_horizon, "Largest approximant index for uniform-limit map checks");
  app.add_option("--seed", cfg.seed, "Seed for randomized suites");

  std::string game, target, path, scenario_name, schedule = "1/10,1/100,1/1000", profile;
  std::vector<std::string> profiles, maps;

  auto* nash = app.add_subcommand("nash", "Test supplied profiles, or list pure equilibria of a finite game");
  nash->add_option("game", game, "Game file or family name")->required();
  nash->add_option("--profile", profiles, "Profile, e.g. \"(1/2,1/2);(1,0)\" or \"diffuse;delta(3)\"");

  auto* perfect = app.add_subcommand("perfect", "Decide perfection (2 players) or search trembles (n players)");
  perfect->add_option("game", game)->required();
  perfect->add_option("--profile", profiles)->required();
  perfect->add_option("--schedule", schedule, "Decreasing epsilons for the n-player search");

  auto* dominance = app.add_subcommand("dominance", "Weak dominance of profile components or of every pure action");
  dominance->add_option("game", game)->required();
  dominance->add_option("--profile", profiles);

  auto* integrate = app.add_subcommand("integrate", "Bracket every player's payoff under a charge profile");
  integrate->add_option("game_pos", game, "Game file or family name");
  integrate->add_option("--game", game, "Game file or family name");
  integrate->add_option("--profile", profile)->required();

  auto* witness = app.add_subcommand("witness", "Verify a perfection witness file");
  witness->add_option("file", path)->required();

  auto* push = app.add_subcommand("pushforward", "Check a payoff-respecting map and push profiles through it");
  push->add_option("source", game)->required();
  push->add_option("target", target)->required();
  push->add_option("--map", maps, "One map per player, e.g. \"map{1->2, *->1}\"")->required();
  push->add_option("--profile", profiles);

  auto* scenario = app.add_subcommand("scenario", "Run a bundled scenario, or all of them");
  scenario->add_option("name", scenario_name)->required()->check([](const std::string& s) {
    if (s == "all") return std::string();
    for (const auto& n : scenarios::names())
      if (n == s) return std::string();
    std::string known = "all";
    for (const auto& n : scenarios::names()) known += ", " + n;
    return "unknown scenario '" + s + "' (known: " + known + ")";
  });

  app.add_subcommand("selftest", "Run randomized property suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageExit;
  }

  CLI::App* sub = app.get_subcommands().front();
  cfg.command = sub->get_name();
  for (int a = 1; a < argc; ++a)
    if (std::string(argv[a]) != cfg.command) cfg.inputs.push_back(argv[a]);

  try {
    cfg.validate();
    Outcome out;
    if (cfg.command == "nash") out = cmd_nash(cfg, game, profiles);
    else if (cfg.command == "perfect") out = cmd_perfect(cfg, game, profiles, schedule);
    else if (cfg.command == "dominance") out = cmd_dominance(cfg, game, profiles);
    else if (cfg.command == "integrate") {
      if (game.empty()) throw InvalidArgument("integrate needs a game");
      out = cmd_integrate(cfg, game, profile);
    } else if (cfg.command == "witness") out = cmd_witness(cfg, path);
    else if (cfg.command == "pushforward") out = cmd_pushforward(cfg, game, target, maps, profiles);
    else if (cfg.command == "scenario") out = cmd_scenario(cfg, scenario_name);
    else out = cmd_selftest(cfg);
    if (cfg.json()) std::cout << out.report.dump(2) << "\n";
    else std::cout << out.text;
    return exit_code(out.verdict);
  } catch (const std::exception& e) {
    std::string inputs;
    for (const auto& s : cfg.inputs) inputs += (inputs.empty() ? "" : " ") + ("'" + s + "'");
    const auto* pe = dynamic_cast<const perfeq::Error*>(&e);
    std::string kind = pe ? pe->kind() : "Error";
    std::string msg = e.what();
    if (pe && msg.rfind(kind + ": ", 0) == 0) msg = msg.substr(kind.size() + 2);
    std::cerr << "perfeq " << cfg.command << ": " << kind << ": " << msg << " (inputs: " << inputs << ")\n";
    if (cfg.json()) {
      Json j = header(cfg);
      j["verdict"] = "Error";
      j["error"] = Json{{"kind", kind}, {"message", msg}};
      std::cout << j.dump(2) << "\n";
    }
    return kUsageExit;
  }
}
