#pragma once

#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "perfeq/families.hpp"
#include "perfeq/finite_game.hpp"
#include "perfeq/invariance.hpp"
#include "perfeq/perfection.hpp"
#include "perfeq/report.hpp"

namespace perfeq {
namespace scenarios {

using R = Rational;

inline Charge free_uf() { return Charge::ultrafilter(UltrafilterBase()); }
inline Charge uf(const SetExpr& s) { return Charge::ultrafilter(s); }

inline FiniteGame admissible_dominated_game() {
  return FiniteGame::bimatrix({{4, 0, 0}, {0, 4, 0}, {2, 2, 1}}, {{4, 0, 2}, {0, 4, 2}, {0, 0, 1}});
}

inline FiniteGame reduced_coordination_game() {
  return FiniteGame::bimatrix({{0, 0}, {0, 1}}, {{0, 0}, {0, 1}}, {{"U", "D"}, {"L", "R"}});
}

/// Both players on the naturals, payoff 1 exactly at (1, 1).
inline CountableGame coordination_on_naturals() {
  std::vector<ActionSpace> nn{ActionSpace::naturals(), ActionSpace::naturals()};
  SimpleFunction u = SimpleFunction::indicator({SetExpr::singleton(1), SetExpr::singleton(1)});
  return CountableGame("coordination_on_naturals", nn, {PayoffSpec::simple(nn, u), PayoffSpec::simple(nn, u)});
}

inline Verdict holds_if(bool ok) { return ok ? Verdict::Holds : Verdict::Fails; }

inline Json witness_json(const WitnessReport& w) {
  Json br = Json::array();
  for (const auto& b : w.best_responses) br.push_back(br_json(b));
  Json j{{"verdict", verdict_name(w.verdict)}, {"tau_in_nbhd", w.tau_in_nbhd}, {"kappa_in_nbhd", w.kappa_in_nbhd},
         {"best_responses", br}};
  if (!w.notes.empty()) j["notes"] = w.notes;
  return j;
}

// ---------------------------------------------------------------------------------------------
// Row player T/B against a column player on the naturals.

inline Charge row_mix(const R& p) {
  std::map<Nat, R> row;
  if (!p.is_zero()) row[1] = p;
  if (p != R(1)) row[2] = R(1) - p;
  return Charge::atoms(row);
}

inline ScenarioReport example_3_3() {
  ScenarioReport rep{"example_3_3", {}, {}};
  CountableGame g = families::example_3_3();
  const R tol(1, 1000);

  {
    SubClaim c{"dominance", "T earns strictly more than B against every delta(n), n <= 1000"};
    bool ok = true;
    std::optional<R> min_gap;
    for (Nat n = 1; n <= 1000; ++n) {
      ChargeProfile opp{Charge(), Charge::dirac(n)};
      Bracket t = pure_action_payoff(g.payoffs[0], 0, 1, opp, tol);
      Bracket b = pure_action_payoff(g.payoffs[0], 0, 2, opp, tol);
      R gap = t.lower - b.upper;
      ok = ok && t.exact() && b.exact() && gap.sign() > 0;
      if (!min_gap || gap < *min_gap) min_gap = gap;
    }
    c.verdict = holds_if(ok);
    c.details = {{"columns_checked", 1000}, {"smallest_gap", rat_json(*min_gap)}};
    rep.claims.push_back(std::move(c));
  }

  std::vector<Charge> diffuse{free_uf(), uf(SetExpr::evens()),
                              convex_combine({{R(1, 2), uf(SetExpr::evens())}, {R(1, 2), uf(SetExpr::odds())}})};
  {
    SubClaim c{"nash_boundary", "(p, 1-p) against a diffuse column charge is Nash exactly when p >= 1/2"};
    std::optional<R> first_nash;
    int checked = 0;
    for (long j = 0; j <= 20; ++j) {
      R p(j, 20);
      for (const auto& k2 : diffuse) {
        Verdict v = nash_check(g, {row_mix(p), k2}, 50, tol).verdict;
        Verdict want = p >= R(1, 2) ? Verdict::Holds : Verdict::Fails;
        if (v == Verdict::Inconclusive) c.verdict = combine(c.verdict, v);
        else if (v != want) c.verdict = Verdict::Fails;
        if (v == Verdict::Holds && (!first_nash || p < *first_nash)) first_nash = p;
        ++checked;
      }
    }
    c.details = {{"profiles_checked", checked}, {"grid", "p = j/20"}, {"boundary", rat_json(R(1, 2))}};
    if (first_nash) c.details["smallest_nash_p"] = rat_json(*first_nash);
    rep.claims.push_back(std::move(c));
  }
  {
    SubClaim c{"column_atom", "an atom in the column charge breaks equilibrium for every p"};
    Charge k2 = convex_combine({{R(1, 2), Charge::dirac(3)}, {R(1, 2), free_uf()}});
    bool ok = true;
    for (long j = 0; j <= 20; ++j) ok = ok && nash_check(g, {row_mix(R(j, 20)), k2}, 50, tol).verdict == Verdict::Fails;
    c.verdict = holds_if(ok);
    c.details = {{"column_charge", k2.str()}};
    rep.claims.push_back(std::move(c));
  }
  {
    SubClaim c{"perfection_refuted", "for p < 1 any tremble with an atom makes T strictly better, so B is never a best reply"};
    Charge mu = uf(SetExpr::evens());
    Charge t2 = convex_combine({{R(1, 2), Charge::geometric(1, R(1, 2))}, {R(1, 2), mu}});
    std::vector<R> ps;
    for (long j = 10; j < 20; ++j) ps.push_back(R(j, 20));
    bool ok = true;
    for (const R& p : ps) {
      Charge k1 = row_mix(p);
      ChargeProfile sigma{k1, mu};
      TychonovNbhd n(sigma, {{SetExpr::singleton(1), SetExpr::interval(2)}, {SetExpr::naturals()}}, R(1, 100));
      CarrierSpec spec({{}, {SetExpr::singleton(1)}});
      WitnessReport w = verify_perfection_witness(g, sigma, spec, n, {k1, t2}, sigma, 50, tol);
      ok = ok && w.verdict == Verdict::Fails && w.best_responses[0].improving == Nat{1};
    }
    Bracket t = pure_action_payoff(g.payoffs[0], 0, 1, {Charge(), t2}, tol);
    Bracket b = pure_action_payoff(g.payoffs[0], 0, 2, {Charge(), t2}, tol);
    c.verdict = holds_if(ok && t.lower > b.upper);
    c.details = {{"p_values_checked", ps.size()}, {"tremble", t2.str()}, {"payoff_T", bracket_json(t)},
                 {"payoff_B", bracket_json(b)}, {"improving_action", "T"}};
    rep.claims.push_back(std::move(c));
  }
  {
    SubClaim c{"p1_witness", "p = 1 with a diffuse column charge passes a perfection witness"};
    Charge mu = uf(SetExpr::evens());
    ChargeProfile sigma{Charge::dirac(1), mu};
    TychonovNbhd n(sigma, {{SetExpr::singleton(1), SetExpr::interval(2)}, {SetExpr::evens(), SetExpr::odds()}},
                   R(1, 100));
    Charge t1 = Charge::atoms({{1, R(999, 1000)}, {2, R(1, 1000)}});
    Charge t2 = convex_combine({{R(1, 1000), Charge::geometric(1, R(1, 2))}, {R(999, 1000), mu}});
    CarrierSpec spec({{SetExpr::singleton(1), SetExpr::singleton(2)}, {SetExpr::singleton(1), SetExpr::odds()}});
    WitnessReport w = verify_perfection_witness(g, sigma, spec, n, {t1, t2}, sigma, 50, tol);
    c.verdict = w.verdict;
    c.details = witness_json(w);
    rep.claims.push_back(std::move(c));
  }
  return rep;
}

// ---------------------------------------------------------------------------------------------
// Variant Wald game.

struct WaldWitness {
  ChargeProfile sigma, tau, kappa;
  std::vector<std::vector<SetExpr>> parts;
  R eps{1, 10};
  std::vector<Nat> k;
};

/// Diffuse mu = (uf(evens) + uf(odds))/2 for both players, tau = eta*mixer + (1-eta)*mu.
inline WaldWitness wald_witness_instance() {
  WaldWitness c;
  Charge mu = convex_combine({{R(1, 2), uf(SetExpr::evens())}, {R(1, 2), uf(SetExpr::odds())}});
  c.sigma = {mu, mu};
  std::vector<SetExpr> v{SetExpr::interval(1, 3), SetExpr::evens() & SetExpr::interval(4),
                         SetExpr::odds() & SetExpr::interval(4)};
  c.parts = {v, v};
  c.k = {2, 4, 5};
  std::map<Nat, R> atoms;
  for (std::size_t s = 0; s < v.size(); ++s) {
    R q = mu.eval(v[s]);
    if (q.sign() > 0) atoms[c.k[s]] += q;
  }
  R eta(1, 100);
  Charge tau = convex_combine({{eta, wald_mixer(c.k)}, {R(1) - eta, mu}});
  c.tau = {tau, tau};
  c.kappa = {Charge::atoms(atoms), Charge::atoms(atoms)};
  return c;
}

inline std::vector<CarrierSpec> wald_carrier_specs() {
  return {CarrierSpec({{SetExpr::singleton(1), SetExpr::singleton(2), SetExpr::evens()}, {SetExpr::odds()}}),
          CarrierSpec({{SetExpr::ap(3, 7)}, {SetExpr::interval(100), SetExpr::finite({5, 9})}}),
          CarrierSpec({{SetExpr::interval(1000)}, {SetExpr::ap(2, 12) & SetExpr::interval(50)}})};
}

inline ScenarioReport variant_wald() {
  ScenarioReport rep{"variant_wald", {}, {}};
  CountableGame g = families::variant_wald();
  {
    SubClaim c{"uniform_limit", "payoffs are uniform limits: |u - u^n| <= 1/(n+1) on the grid k, l <= 2n + 2"};
    const auto& ul = std::get<UniformLimit>(g.payoffs[0].body());
    bool ok = true;
    R worst;
    for (Nat n = 1; n <= 64; n *= 2) {
      SimpleFunction f = ul.approximant(n);
      for (Nat k = 1; k <= 2 * n + 2; ++k)
        for (Nat l = 1; l <= 2 * n + 2; ++l) {
          R err = (ul.point({k, l}) - f.value_at({k, l})).abs();
          ok = ok && err <= ul.bound(n);
          if (n == 64 && err > worst) worst = err;
        }
    }
    c.verdict = holds_if(ok);
    c.details = {{"indices", "1, 2, 4, ..., 64"}, {"bound_at_64", rat_json(ul.bound(64))},
                 {"max_error_at_64", rat_json(worst)}};
    rep.claims.push_back(std::move(c));
  }
  {
    SubClaim c{"no_atomic_nash", "no Nash equilibrium when both players have an atom"};
    bool ok = true;
    const R tol(1, 1000000);
    for (Nat k1 = 1; k1 <= 100 && ok; ++k1)
      for (Nat k2 = 1; k2 <= 100 && ok; ++k2) {
        ChargeProfile p{Charge::dirac(k1), Charge::dirac(k2)};
        std::size_t i = k1 <= k2 ? 0 : 1;
        Nat dev = std::max(k1, k2) + 1;
        Bracket v = integrate_bracket(p, g.payoffs[i], tol);
        Bracket d = pure_action_payoff(g.payoffs[i], i, dev, p, tol);
        ok = v.exact() && d.exact() && d.lower > v.upper;
      }
    // Finite-atomic mixed pairs: move the lowest atom of the lower player above the other's lowest atom.
    std::mt19937_64 rng(2024);
    int mixed = 0;
    for (int trial = 0; trial < 200 && ok; ++trial) {
      ChargeProfile p;
      for (int pl = 0; pl < 2; ++pl) {
        std::map<Nat, R> a;
        long total = 0;
        std::vector<std::pair<Nat, long>> w;
        for (int j = 0, n = 1 + static_cast<int>(rng() % 4); j < n; ++j) {
          w.emplace_back(1 + rng() % 30, 1 + static_cast<long>(rng() % 9));
          total += w.back().second;
        }
        for (auto [k, x] : w) a[k] += R(x, total);
        p.push_back(Charge::atoms(a));
      }
      Nat l0 = p[0].atom_map().begin()->first, l1 = p[1].atom_map().begin()->first;
      std::size_t i = l0 <= l1 ? 0 : 1;
      Nat li = std::min(l0, l1), lj = i == 0 ? l1 : l0;
      std::map<Nat, R> moved = p[i].atom_map();
      R m = moved[li];
      moved.erase(li);
      moved[lj + 1] += m;
      ChargeProfile q = p;
      q[i] = Charge::atoms(moved);
      R before = integrate_bracket(p, g.payoffs[i], tol).lower;
      R after = integrate_bracket(q, g.payoffs[i], tol).lower;
      ok = after > before;
      ++mixed;
    }
    c.verdict = holds_if(ok);
    c.details = {{"pure_pairs", 10000}, {"max_action", 100}, {"mixed_pairs", mixed},
                 {"deviation", "lower player moves its lowest atom to (other's lowest atom) + 1"}};
    rep.claims.push_back(std::move(c));
  }
  {
    SubClaim c{"diffuse_pairs", "pairs of diffuse charges are Nash with payoff 0"};
    const R tol(1, 1000000);
    std::vector<std::pair<Charge, Charge>> pairs{
        {free_uf(), free_uf()},
        {uf(SetExpr::evens()), uf(SetExpr::odds())},
        {convex_combine({{R(1, 2), uf(SetExpr::evens())}, {R(1, 2), uf(SetExpr::odds())}}), uf(SetExpr::ap(0, 3))}};
    bool ok = true;
    Json brackets = Json::array();
    for (const auto& [a, b] : pairs) {
      for (std::size_t i = 0; i < 2; ++i) {
        Bracket v = integrate_bracket({a, b}, g.payoffs[i], tol);
        ok = ok && v.lower >= -tol && v.upper <= tol;
        brackets.push_back(bracket_json(v));
      }
      ok = ok && nash_check(g, {a, b}, 20, R(1, 1000)).verdict == Verdict::Holds;
    }
    // Converse direction: against an atom at k the diffuse player gains by k + 1.
    for (Nat k : {1, 7, 40}) {
      NashReport r = nash_check(g, {free_uf(), Charge::dirac(k)}, 60, R(1, 1000));
      ok = ok && r.verdict == Verdict::Fails && r.players[0].verdict == Verdict::Fails;
    }
    c.verdict = holds_if(ok);
    c.details = {{"tol", rat_json(tol)}, {"payoff_brackets", brackets}};
    rep.claims.push_back(std::move(c));
  }
  {
    SubClaim c{"perfection_witness", "diffuse pair passes the perfection witness for three carrier specs"};
    WaldWitness inst = wald_witness_instance();
    TychonovNbhd w(inst.sigma, inst.parts, inst.eps);
    Json runs = Json::array();
    for (const auto& spec : wald_carrier_specs()) {
      WitnessReport r = verify_perfection_witness(g, inst.sigma, spec, w, inst.tau, inst.kappa, 40, R(1, 1000));
      c.verdict = combine(c.verdict, r.verdict);
      runs.push_back(witness_json(r));
    }
    Json ks = Json::array();
    for (Nat k : inst.k) ks.push_back(k);
    c.details = {{"mixer_support_points", ks}, {"kappa", inst.kappa[0].str()}, {"epsilon", rat_json(inst.eps)},
                 {"runs", runs}};
    rep.claims.push_back(std::move(c));
  }
  return rep;
}

// ---------------------------------------------------------------------------------------------
// Hazy-filter game.

struct WindowPair {
  std::optional<Nat> a, b;
};

/// Nearby a, b with delta(a), delta(b) matching eta, xi on the partition, searched from `from`.
inline WindowPair window_pair(const UltrafilterBase& eta, const UltrafilterBase& xi, const std::vector<SetExpr>& f, Nat from,
                    Nat span) {
  auto cell_of = [&](const UltrafilterBase& u) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < f.size(); ++i)
      if (u.decide(f[i]) == true) return i;
    return std::nullopt;
  };
  auto s = cell_of(eta), t = cell_of(xi);
  if (!s || !t) throw UndeterminedByBase("bases do not decide the partition");
  for (Nat k = from; k < from + span; ++k) {
    auto pick = [&](std::size_t cell) -> std::optional<Nat> {
      if (f[cell].contains(k)) return k;
      if (f[cell].contains(k + 1)) return k + 1;
      return std::nullopt;
    };
    auto a = pick(*s), b = pick(*t);
    if (a && b) return {a, b};
  }
  return {};
}

struct HazySample {
  std::string label;
  R c;
  UltrafilterBase eta, xi;
  std::function<std::vector<SetExpr>(Nat)> cells;  // infinite cells above K
};

inline std::vector<HazySample> hazy_samples() {
  auto above = [](Nat k) { return SetExpr::interval(k); };
  return {
      {"(uf(evens) + uf(odds))/2", R(1, 2), UltrafilterBase({SetExpr::evens()}), UltrafilterBase({SetExpr::odds()}),
       [=](Nat k) { return std::vector<SetExpr>{SetExpr::evens() & above(k), SetExpr::odds() & above(k)}; }},
      {"uf(ap(0,4))/3 + 2uf(ap(1,4))/3", R(1, 3), UltrafilterBase({SetExpr::ap(0, 4)}),
       UltrafilterBase({SetExpr::ap(1, 4)}),
       [=](Nat k) {
         return std::vector<SetExpr>{SetExpr::ap(0, 4) & above(k), SetExpr::ap(1, 4) & above(k),
                                     (SetExpr::ap(2, 4) | SetExpr::ap(3, 4)) & above(k)};
       }},
      {"uf(ap(0,3))", R(1), UltrafilterBase({SetExpr::ap(0, 3)}), UltrafilterBase({SetExpr::ap(0, 3)}),
       [=](Nat k) { return std::vector<SetExpr>{SetExpr::ap(0, 3) & above(k), !SetExpr::ap(0, 3) & above(k)}; }},
  };
}

inline Nat first_threshold_below(const R& eps) {
  Nat k = 2;
  while (br_threshold(k) >= eps) ++k;
  return k;
}

/// Step-3 witness: tau_1 = (p_k, 1 - p_k), rho = c delta(a) + (1-c) delta(b) on a window {k, k+1}.
inline WitnessReport hazy_tremble_witness(const HazySample& s, const R& eps, Json& info) {
  CountableGame g = families::hazy_filter_game();
  Charge kappa2 = s.c == R(1) ? Charge::ultrafilter(s.eta)
                              : convex_combine({{s.c, Charge::ultrafilter(s.eta)}, {R(1) - s.c, Charge::ultrafilter(s.xi)}});
  Nat big_k = first_threshold_below(eps);
  std::vector<SetExpr> f{SetExpr::interval(1, big_k - 1)};
  for (auto& cell : s.cells(big_k)) f.push_back(cell);
  WindowPair pa = window_pair(s.eta, s.xi, f, big_k, 64);
  if (!pa.a) throw InvariantViolation("no window for a twinned sample");
  Nat a = *pa.a, b = *pa.b, k = std::min(a, b);
  Charge rho = a == b ? Charge::dirac(a) : Charge::atoms({{a, s.c}, {b, R(1) - s.c}});
  R p = br_threshold(k);
  ChargeProfile sigma{Charge::dirac(2), kappa2};
  TychonovNbhd nbhd(sigma, {{SetExpr::singleton(1), SetExpr::interval(2)}, f}, eps);
  R eta = eps / R(2);
  Charge tau2 = convex_combine({{R(1) - eta, kappa2}, {eta, Charge::geometric(1, R(1, 2))}});
  Charge tau1 = Charge::atoms({{1, p}, {2, R(1) - p}});
  CarrierSpec spec({{SetExpr::singleton(1), SetExpr::singleton(2)}, f});
  WitnessReport w = verify_perfection_witness(g, sigma, spec, nbhd, {tau1, tau2}, {Charge::dirac(2), rho},
                                              4 * (k + 2), R(1, 1000000));
  bool matches = true;
  for (const auto& cell : f) matches = matches && rho.eval(cell) == kappa2.eval(cell);
  if (!matches) {
    w.verdict = Verdict::Fails;
    w.notes.push_back("rho differs from kappa_2 on the partition");
  }
  info = {{"sample", s.label}, {"epsilon", rat_json(eps)}, {"K", big_k}, {"a", a}, {"b", b},
          {"p_k", rat_json(p)},   {"rho", rho.str()},         {"verdict", verdict_name(w.verdict)}};
  return w;
}

inline ScenarioReport hazy_filter_game() {
  ScenarioReport rep{"hazy_filter_game", {}, {}};
  {
    SubClaim c{"thresholds", "p_k = (2k+1)/(k^2+3k+1) strictly decreases and at p_k the best replies are {k, k+1}"};
    bool ok = true;
    for (Nat k = 2; k <= 100 && ok; ++k) {
      ok = br_threshold(k + 1) < br_threshold(k);
      BrRegion r = br_region(br_threshold(k));
      ok = ok && r.actions == std::vector<Nat>{k, k + 1} && hazy_payoff(br_threshold(k), k) == r.value;
    }
    BrRegion r2 = br_region(br_threshold(2));
    c.verdict = holds_if(ok);
    c.details = {{"k_max", 100}, {"p_2", rat_json(br_threshold(2))}, {"tied_value_at_p_2", rat_json(r2.value)}};
    rep.claims.push_back(std::move(c));
  }
  {
    SubClaim c{"between_thresholds", "strictly between p_(k+1) and p_k the unique best reply is k+1"};
    bool ok = true;
    for (Nat k = 2; k <= 100 && ok; ++k) {
      R mid = (br_threshold(k) + br_threshold(k + 1)) / R(2);
      ok = br_region(mid).actions == std::vector<Nat>{k + 1};
    }
    c.verdict = holds_if(ok);
    c.details = {{"k_max", 100}, {"probe", "midpoint of consecutive thresholds"}};
    rep.claims.push_back(std::move(c));
  }
  {
    SubClaim c{"twinned_witness", "(D, twinned hazy filter) passes witnesses built from rho = c delta(a) + (1-c) delta(b)"};
    Json runs = Json::array();
    for (const auto& s : hazy_samples())
      for (R eps : {R(1, 10), R(1, 100), R(1, 1000)}) {
        Json info;
        WitnessReport w = hazy_tremble_witness(s, eps, info);
        c.verdict = combine(c.verdict, w.verdict);
        runs.push_back(info);
      }
    c.details = {{"runs", runs}};
    rep.claims.push_back(std::move(c));
  }
  {
    SubClaim c{"not_twins", "for non-twin ultrafilters the window search finds nothing"};
    UltrafilterBase x({SetExpr::ap(0, 4)}), y({SetExpr::ap(2, 4)});
    TwinsResult t = twins_test(x, y);
    Nat big_k = first_threshold_below(R(1, 100));
    std::vector<SetExpr> f{SetExpr::interval(1, big_k - 1), SetExpr::ap(0, 4) & SetExpr::interval(big_k),
                           SetExpr::ap(2, 4) & SetExpr::interval(big_k), SetExpr::odds() & SetExpr::interval(big_k)};
    WindowPair pa = window_pair(x, y, f, big_k, 8);  // cells repeat with period 4 above K
    c.verdict = holds_if(t.kind == TwinsResult::Kind::NotTwins && !pa.a);
    c.details = {{"twins_test", t.kind == TwinsResult::Kind::NotTwins ? "not twins" : "twins"},
                 {"x", t.x ? t.x->str() : ""}, {"y", t.y ? t.y->str() : ""}, {"K", big_k}};
    rep.claims.push_back(std::move(c));
  }
  {
    SubClaim c{"hazy_characterization", "three-ultrafilter mixture is not hazy; one and two components are"};
    Charge three_uf = convex_combine({{R(1, 3), uf(SetExpr::ap(0, 3))}, {R(1, 3), uf(SetExpr::ap(1, 3))},
                                    {R(1, 3), uf(SetExpr::ap(2, 3))}});
    HazyResult h = hazy_filter_test(three_uf);
    HazyResult one = hazy_filter_test(uf(SetExpr::evens()));
    HazyResult two = hazy_filter_test(convex_combine({{R(1, 2), uf(SetExpr::evens())}, {R(1, 2), uf(SetExpr::odds())}}));
    bool ok = h.kind == HazyResult::Kind::NotHazy && one.kind == HazyResult::Kind::Hazy &&
              two.kind == HazyResult::Kind::Hazy;
    c.verdict = holds_if(ok);
    if (h.partition) {
      Json part = Json::array(), masses = Json::array();
      for (int i = 0; i < 3; ++i) {
        part.push_back((*h.partition)[i].str());
        masses.push_back(rat_json((*h.masses)[i]));
      }
      c.details = {{"charge", three_uf.str()}, {"witness_partition", part}, {"masses", masses}};
    }
    rep.claims.push_back(std::move(c));
  }
  {
    SubClaim c{"pure_limit_refuted", "(D, 1) fails the witness: some k beats action 1 against any tremble toward U"};
    CountableGame g = families::hazy_filter_game();
    ChargeProfile sigma{Charge::dirac(2), Charge::dirac(1)};
    TychonovNbhd n(sigma, {{SetExpr::singleton(1), SetExpr::interval(2)}, {SetExpr::singleton(1), SetExpr::interval(2)}},
                   R(1, 10));
    Charge tau1 = Charge::atoms({{1, R(1, 20)}, {2, R(19, 20)}});
    Charge tau2 = Charge::atoms({{1, R(19, 20)}, {2, R(1, 20)}});
    CarrierSpec spec({{SetExpr::singleton(1)}, {SetExpr::singleton(2)}});
    WitnessReport w = verify_perfection_witness(g, sigma, spec, n, {tau1, tau2}, sigma, 200, R(1, 1000000));
    c.verdict = holds_if(w.verdict == Verdict::Fails && w.best_responses[1].improving.has_value());
    c.details = witness_json(w);
    rep.claims.push_back(std::move(c));
  }
  rep.notes.push_back("twinned-hazy perfection is confirmed on sampled neighborhoods only");
  return rep;
}

// ---------------------------------------------------------------------------------------------
// Reduced coordination game and its naturals-valued original.

inline ScenarioReport reduced_coordination() {
  ScenarioReport rep{"reduced_coordination", {}, {}};
  FiniteGame gp = reduced_coordination_game();
  MixedProfile dr{{R(0), R(1)}, {R(0), R(1)}}, ul{{R(1), R(0)}, {R(1), R(0)}};
  {
    SubClaim c{"reduced_perfect", "(D, R) is perfect in the reduced game; (U, L) is Nash but not perfect"};
    bool dr_perfect = perfect_decide_2p(gp, dr);
    bool ul_nash = is_nash(gp, ul).nash;
    bool ul_perfect = perfect_decide_2p(gp, ul);
    DominanceResult d = weak_dominance(gp, 0, ul[0]);
    c.verdict = holds_if(dr_perfect && ul_nash && !ul_perfect && d.dominated);
    c.details = {{"DR_perfect", dr_perfect}, {"UL_nash", ul_nash}, {"UL_perfect", ul_perfect}};
    if (d.dominated) c.details["U_dominated_by"] = strategy_json(d.dominator);
    rep.claims.push_back(std::move(c));
  }
  CountableGame big = coordination_on_naturals();
  NatMap phi = parse_nat_map("map{1->2, *->1}");
  {
    SubClaim c{"respects_payoffs", "collapsing {1} to D/R and the rest to U/L respects payoffs"};
    RespectsReport r = respects_payoffs(big, embed_finite(gp), {phi, phi});
    c.verdict = holds_if(r.holds && r.exact);
    c.details = {{"map", phi.str()}, {"exact", r.exact}};
    rep.claims.push_back(std::move(c));
  }
  {
    SubClaim c{"pushforward", "the pushforward of (delta(1), delta(1)) is (D, R)"};
    ChargeProfile img = pushforward_profile({Charge::dirac(1), Charge::dirac(1)}, {phi, phi});
    c.verdict = holds_if(img[0] == Charge::dirac(2) && img[1] == Charge::dirac(2));
    c.details = {{"image", Json::array({img[0].str(), img[1].str()})}};
    rep.claims.push_back(std::move(c));
  }
  {
    SubClaim c{"invariance_finite", "certified perfect equilibria of a finite stand-in map into {(D, R)}"};
    FiniteGame three = FiniteGame::bimatrix({{1, 0, 0}, {0, 0, 0}, {0, 0, 0}}, {{1, 0, 0}, {0, 0, 0}, {0, 0, 0}});
    FiniteActionMap fphi({{1, 0, 0}, {1, 0, 0}}, {2, 2});
    std::vector<MixedProfile> pe;
    for (std::size_t idx = 0; idx < three.profile_count(); ++idx) {
      PureProfile a = three.unflat(idx);
      MixedProfile p{pure_strategy(3, a[0]), pure_strategy(3, a[1])};
      if (perfect_decide_2p(three, p)) pe.push_back(p);
    }
    InvarianceReport r = invariance_check_finite(three, gp, fphi, pe);
    bool all_dr = true;
    for (const auto& img : r.images) all_dr = all_dr && img == dr;
    c.verdict = holds_if(r.holds && all_dr && !pe.empty());
    Json imgs = Json::array();
    for (const auto& img : r.images) imgs.push_back(profile_json(img));
    c.details = {{"perfect_equilibria", pe.size()}, {"images", imgs}};
    rep.claims.push_back(std::move(c));
  }
  {
    SubClaim c{"witnesses", "(delta(1), delta(1)) passes a witness on the naturals; (delta(2), delta(2)) fails"};
    R eta(1, 20);
    Charge t = convex_combine({{R(1) - eta, Charge::dirac(1)}, {eta, Charge::geometric(1, R(1, 2))}});
    std::vector<SetExpr> cells{SetExpr::singleton(1), SetExpr::interval(2)};
    CarrierSpec spec({{SetExpr::singleton(1), SetExpr::singleton(2), SetExpr::evens()},
                      {SetExpr::singleton(1), SetExpr::singleton(2), SetExpr::odds()}});
    ChargeProfile good{Charge::dirac(1), Charge::dirac(1)};
    WitnessReport w1 = verify_perfection_witness(big, good, spec, TychonovNbhd(good, {cells, cells}, R(1, 10)), {t, t},
                                                 good, 20, R(1, 1000));
    ChargeProfile bad{Charge::dirac(2), Charge::dirac(2)};
    Charge s = convex_combine({{R(1) - eta, Charge::dirac(2)}, {eta, Charge::geometric(1, R(1, 2))}});
    WitnessReport w2 = verify_perfection_witness(big, bad, spec, TychonovNbhd(bad, {cells, cells}, R(1, 10)), {s, s},
                                                 bad, 20, R(1, 1000));
    c.verdict = holds_if(w1.verdict == Verdict::Holds && w2.verdict == Verdict::Fails);
    c.details = {{"delta1_delta1", witness_json(w1)}, {"delta2_delta2", witness_json(w2)}};
    rep.claims.push_back(std::move(c));
  }
  return rep;
}

// ---------------------------------------------------------------------------------------------
// Admissible Nash equilibrium in weakly dominated strategies.

inline ScenarioReport admissible_dominated() {
  ScenarioReport rep{"admissible_dominated", {}, {}};
  FiniteGame g = admissible_dominated_game();
  Strategy half{R(1, 2), R(1, 2), R(0)};
  MixedProfile p{half, half};
  {
    SubClaim c{"nash", "((1/2,1/2,0), (1/2,1/2,0)) is a Nash equilibrium"};
    NashResult n = is_nash(g, p);
    c.verdict = holds_if(n.nash);
    c.details = {{"payoff_1", rat_json(expected_payoff(g, p, 0))}, {"payoff_2", rat_json(expected_payoff(g, p, 1))}};
    rep.claims.push_back(std::move(c));
  }
  {
    SubClaim c{"dominated", "both strategies are weakly dominated by (0,0,1)"};
    bool ok = true;
    Json dom = Json::array();
    for (std::size_t i = 0; i < 2; ++i) {
      DominanceResult d = weak_dominance(g, i, half);
      ok = ok && d.dominated && d.dominator == pure_strategy(3, 2);
      dom.push_back(d.dominated ? strategy_json(d.dominator) : Json(nullptr));
    }
    c.verdict = holds_if(ok);
    c.details = {{"dominators", dom}};
    rep.claims.push_back(std::move(c));
  }
  {
    SubClaim c{"not_perfect", "the equilibrium is not perfect; the n-player search refutes it"};
    bool perfect = perfect_decide_2p(g, p);
    CandidateResult cand = perfect_candidate_np(g, p, {R(1, 10), R(1, 100)});
    c.verdict = holds_if(!perfect && cand.refuted);
    c.details = {{"perfect", perfect}, {"candidate", cand.refuted ? "refuted" : "candidate"}, {"reason", cand.reason}};
    rep.claims.push_back(std::move(c));
  }
  return rep;
}

inline const std::vector<std::string>& names() {
  static const std::vector<std::string> n{"example_3_3", "variant_wald", "hazy_filter_game", "reduced_coordination",
                                          "admissible_dominated"};
  return n;
}

}  // namespace scenarios

inline ScenarioReport scenario_verify(const std::string& name) {
  if (name == "example_3_3") return scenarios::example_3_3();
  if (name == "variant_wald") return scenarios::variant_wald();
  if (name == "hazy_filter_game") return scenarios::hazy_filter_game();
  if (name == "reduced_coordination") return scenarios::reduced_coordination();
  if (name == "admissible_dominated") return scenarios::admissible_dominated();
  throw UnknownScenario("no scenario named '" + name + "'");
}

}  // namespace perfeq
