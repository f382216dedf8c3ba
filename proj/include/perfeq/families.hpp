#pragma once

#include <functional>
#include <memory>
#include <string>

#include "perfeq/payoff.hpp"

namespace perfeq {

/// Upper bound on sup_{k > horizon} of a player's payoff from pure k against the others.
using TailBound = std::function<Rational(const ChargeProfile& others, Nat horizon)>;

struct CountableGame {
  std::string name;
  std::vector<ActionSpace> spaces;
  std::vector<PayoffSpec> payoffs;
  std::vector<TailBound> tail_bounds;  // empty entry = none supplied

  CountableGame(std::string n, std::vector<ActionSpace> s, std::vector<PayoffSpec> u, std::vector<TailBound> t = {})
      : name(std::move(n)), spaces(std::move(s)), payoffs(std::move(u)), tail_bounds(std::move(t)) {
    if (payoffs.size() != spaces.size()) throw ShapeMismatch("one payoff per player");
    for (const auto& p : payoffs)
      if (p.arity() != spaces.size()) throw ShapeMismatch("payoff arity differs from player count");
    tail_bounds.resize(spaces.size());
  }
  std::size_t players() const { return spaces.size(); }
};

namespace families {

/// k -> g(k) on the naturals; sup_tail(n) bounds |g(k)| for k > n.
inline PayoffSpec one_dimensional(std::function<Rational(Nat)> g, std::function<Rational(Nat)> sup_tail,
                                  std::function<Rational(Nat)> envelope = {}) {
  UniformLimit ul;
  ul.approximant = [g](Nat n) {
    std::vector<SimpleFunction::Cell> cells;
    for (Nat k = 1; k <= n; ++k) cells.push_back({{SetExpr::singleton(k)}, g(k)});
    cells.push_back({{SetExpr::interval(n + 1)}, Rational(0)});
    return SimpleFunction(1, std::move(cells));
  };
  ul.bound = sup_tail;
  ul.point = [g](const std::vector<Nat>& a) { return g(a[0]); };
  ul.envelope = {envelope};
  return PayoffSpec::uniform_limit({ActionSpace::naturals()}, std::move(ul));
}

/// (a, k) -> g(a, k) with a in {1..m} and k natural; sup_tail(n) bounds |g(a, k)| for k > n.
inline PayoffSpec rows_by_nat(Nat m, std::function<Rational(Nat, Nat)> g, std::function<Rational(Nat)> sup_tail,
                              std::function<Rational(Nat)> envelope) {
  UniformLimit ul;
  ul.approximant = [m, g](Nat n) {
    std::vector<SimpleFunction::Cell> cells;
    for (Nat a = 1; a <= m; ++a) {
      for (Nat k = 1; k <= n; ++k) cells.push_back({{SetExpr::singleton(a), SetExpr::singleton(k)}, g(a, k)});
      cells.push_back({{SetExpr::singleton(a), SetExpr::interval(n + 1)}, Rational(0)});
    }
    cells.push_back({{SetExpr::interval(m + 1), SetExpr::naturals()}, Rational(0)});
    return SimpleFunction(2, std::move(cells));
  };
  ul.bound = sup_tail;
  ul.point = [g](const std::vector<Nat>& a) { return g(a[0], a[1]); };
  ul.envelope = {{}, envelope};
  ul.section = [m, g, sup_tail, envelope](std::size_t j, Nat x) -> PayoffPtr {
    if (j == 0)
      return std::make_shared<const PayoffSpec>(one_dimensional([g, x](Nat k) { return g(x, k); }, sup_tail, envelope));
    std::vector<Rational> column;
    for (Nat a = 1; a <= m; ++a) column.push_back(g(a, x));
    return std::make_shared<const PayoffSpec>(PayoffSpec::matrix({{m}, column}));
  };
  return PayoffSpec::uniform_limit({ActionSpace::finite(m), ActionSpace::naturals()}, std::move(ul));
}

/// Variant Wald payoff of `player`: 1/k for own k when the other's l < k, else 0.
inline PayoffSpec variant_wald_payoff(std::size_t player) {
  auto g = [player](const std::vector<Nat>& a) {
    Nat own = a[player], other = a[1 - player];
    return other < own ? Rational(1, static_cast<long>(own)) : Rational(0);
  };
  UniformLimit ul;
  ul.approximant = [player](Nat n) {
    std::vector<SimpleFunction::Cell> cells;
    auto rect = [player](SetExpr own, SetExpr other) {
      return player == 0 ? std::vector<SetExpr>{own, other} : std::vector<SetExpr>{other, own};
    };
    for (Nat k = 1; k <= n; ++k) {
      if (k > 1) cells.push_back({rect(SetExpr::singleton(k), SetExpr::interval(1, k - 1)), Rational(1, long(k))});
      cells.push_back({rect(SetExpr::singleton(k), SetExpr::interval(k)), Rational(0)});
    }
    cells.push_back({rect(SetExpr::interval(n + 1), SetExpr::naturals()), Rational(0)});
    return SimpleFunction(2, std::move(cells));
  };
  ul.bound = [](Nat n) { return Rational(1, long(n + 1)); };
  ul.point = g;
  std::function<Rational(Nat)> own_env = [](Nat k) { return Rational(1, long(k)); };
  std::function<Rational(Nat)> other_env = [](Nat l) { return Rational(1, long(l + 1)); };
  ul.envelope = player == 0 ? std::vector{own_env, other_env} : std::vector{other_env, own_env};
  ul.section = [player](std::size_t j, Nat x) -> PayoffPtr {
    if (j == player) {
      // own action fixed at x: 1/x on the other's {1..x-1}
      std::vector<SimpleFunction::Cell> cells{{{SetExpr::interval(x)}, Rational(0)}};
      if (x > 1) cells.push_back({{SetExpr::interval(1, x - 1)}, Rational(1, long(x))});
      return std::make_shared<const PayoffSpec>(
          PayoffSpec::simple({ActionSpace::naturals()}, SimpleFunction(1, std::move(cells))));
    }
    return std::make_shared<const PayoffSpec>(one_dimensional(
        [x](Nat k) { return k > x ? Rational(1, long(k)) : Rational(0); },
        [x](Nat n) { return Rational(1, long(std::max(n, x) + 1)); }, [](Nat k) { return Rational(1, long(k)); }));
  };
  return PayoffSpec::uniform_limit({ActionSpace::naturals(), ActionSpace::naturals()}, std::move(ul));
}

inline CountableGame variant_wald() {
  // sup_{k>H} tau_j({l < k}) / k <= tau_j(ca) / (H+1); diffuse mass never counts.
  TailBound tb = [](const ChargeProfile& others, Nat h) {
    return others.at(0).countably_additive_mass() / Rational(long(h + 1));
  };
  return CountableGame("variant_wald", {ActionSpace::naturals(), ActionSpace::naturals()},
                       {variant_wald_payoff(0), variant_wald_payoff(1)}, {tb, tb});
}

/// Player 1 {T, B} = {1, 2}, player 2 the naturals; u1(T, n) = 1/n, u1(B, n) = -1/n, u2 = -u1.
inline CountableGame example_3_3() {
  auto g1 = [](Nat a, Nat n) { return a == 1 ? Rational(1, long(n)) : Rational(-1, long(n)); };
  auto g2 = [g1](Nat a, Nat n) { return -g1(a, n); };
  auto sup = [](Nat n) { return Rational(1, long(n + 1)); };
  auto env = [](Nat n) { return Rational(1, long(n)); };
  TailBound tb2 = [](const ChargeProfile& others, Nat h) {
    // U2(n) = (1 - 2 p) / n for total mass 1 with p on T
    const Charge& k1 = others.at(0);
    Rational c = k1.eval(SetExpr::singleton(2)) - k1.eval(SetExpr::singleton(1));
    return c.sign() > 0 ? c / Rational(long(h + 1)) : Rational(0);
  };
  return CountableGame("example_3_3", {ActionSpace::finite(2), ActionSpace::naturals()},
                       {rows_by_nat(2, g1, sup, env), rows_by_nat(2, g2, sup, env)}, {{}, tb2});
}

/// Player 1 {U, D} = {1, 2} gets 0 / 1; player 2 on the naturals gets 1/k after U and -1/k^2 after D
/// for k >= 2, and 0 for action 1.
inline CountableGame hazy_filter_game() {
  std::vector<SimpleFunction::Cell> cells{{{SetExpr::singleton(1), SetExpr::naturals()}, Rational(0)},
                                          {{SetExpr::singleton(2), SetExpr::naturals()}, Rational(1)},
                                          {{SetExpr::interval(3), SetExpr::naturals()}, Rational(0)}};
  PayoffSpec u1 = PayoffSpec::simple({ActionSpace::finite(2), ActionSpace::naturals()}, SimpleFunction(2, cells));
  auto g2 = [](Nat a, Nat k) {
    if (k == 1) return Rational(0);
    return a == 1 ? Rational(1, long(k)) : Rational(-1, long(k * k));
  };
  PayoffSpec u2 = rows_by_nat(
      2, g2, [](Nat n) { return Rational(1, long(n + 1)); }, [](Nat k) { return Rational(1, long(k)); });
  TailBound tb2 = [](const ChargeProfile& others, Nat h) {
    // U^k = (p - q/k) / k < p / k
    return others.at(0).eval(SetExpr::singleton(1)) / Rational(long(h + 1));
  };
  return CountableGame("hazy_filter_game", {ActionSpace::finite(2), ActionSpace::naturals()}, {u1, u2}, {{}, tb2});
}

/// Finite game embedded with finite action spaces; payoff tensors row-major.
inline CountableGame finite_embedding(std::string name, const std::vector<std::size_t>& counts,
                                      const std::vector<std::vector<Rational>>& tensors) {
  std::vector<ActionSpace> spaces;
  for (auto c : counts) spaces.push_back(ActionSpace::finite(c));
  std::vector<PayoffSpec> payoffs;
  for (const auto& t : tensors) payoffs.push_back(PayoffSpec::matrix({counts, t}));
  return CountableGame(std::move(name), std::move(spaces), std::move(payoffs));
}

inline CountableGame by_name(const std::string& name) {
  if (name == "variant_wald") return variant_wald();
  if (name == "example_3_3") return example_3_3();
  if (name == "hazy_filter_game") return hazy_filter_game();
  throw InvalidArgument("unknown game family " + name);
}

}  // namespace families
}  // namespace perfeq
