#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "perfeq/families.hpp"
#include "perfeq/finite_game.hpp"

namespace perfeq {

/// Per-player finite lists of generator sets that a carrier must contain.
struct CarrierSpec {
  std::vector<std::vector<SetExpr>> generators;

  explicit CarrierSpec(std::vector<std::vector<SetExpr>> g) : generators(std::move(g)) {
    for (const auto& player : generators)
      for (const auto& s : player)
        if (s.is_empty()) throw InvalidArgument("carrier generators must be non-empty sets");
  }
};

inline bool carrier_includes(const Charge& kappa, const std::vector<SetExpr>& generators) {
  for (const auto& g : generators)
    if (!carrier_positive(kappa, g)) return false;
  return true;
}

/// Basis neighborhood {kappa : |kappa_i(R) - center_i(R)| < epsilon for every cell R of partition i}.
struct TychonovNbhd {
  ChargeProfile center;
  std::vector<std::vector<SetExpr>> partitions;
  Rational epsilon;

  TychonovNbhd(ChargeProfile c, std::vector<std::vector<SetExpr>> parts, Rational eps)
      : center(std::move(c)), partitions(std::move(parts)), epsilon(std::move(eps)) {
    if (center.size() != partitions.size()) throw ShapeMismatch("one partition per player");
    if (epsilon.sign() <= 0) throw InvalidArgument("epsilon must be positive");
    for (const auto& part : partitions) {
      SetExpr seen = SetExpr::empty();
      for (const auto& cell : part) {
        if (!(seen & cell).is_empty()) throw InvariantViolation("partition cells overlap");
        seen = seen | cell;
      }
      if (!seen.same_set(SetExpr::naturals())) throw InvariantViolation("partition does not cover the naturals");
    }
  }
};

inline bool nbhd_contains(const TychonovNbhd& nbhd, const ChargeProfile& kappa) {
  if (kappa.size() != nbhd.center.size()) throw ShapeMismatch("profile size differs from neighborhood");
  for (std::size_t i = 0; i < kappa.size(); ++i)
    for (const auto& cell : nbhd.partitions[i])
      if ((kappa[i].eval(cell) - nbhd.center[i].eval(cell)).abs() >= nbhd.epsilon) return false;
  return true;
}

enum class Verdict { Holds, Fails, Inconclusive };

inline std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    default: return "inconclusive";
  }
}

struct BrCheck {
  Verdict verdict = Verdict::Inconclusive;
  Bracket value;                  // payoff of the tested strategy
  Rational best_upper;            // max upper bracket over pure actions <= horizon
  std::optional<Rational> tail;   // bound on actions beyond the horizon
  std::optional<Nat> improving;   // pure action that is conclusively better
  Rational tol;                   // last tolerance used
  std::string note;
};

namespace detail {

inline ChargeProfile others_of(const ChargeProfile& profile, std::size_t player) {
  ChargeProfile out;
  for (std::size_t j = 0; j < profile.size(); ++j)
    if (j != player) out.push_back(profile[j]);
  return out;
}

// Exact sup of pure payoffs beyond the horizon when the game family has no certificate.
inline Rational simple_tail(const SimpleFunction& f, std::size_t player, const ChargeProfile& profile, Nat horizon) {
  std::optional<Rational> best;
  PayoffSpec spec = PayoffSpec::simple(std::vector<ActionSpace>(f.arity()), f);
  for (const auto& block : f.blocks()[player]) {
    auto a = block.next_member(horizon + 1);
    if (!a) continue;
    Rational v = pure_action_payoff(spec, player, *a, profile, Rational(1)).lower;
    if (!best || v > *best) best = v;
  }
  return best.value_or(Rational(0));
}

}  // namespace detail

/// Upper bound on the payoff of every pure action above the horizon, or nullopt if none exist.
inline std::optional<Rational> tail_bound(const CountableGame& game, std::size_t player, const ChargeProfile& profile,
                                          Nat horizon) {
  const ActionSpace& space = game.spaces[player];
  if (space.finite() && horizon >= *space.size) return std::nullopt;
  if (game.tail_bounds[player]) return game.tail_bounds[player](detail::others_of(profile, player), horizon);
  const PayoffSpec& u = game.payoffs[player];
  if (u.is_simple()) return detail::simple_tail(std::get<SimpleFunction>(u.body()), player, profile, horizon);
  if (u.is_matrix()) return detail::simple_tail(u.as_simple(), player, profile, horizon);
  throw MissingTailBound(game.name + ": no tail certificate for player " + std::to_string(player + 1));
}

namespace detail {

// Coarse-to-fine tolerances: 1/16, 1/256, ... above tol, then tol halved up to 8 times.
inline std::vector<Rational> tol_schedule(const Rational& tol) {
  std::vector<Rational> out;
  for (Rational t(1, 16); t > tol; t /= Rational(16)) out.push_back(t);
  Rational t = tol;
  for (int round = 0; round <= 8; ++round, t /= Rational(2)) out.push_back(t);
  return out;
}

// Finite-atomic strategies compare each atom with every other pure action, so an atom never
// races its own bracket.
inline BrCheck atomic_br_check(const CountableGame& game, std::size_t player, const Charge& strategy,
                               const ChargeProfile& profile, Nat h, const std::optional<Rational>& tail, const Rational& tol) {
  BrCheck out;
  out.tail = tail;
  const auto& atoms = strategy.atom_map();
  Nat top = std::max(h, atoms.rbegin()->first);
  for (const Rational& t : tol_schedule(tol)) {
    out.tol = t;
    std::vector<Bracket> pure(top + 1);
    bool exact = true;
    for (Nat k = 1; k <= top; ++k) {
      if (k > h && !atoms.count(k)) continue;
      pure[k] = pure_action_payoff(game.payoffs[player], player, k, profile, t);
      exact = exact && pure[k].exact();
    }
    out.value = Bracket{};
    for (const auto& [a, w] : atoms) out.value = out.value + scale(pure[a], w);
    std::optional<Rational> best;
    for (Nat k = 1; k <= h; ++k) {
      if (pure[k].lower > out.value.upper) {
        out.verdict = Verdict::Fails;
        out.improving = k;
        out.best_upper = pure[k].upper;
        return out;
      }
      if (!best || pure[k].upper > *best) best = pure[k].upper;
    }
    out.best_upper = best.value_or(Rational(0));
    bool ok = true, covers_tail = true;
    for (const auto& [a, w] : atoms) {
      if (tail && pure[a].lower < *tail) covers_tail = false;
      for (Nat k = 1; k <= h && ok; ++k)
        if (k != a && pure[a].lower < pure[k].upper) ok = false;
    }
    if (ok && covers_tail) {
      out.verdict = Verdict::Holds;
      return out;
    }
    if (exact) {
      if (!covers_tail) out.note = "tail bound " + tail->str() + " exceeds the payoff; raise the horizon";
      return out;
    }
  }
  out.note = "brackets still overlap at tol " + out.tol.str();
  return out;
}

}  // namespace detail

/// Is `strategy` a best response for `player` against the other coordinates of `profile`?
/// Conclusive only on non-overlapping brackets. Refines from 1/16 down to tol, then halves tol up to 8 times.
inline BrCheck best_response_check(const CountableGame& game, std::size_t player, const Charge& strategy,
                                   const ChargeProfile& profile, Nat horizon, const Rational& tol) {
  const ActionSpace& space = game.spaces[player];
  Nat h = space.finite() ? *space.size : horizon;
  ChargeProfile p = profile;
  p[player] = strategy;
  std::optional<Rational> tail = tail_bound(game, player, profile, h);
  BrCheck out;
  out.tail = tail;
  if (strategy.is_finite_atomic() && !strategy.atom_map().empty())
    return detail::atomic_br_check(game, player, strategy, profile, h, tail, tol);
  for (const Rational& t : detail::tol_schedule(tol)) {
    out.tol = t;
    out.value = integrate_bracket(p, game.payoffs[player], t);
    bool exact = out.value.exact();
    std::optional<Rational> best;
    for (Nat k = 1; k <= h; ++k) {
      Bracket b = pure_action_payoff(game.payoffs[player], player, k, profile, t);
      exact = exact && b.exact();
      if (b.lower > out.value.upper) {
        out.verdict = Verdict::Fails;
        out.improving = k;
        out.best_upper = b.upper;
        return out;
      }
      if (!best || b.upper > *best) best = b.upper;
    }
    out.best_upper = best.value_or(Rational(0));
    bool covers_tail = !tail || out.value.lower >= *tail;
    if (out.value.lower >= out.best_upper && covers_tail) {
      out.verdict = Verdict::Holds;
      return out;
    }
    if (exact) {
      if (!covers_tail) out.note = "tail bound " + tail->str() + " exceeds the payoff; raise the horizon";
      return out;
    }
  }
  out.note = "brackets still overlap at tol " + out.tol.str();
  return out;
}

struct NashReport {
  Verdict verdict = Verdict::Holds;
  std::vector<BrCheck> players;
};

inline Verdict combine(Verdict a, Verdict b) {
  if (a == Verdict::Fails || b == Verdict::Fails) return Verdict::Fails;
  if (a == Verdict::Inconclusive || b == Verdict::Inconclusive) return Verdict::Inconclusive;
  return Verdict::Holds;
}

inline NashReport nash_check(const CountableGame& game, const ChargeProfile& profile, Nat horizon, const Rational& tol) {
  if (profile.size() != game.players()) throw ShapeMismatch("profile size differs from player count");
  NashReport r;
  for (std::size_t i = 0; i < game.players(); ++i) {
    r.players.push_back(best_response_check(game, i, profile[i], profile, horizon, tol));
    r.verdict = combine(r.verdict, r.players.back().verdict);
  }
  return r;
}

struct WitnessReport {
  Verdict verdict = Verdict::Holds;
  bool tau_in_nbhd = false;
  bool kappa_in_nbhd = false;
  std::vector<bool> carrier_ok;
  std::vector<BrCheck> best_responses;
  std::vector<std::string> notes;
};

/// Checks one instance of the characterization: tau and kappa lie in the neighborhood of sigma,
/// tau's carrier contains the spec, and each kappa_i is a best response to tau.
inline WitnessReport verify_perfection_witness(const CountableGame& game, const ChargeProfile& sigma,
                                               const CarrierSpec& spec, const TychonovNbhd& nbhd,
                                               const ChargeProfile& tau, const ChargeProfile& kappa, Nat horizon,
                                               const Rational& tol) {
  std::size_t n = game.players();
  if (sigma.size() != n || tau.size() != n || kappa.size() != n || spec.generators.size() != n)
    throw ShapeMismatch("witness sizes differ from player count");
  for (std::size_t i = 0; i < n; ++i)
    if (!(sigma[i] == nbhd.center[i])) throw InvalidArgument("neighborhood is not centered at sigma");
  WitnessReport r;
  r.tau_in_nbhd = nbhd_contains(nbhd, tau);
  r.kappa_in_nbhd = nbhd_contains(nbhd, kappa);
  if (!r.tau_in_nbhd) r.notes.push_back("tau leaves the neighborhood");
  if (!r.kappa_in_nbhd) r.notes.push_back("kappa leaves the neighborhood");
  bool ok = r.tau_in_nbhd && r.kappa_in_nbhd;
  for (std::size_t i = 0; i < n; ++i) {
    r.carrier_ok.push_back(carrier_includes(tau[i], spec.generators[i]));
    if (!r.carrier_ok.back()) r.notes.push_back("carrier of tau_" + std::to_string(i + 1) + " misses a generator");
    ok = ok && r.carrier_ok.back();
  }
  r.verdict = ok ? Verdict::Holds : Verdict::Fails;
  for (std::size_t i = 0; i < n; ++i) {
    r.best_responses.push_back(best_response_check(game, i, kappa[i], tau, horizon, tol));
    const BrCheck& b = r.best_responses.back();
    if (b.verdict == Verdict::Fails)
      r.notes.push_back("kappa_" + std::to_string(i + 1) + " is beaten by action " + std::to_string(*b.improving));
    if (b.verdict == Verdict::Inconclusive) r.notes.push_back("player " + std::to_string(i + 1) + ": " + b.note);
    r.verdict = combine(r.verdict, b.verdict);
  }
  return r;
}

/// Full-support probability on the naturals against which, in the variant Wald game, the
/// opponent's pure best responses are exactly K.
inline Charge wald_mixer(const std::vector<Nat>& k) {
  if (k.empty() || k.front() <= 1) throw InvalidK("K must start above 1");
  for (std::size_t m = 1; m < k.size(); ++m)
    if (k[m] <= k[m - 1]) throw InvalidK("K must be strictly increasing");
  std::map<Nat, Rational> w;
  for (Nat j = 1; j < k.front(); ++j) w[j] = Rational(1);
  Rational p(static_cast<long>(k.front() - 1));  // mass below K_m
  for (std::size_t m = 0; m + 1 < k.size(); ++m) {
    Nat km = k[m], ell = k[m + 1] - km;
    Rational t = p / Rational(static_cast<long>(2 * km));
    for (Nat j = km; j + 1 < km + ell; ++j) w[j] = t;
    w[km + ell - 1] = t * Rational(static_cast<long>(ell + 1));
    p = p * Rational(static_cast<long>(k[m + 1])) / Rational(static_cast<long>(km));
  }
  Nat last = k.back();
  Rational half(1, 2);
  Rational coeff = p / Rational(static_cast<long>(2 * last)) * half.pow(last);
  Rational total = p + Rational(2) * coeff;
  for (auto& [j, m] : w) m /= total;
  return Charge(std::move(w), {{last, coeff / total, half}}, {});
}

/// Price at which the opponent is indifferent between k and k+1.
inline Rational br_threshold(Nat k) {
  if (k < 2) throw InvalidArgument("threshold defined for k >= 2");
  long kk = static_cast<long>(k);
  return Rational(2 * kk + 1, kk * kk + 3 * kk + 1);
}

/// U^k = (p - (1-p)/k)/k for k >= 2; action 1 pays 0.
inline Rational hazy_payoff(const Rational& p, Nat k) {
  if (k < 2) return Rational(0);
  Rational kk(static_cast<long>(k));
  return (p - (Rational(1) - p) / kk) / kk;
}

struct BrRegion {
  std::vector<Nat> actions;
  Rational value;
};

/// Exact argmax of U^k; search stops once p/k, which bounds every later U^k, drops to the best value.
inline BrRegion br_region(const Rational& p) {
  if (p.sign() <= 0 || p >= Rational(1)) throw InvalidArgument("p must lie in (0,1)");
  BrRegion r{{1}, Rational(0)};
  for (Nat k = 2;; ++k) {
    if (p / Rational(static_cast<long>(k)) <= r.value) break;
    Rational v = hazy_payoff(p, k);
    if (v > r.value) r = {{k}, v};
    else if (v == r.value) r.actions.push_back(k);
  }
  return r;
}

struct HazyResult {
  enum class Kind { Hazy, NotHazy, Undetermined };
  Kind kind = Kind::Undetermined;
  std::optional<std::array<SetExpr, 3>> partition;
  std::optional<std::array<Rational, 3>> masses;
};

/// Hazy: at most two ultrafilter components. NotHazy: a 3-partition built from component cores
/// on which every cell has positive mass.
inline HazyResult hazy_filter_test(const Charge& kappa) {
  if (!kappa.countably_additive_mass().is_zero()) throw NotDiffuse("charge has countably additive mass");
  const auto& comps = kappa.diffuse();
  if (comps.size() <= 2) return {HazyResult::Kind::Hazy, std::nullopt, std::nullopt};
  for (std::size_t a = 0; a < comps.size(); ++a)
    for (std::size_t b = 0; b < comps.size(); ++b) {
      if (a == b) continue;
      const SetExpr& ca = comps[a].base.core();
      const SetExpr& cb = comps[b].base.core();
      std::array<SetExpr, 3> part{ca, cb - ca, !(ca | cb)};
      try {
        std::array<Rational, 3> m{kappa.eval(part[0]), kappa.eval(part[1]), kappa.eval(part[2])};
        if (m[0].sign() > 0 && m[1].sign() > 0 && m[2].sign() > 0) return {HazyResult::Kind::NotHazy, part, m};
      } catch (const UndeterminedByBase&) {
      }
    }
  return {};
}

struct TwinsResult {
  enum class Kind { Twins, NotTwins, Undetermined };
  Kind kind = Kind::Undetermined;
  std::optional<SetExpr> x, y;
};

/// Decides twins for the sets the bases force: X and Y contain the cores up to finitely many points.
inline TwinsResult twins_test(const UltrafilterBase& b1, const UltrafilterBase& b2) {
  const SetExpr& x = b1.core();
  const SetExpr& y = b2.core();
  // k is a witness window when {k, k+1} meets both X and Y.
  SetExpr windows = (x | x.shift_down()) & (y | y.shift_down());
  if (windows.is_infinite()) return {TwinsResult::Kind::Twins, std::nullopt, std::nullopt};
  if (windows.is_empty()) return {TwinsResult::Kind::NotTwins, x, y};
  SetExpr beyond = SetExpr::interval(*windows.max_member() + 2);
  return {TwinsResult::Kind::NotTwins, x & beyond, y & beyond};
}

/// Restricted strategy space {rho >= zeta} as the image of T(psi) = (1-K) psi + K phi.
struct RestrictedIso {
  Charge phi;
  Rational k;

  Charge forward(const Charge& psi) const {
    return Charge::linear_combination({{Rational(1) - k, psi}, {k, phi}});
  }
  Charge inverse(const Charge& rho) const {
    Rational lambda = k / (Rational(1) - k);
    return Charge::linear_combination({{Rational(1) + lambda, rho}, {-lambda, phi}});
  }
};

inline RestrictedIso restricted_iso(const Charge& zeta) {
  Rational k = zeta.mass();
  if (k.sign() <= 0 || k >= Rational(1)) throw MassOutOfRange("floor mass must lie in (0,1), got " + k.str());
  return {zeta.scaled(Rational(1) / k), k};
}

struct RestrictedNashReport {
  Verdict verdict = Verdict::Holds;
  std::vector<std::string> notes;
};

/// Sufficient condition for rho to be Nash in the game restricted to strategies above zeta:
/// every atom where rho exceeds zeta is a pure best response, and the diffuse parts agree.
inline RestrictedNashReport restricted_nash_sufficient(const CountableGame& game, const std::vector<Charge>& zeta,
                                                       const ChargeProfile& rho, Nat horizon, const Rational& tol) {
  if (zeta.size() != game.players() || rho.size() != game.players())
    throw ShapeMismatch("floor and profile sizes differ from player count");
  RestrictedNashReport r;
  for (std::size_t i = 0; i < game.players(); ++i) {
    std::string who = "player " + std::to_string(i + 1);
    Charge excess;
    try {
      excess = Charge::linear_combination(
          {{Rational(1), rho[i].countably_additive_part()}, {Rational(-1), zeta[i].countably_additive_part()}});
    } catch (const NegativeMass&) {
      throw InvalidArgument(who + ": profile does not dominate the floor");
    }
    if (!(rho[i].diffuse_part() == zeta[i].diffuse_part())) {
      r.verdict = Verdict::Fails;
      r.notes.push_back(who + ": diffuse part differs from the floor's");
    }
    if (!excess.tails().empty()) {
      r.verdict = combine(r.verdict, Verdict::Inconclusive);
      r.notes.push_back(who + ": excess has infinitely many atoms");
      continue;
    }
    for (const auto& [k, m] : excess.atom_map()) {
      if (m.sign() <= 0) continue;
      BrCheck b = best_response_check(game, i, Charge::dirac(k), rho, horizon, tol);
      if (b.verdict != Verdict::Holds)
        r.notes.push_back(who + ": action " + std::to_string(k) + " is " +
                          (b.verdict == Verdict::Fails ? "not a best response" : "not certified as a best response"));
      r.verdict = combine(r.verdict, b.verdict);
    }
  }
  return r;
}

/// Finite game as a countable game with finite action spaces.
inline CountableGame embed_finite(const FiniteGame& g, std::string name = "finite") {
  std::vector<std::vector<Rational>> tensors;
  for (std::size_t i = 0; i < g.players(); ++i) tensors.push_back(g.tensor(i));
  return families::finite_embedding(std::move(name), g.action_counts(), tensors);
}

/// Mixed strategy over {1..n} as an atomic charge.
inline Charge strategy_charge(const Strategy& s) {
  std::map<Nat, Rational> atoms;
  for (std::size_t a = 0; a < s.size(); ++a)
    if (!s[a].is_zero()) atoms[a + 1] = s[a];
  return Charge::atoms(std::move(atoms));
}

}  // namespace perfeq
