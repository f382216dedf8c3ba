#pragma once

#include <ostream>
#include <random>

#include "perfeq/charge.hpp"

namespace testing_support {

using namespace perfeq;

inline Rational rnd_rational(std::mt19937_64& rng, long num_max, long den_max) {
  return Rational(static_cast<long>(rng() % (num_max + 1)), 1 + static_cast<long>(rng() % den_max));
}

// Periods drawn from divisors of 12 keep every tree periodic mod 12 beyond 60.
inline SetExpr random_set(std::mt19937_64& rng, int depth) {
  static const Nat periods[] = {1, 2, 3, 4, 6, 12};
  int pick = depth <= 0 ? static_cast<int>(rng() % 3) : static_cast<int>(rng() % 6);
  switch (pick) {
    case 0: {
      std::vector<Nat> xs;
      for (int i = 0, k = static_cast<int>(rng() % 5); i < k; ++i) xs.push_back(rng() % 40);
      return SetExpr::finite(xs);
    }
    case 1: return SetExpr::ap(rng() % 20, periods[rng() % 6]);
    case 2: {
      Nat lo = rng() % 30;
      if (rng() % 2) return SetExpr::interval(lo);
      return SetExpr::interval(lo, lo + rng() % 25);
    }
    case 3: return !random_set(rng, depth - 1);
    case 4: return random_set(rng, depth - 1) | random_set(rng, depth - 1);
    default: return random_set(rng, depth - 1) & random_set(rng, depth - 1);
  }
}

// Bases are residue classes mod 12, so every random_set is decided.
inline UltrafilterBase random_base(std::mt19937_64& rng) {
  static const Nat mods[] = {2, 3, 4, 6, 12};
  Nat m = mods[rng() % 5];
  std::vector<SetExpr> gens{SetExpr::ap(rng() % m, m)};
  Nat r = gens[0].next_member(1).value() % 12;
  gens.push_back(SetExpr::ap(r == 0 ? 12 : r, 12) | SetExpr::finite({rng() % 30}));
  return UltrafilterBase(gens);
}

/// Random probability charge mixing atoms, tails and ultrafilters.
inline Charge random_charge(std::mt19937_64& rng, bool allow_tail = true, bool allow_diffuse = true) {
  static const Rational ratios[] = {Rational(1, 2), Rational(1, 3), Rational(2, 3)};
  std::vector<std::pair<Rational, Charge>> parts;
  int n_atoms = 1 + static_cast<int>(rng() % 3);
  for (int i = 0; i < n_atoms; ++i)
    parts.emplace_back(Rational(1 + static_cast<long>(rng() % 5)), Charge::dirac(1 + rng() % 20));
  if (allow_tail && rng() % 2)
    parts.emplace_back(Rational(1 + static_cast<long>(rng() % 5)), Charge::geometric(1 + rng() % 10, ratios[rng() % 3]));
  if (allow_diffuse)
    for (int i = 0, k = static_cast<int>(rng() % 3); i < k; ++i)
      parts.emplace_back(Rational(1 + static_cast<long>(rng() % 5)), Charge::ultrafilter(random_base(rng)));
  Rational total;
  for (auto& p : parts) total += p.first;
  for (auto& p : parts) p.first /= total;
  return convex_combine(parts);
}

}  // namespace testing_support

namespace perfeq {
inline void PrintTo(const Charge& c, std::ostream* os) { *os << c.str(); }
inline void PrintTo(const Rational& r, std::ostream* os) { *os << r.str(); }
}  // namespace perfeq
