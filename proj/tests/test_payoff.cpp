#include <gtest/gtest.h>

#include <cmath>

#include "perfeq/families.hpp"
#include "perfeq/payoff.hpp"
#include "support.hpp"

using namespace perfeq;
using testing_support::random_charge;
using testing_support::random_set;
using R = Rational;

namespace {

SimpleFunction ind(std::vector<SetExpr> rect) { return SimpleFunction::indicator(rect); }

Charge free_uf() { return Charge::ultrafilter(UltrafilterBase()); }

// Random 2-d simple function that is not of product type: each row block has its own column partition.
SimpleFunction random_simple(std::mt19937_64& rng) {
  auto partition = [&](int parts) {
    std::vector<SetExpr> out;
    SetExpr rest = SetExpr::naturals();
    for (int i = 0; i + 1 < parts; ++i) {
      SetExpr s = random_set(rng, 2) & rest;
      out.push_back(s);
      rest = rest - s;
    }
    out.push_back(rest);
    return out;
  };
  std::vector<SimpleFunction::Cell> cells;
  for (const auto& a : partition(1 + static_cast<int>(rng() % 3)))
    for (const auto& b : partition(1 + static_cast<int>(rng() % 3)))
      cells.push_back({{a, b}, R(static_cast<long>(rng() % 11) - 5, 1 + static_cast<long>(rng() % 4))});
  return SimpleFunction(2, std::move(cells));
}

Bracket wald(const Charge& a, const Charge& b, const R& tol) {
  return integrate_bracket({a, b}, families::variant_wald_payoff(0), tol);
}

}  // namespace

TEST(Payoff, IntegrateSimpleExamples) {
  EXPECT_EQ(integrate_simple({Charge::dirac(1), Charge::dirac(2)}, ind({SetExpr::singleton(1), SetExpr::singleton(2)})),
            R(1));
  Charge half = Charge::atoms({{2, R(1, 2)}, {3, R(1, 2)}});
  EXPECT_EQ(integrate_simple({half, Charge::ultrafilter(SetExpr::evens())}, ind({SetExpr::evens(), SetExpr::evens()})),
            R(1, 2));
  SimpleFunction u3 = std::get<UniformLimit>(families::variant_wald_payoff(0).body()).approximant(3);
  EXPECT_EQ(integrate_simple({Charge::dirac(3), Charge::dirac(1)}, u3), R(1, 3));
}

TEST(Payoff, UndecidedSetPropagates) {
  SimpleFunction f = ind({SetExpr::ap(0, 4), SetExpr::naturals()});
  EXPECT_THROW(integrate_simple({Charge::ultrafilter(SetExpr::evens()), Charge::dirac(1)}, f), UndeterminedByBase);
}

TEST(Payoff, CellValidation) {
  EXPECT_THROW(SimpleFunction(1, {{{SetExpr::interval(1, 5)}, R(1)}}), InvariantViolation);
  EXPECT_THROW(SimpleFunction(1, {{{SetExpr::interval(1, 5)}, R(1)}, {{SetExpr::interval(5)}, R(0)}}),
               InvariantViolation);
  EXPECT_NO_THROW(SimpleFunction(1, {{{SetExpr::evens()}, R(1)}, {{SetExpr::odds()}, R(0)}}));
  EXPECT_THROW(SimpleFunction(2, {{{SetExpr::naturals()}, R(1)}}), ShapeMismatch);
}

TEST(Payoff, UniformLimitSpotCheck) {
  UniformLimit ul;
  ul.approximant = [](Nat) { return SimpleFunction::constant(1, R(0)); };
  ul.bound = [](Nat n) { return R(1, long(n + 1)); };
  ul.point = [](const std::vector<Nat>& a) { return R(1, long(a[0])); };
  EXPECT_THROW(PayoffSpec::uniform_limit({ActionSpace::naturals()}, ul), InvariantViolation);
  ul.bound = [](Nat) { return R(1); };
  PayoffSpec loose = PayoffSpec::uniform_limit({ActionSpace::naturals()}, ul);
  EXPECT_THROW(integrate_bracket({Charge::geometric(1, R(1, 2))}, loose, R(1, 10)), NoApproximant);
}

TEST(Payoff, BracketExamples) {
  Bracket z = wald(free_uf(), free_uf(), R(1, 100));
  EXPECT_TRUE(z.contains(R(0)));
  EXPECT_LE(z.width(), R(1, 100));
  Bracket h = wald(Charge::dirac(2), Charge::dirac(1), R(1, 1000000));
  EXPECT_EQ(h.lower, R(1, 2));
  EXPECT_EQ(h.upper, R(1, 2));
  PayoffSpec s = PayoffSpec::simple({ActionSpace::naturals(), ActionSpace::naturals()},
                                    ind({SetExpr::evens(), SetExpr::interval(3)}));
  Charge a = Charge::geometric(1, R(1, 3)), b = Charge::geometric(2, R(1, 2));
  Bracket e = integrate_bracket({a, b}, s, R(1, 7));
  EXPECT_TRUE(e.exact());
  EXPECT_EQ(e.lower, integrate_simple({a, b}, std::get<SimpleFunction>(s.body())));
}

TEST(Payoff, PureActionExamples) {
  PayoffSpec u = families::variant_wald_payoff(0);
  for (Nat k = 1; k <= 12; ++k) {
    Bracket b = pure_action_payoff(u, 0, k, {Charge(), Charge::dirac(1)}, R(1, 1000));
    R want = k >= 2 ? R(1, long(k)) : R(0);
    EXPECT_EQ(b.lower, want);
    EXPECT_EQ(b.upper, want);
  }
  for (const Charge& opp : {Charge::dirac(4), Charge::geometric(1, R(1, 2)), free_uf()}) {
    Bracket b = pure_action_payoff(u, 0, 1, {Charge(), opp}, R(1, 1000));
    EXPECT_TRUE(b.contains(R(0)));
    EXPECT_LE(b.width(), R(1, 1000));
  }
  CountableGame g = families::example_3_3();
  Bracket t = pure_action_payoff(g.payoffs[0], 0, 1, {Charge(), free_uf()}, R(1, 100));
  EXPECT_TRUE(t.contains(R(0)));
}

TEST(Payoff, PartialIntegrateExamples) {
  SimpleFunction f = ind({SetExpr::singleton(1), SetExpr::evens()});
  SimpleFunction g = partial_integrate(f, {std::nullopt, Charge::ultrafilter(SetExpr::evens())});
  EXPECT_EQ(g.value_at({1}), R(1));
  EXPECT_EQ(g.value_at({2}), R(0));
  SimpleFunction c = partial_integrate(SimpleFunction::constant(2, R(7, 3)), {std::nullopt, free_uf()});
  EXPECT_EQ(c.value_at({9}), R(7, 3));
  SimpleFunction e = partial_integrate(ind({SetExpr::evens(), SetExpr::evens()}),
                                       {std::nullopt, Charge::atoms({{2, R(1, 2)}, {4, R(1, 2)}})});
  EXPECT_EQ(e.value_at({6}), R(1));
  EXPECT_EQ(e.value_at({5}), R(0));
}

TEST(Payoff, FubiniExamples) {
  auto r = fubini_verify(ind({SetExpr::singleton(1), SetExpr::singleton(2)}), {Charge::dirac(1), std::nullopt},
                         {std::nullopt, Charge::dirac(2)});
  EXPECT_TRUE(r.holds);
  EXPECT_EQ(r.product, R(1));
  auto s = fubini_verify(ind({SetExpr::evens(), SetExpr::evens()}),
                         {Charge::atoms({{2, R(1, 2)}, {3, R(1, 2)}}), std::nullopt},
                         {std::nullopt, Charge::ultrafilter(SetExpr::evens())});
  EXPECT_TRUE(s.holds);
  EXPECT_EQ(s.iterated, R(1, 2));
}

// Both sides computed independently on random non-product-type functions and decided charges.
TEST(Payoff, FubiniRandomTriples) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    SimpleFunction f = random_simple(rng);
    Charge a = random_charge(rng), b = random_charge(rng);
    auto r1 = fubini_verify(f, {a, std::nullopt}, {std::nullopt, b});
    auto r2 = fubini_verify(f, {std::nullopt, b}, {a, std::nullopt});
    ASSERT_TRUE(r1.holds) << trial;
    ASSERT_TRUE(r2.holds) << trial;
    // Oracle for the atomic case: direct double sum.
    if (a.is_finite_atomic() && b.is_finite_atomic()) {
      R direct;
      for (auto [k, m] : a.atom_map())
        for (auto [l, w] : b.atom_map()) direct += m * w * f.value_at({k, l});
      ASSERT_EQ(direct, r1.product);
    }
  }
}

TEST(Payoff, Multilinearity) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    SimpleFunction f = random_simple(rng);
    Charge a = random_charge(rng), b = random_charge(rng), c = random_charge(rng);
    R w = testing_support::rnd_rational(rng, 7, 7);
    if (w > R(1)) w = R(1) / w;
    Charge mix = convex_combine({{R(1) - w, a}, {w, b}});
    EXPECT_EQ(integrate_simple({mix, c}, f),
              (R(1) - w) * integrate_simple({a, c}, f) + w * integrate_simple({b, c}, f));
    EXPECT_EQ(integrate_simple({c, mix}, f),
              (R(1) - w) * integrate_simple({c, a}, f) + w * integrate_simple({c, b}, f));
  }
}

// Oracle: closed-form variant Wald payoff summed over k, l <= 10^4 in floating point.
TEST(Payoff, BracketSoundnessVariantWald) {
  const int horizon = 10000;
  struct Geo {
    Nat start;
    double c, r;
  };
  std::vector<std::pair<Geo, Geo>> cases{{{1, 0.5, 0.5}, {1, 2.0 / 3, 1.0 / 3}},
                                         {{3, 1.0 / 3, 2.0 / 3}, {1, 0.5, 0.5}},
                                         {{2, 0.75, 0.25}, {5, 0.5, 0.5}}};
  for (auto [ga, gb] : cases) {
    auto mass = [&](const Geo& g, int k) { return k < int(g.start) ? 0.0 : g.c * std::pow(g.r, k - int(g.start)); };
    double truth = 0, below = 0;  // below = b-mass on {l < k}
    for (int k = 1; k <= horizon; ++k) {
      truth += mass(ga, k) * below / k;
      below += mass(gb, k);
    }
    auto to_r = [](double x) {
      // exact small fractions used above
      for (long d = 1; d <= 12; ++d)
        for (long n = 0; n <= d; ++n)
          if (std::abs(double(n) / d - x) < 1e-12) return R(n, d);
      throw std::logic_error("unexpected parameter");
    };
    Charge a = Charge::tail(ga.start, to_r(ga.c), to_r(ga.r));
    Charge b = Charge::tail(gb.start, to_r(gb.c), to_r(gb.r));
    for (R tol : {R(1, 10), R(1, 100), R(1, 400)}) {
      Bracket br = wald(a, b, tol);
      EXPECT_LE(br.lower.to_double(), truth + 1e-12);
      EXPECT_GE(br.upper.to_double(), truth - 1e-12);
      EXPECT_LE(br.width(), tol);
    }
  }
}

TEST(Payoff, ShrinkingTolNeverWidens) {
  Charge a = Charge::geometric(1, R(1, 2)), b = Charge::geometric(1, R(2, 3));
  R prev(1000);
  for (long d = 10; d <= 640; d *= 2) {
    Bracket br = wald(a, b, R(1, d));
    EXPECT_LE(br.width(), prev);
    EXPECT_LE(br.width(), R(1, d));
    prev = br.width();
  }
}

TEST(Payoff, SupportOutsideFiniteSpace) {
  CountableGame g = families::example_3_3();
  EXPECT_THROW(integrate_bracket({Charge::dirac(3), Charge::dirac(1)}, g.payoffs[0], R(1, 10)), InvariantViolation);
  Bracket b = integrate_bracket({Charge::dirac(2), Charge::dirac(4)}, g.payoffs[0], R(1, 10));
  EXPECT_EQ(b.lower, R(-1, 4));
}
