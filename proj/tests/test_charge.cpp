#include <gtest/gtest.h>

#include "perfeq/charge.hpp"
#include "support.hpp"

using namespace perfeq;
using testing_support::random_charge;
using testing_support::random_set;
using R = Rational;

TEST(Charge, EvalExamples) {
  Charge k = convex_combine({{R(1, 2), Charge::dirac(3)}, {R(1, 2), Charge::ultrafilter(SetExpr::evens())}});
  EXPECT_EQ(charge_eval(k, SetExpr::evens()), R(1, 2));
  Charge g = Charge::tail(1, R(1, 2), R(1, 2));
  EXPECT_TRUE(g.is_probability());
  EXPECT_EQ(charge_eval(g, SetExpr::ap(2, 2)), R(1, 3));
  EXPECT_THROW(charge_eval(Charge::ultrafilter(SetExpr::evens()), SetExpr::ap(0, 4)), UndeterminedByBase);
}

TEST(Charge, BaseValidation) {
  EXPECT_THROW(UltrafilterBase({SetExpr::finite({1, 2})}), InvalidBase);
  EXPECT_THROW(UltrafilterBase({SetExpr::evens(), SetExpr::odds()}), InvalidBase);
  EXPECT_NO_THROW(UltrafilterBase({SetExpr::evens(), SetExpr::interval(10)}));
}

// Oracle: partial sums up to N plus the remaining tail bound bracket the exact value.
TEST(Charge, TailMassAgainstPartialSums) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    Nat start = 1 + rng() % 12;
    R ratio(1 + static_cast<long>(rng() % 3), 4);
    GeometricTail t{start, R(1), ratio};
    SetExpr e = random_set(rng, 3);
    R partial;
    const Nat n = 80;
    R pk(1);
    for (Nat k = start; k <= n; ++k, pk *= ratio)
      if (e.eval(k)) partial += pk;
    R rest = ratio.pow(n + 1 - start) / (R(1) - ratio);
    R exact = t.mass_on(e);
    ASSERT_LE(partial, exact);
    ASSERT_LE(exact, partial + rest);
  }
}

TEST(Charge, DecomposeExamples) {
  auto d = decompose(Charge::dirac(5));
  EXPECT_EQ(d.weight_ca, R(1));
  EXPECT_EQ(*d.countably_additive, Charge::dirac(5));
  EXPECT_FALSE(d.diffuse.has_value());

  Charge u = Charge::ultrafilter(SetExpr::evens());
  auto du = decompose(u);
  EXPECT_EQ(du.weight_d, R(1));
  EXPECT_EQ(*du.diffuse, u);

  Charge m = convex_combine({{R(1, 2), Charge::dirac(1)}, {R(1, 2), u}});
  auto dm = decompose(m);
  EXPECT_EQ(dm.weight_ca, R(1, 2));
  EXPECT_EQ(*dm.countably_additive, Charge::dirac(1));
  EXPECT_EQ(*dm.diffuse, u);
}

TEST(Charge, ConvexCombineExamples) {
  std::mt19937_64 rng(1);
  Charge k = random_charge(rng);
  EXPECT_EQ(convex_combine({{R(1), k}}), k);
  EXPECT_EQ(convex_combine({{R(1, 2), Charge::dirac(1)}, {R(1, 2), Charge::dirac(2)}}),
            Charge::atoms({{1, R(1, 2)}, {2, R(1, 2)}}));
  Charge mu = Charge::geometric(1, R(1, 2));
  Charge p = convex_combine({{R(9, 10), Charge::dirac(2)}, {R(1, 10), mu}});
  for (Nat s = 1; s < 30; ++s) EXPECT_TRUE(carrier_positive(p, SetExpr::singleton(s)));
  EXPECT_THROW(convex_combine({{R(1, 2), mu}}), InvalidArgument);
}

TEST(Charge, CarrierExamples) {
  EXPECT_TRUE(carrier_positive(Charge::geometric(1, R(1, 2)), SetExpr::singleton(7)));
  EXPECT_FALSE(carrier_positive(Charge::ultrafilter(SetExpr::evens()), SetExpr::odds()));
  Charge m = convex_combine({{R(1, 2), Charge::dirac(1)}, {R(1, 2), Charge::ultrafilter(SetExpr::evens())}});
  EXPECT_TRUE(carrier_positive(m, SetExpr::singleton(1)));
}

TEST(Charge, MergesTailsAndRejectsNegativeMass) {
  Charge a = Charge::tail(2, R(1), R(1, 2)), b = Charge::tail(5, R(1), R(1, 2));
  Charge s = Charge::linear_combination({{R(1), a}, {R(1), b}});
  ASSERT_EQ(s.tails().size(), 1u);
  EXPECT_EQ(s.tails()[0].start, 5u);
  for (Nat k = 1; k < 20; ++k) EXPECT_EQ(s.point_mass(k), a.point_mass(k) + b.point_mass(k));
  Charge mixed = Charge::linear_combination({{R(1), a}, {R(1), Charge::tail(1, R(1), R(1, 3))}});
  EXPECT_EQ(mixed.tails().size(), 2u);
  EXPECT_THROW(Charge::linear_combination({{R(1), Charge::dirac(1)}, {R(-1), Charge::dirac(2)}}), NegativeMass);
  EXPECT_THROW(Charge::linear_combination({{R(1), a}, {R(-2), a}}), NegativeMass);
  // A hole punched into a tail is fine as long as the point mass stays nonnegative.
  Charge hole = Charge::linear_combination({{R(1), a}, {R(-1, 2), Charge::dirac(3)}});
  EXPECT_EQ(hole.point_mass(3), R(0));
}

TEST(Charge, Pushforward) {
  std::mt19937_64 rng(3);
  Charge k = random_charge(rng);
  EXPECT_EQ(pushforward_charge(k, NatMap::identity()), k);
  EXPECT_EQ(pushforward_charge(k, NatMap::constant(4)), Charge::dirac(4));
  Charge g = Charge::tail(1, R(1, 2), R(1, 2));
  Charge p = pushforward_charge(g, NatMap::rule(2, {2, 1}, {}));
  EXPECT_EQ(p, Charge::atoms({{1, R(2, 3)}, {2, R(1, 3)}}));
  Charge uf = Charge::ultrafilter(SetExpr::ap(0, 4));
  EXPECT_EQ(pushforward_charge(uf, NatMap::rule(2, {2, 1}, {})), Charge::dirac(2));
}

TEST(Charge, MeasureAxioms) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    Charge k = random_charge(rng);
    ASSERT_TRUE(k.is_probability());
    ASSERT_EQ(k.eval(SetExpr::empty()), R(0));
    ASSERT_EQ(k.eval(SetExpr::naturals()), R(1));
    SetExpr e = random_set(rng, 3), f = random_set(rng, 3) - e;
    ASSERT_EQ(k.eval(e | f), k.eval(e) + k.eval(f));
    ASSERT_EQ(k.eval(e) + k.eval(!e), R(1));
    SetExpr fin = SetExpr::finite({rng() % 30, rng() % 30, 1 + rng() % 5});
    ASSERT_EQ(k.diffuse_part().eval(fin), R(0));
  }
}

TEST(Charge, DecomposeRecombines) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    Charge k = random_charge(rng);
    auto d = decompose(k);
    ASSERT_EQ(d.weight_ca + d.weight_d, R(1));
    std::vector<std::pair<R, Charge>> parts;
    if (d.countably_additive) parts.emplace_back(d.weight_ca, *d.countably_additive);
    if (d.diffuse) parts.emplace_back(d.weight_d, *d.diffuse);
    Charge back = convex_combine(parts);
    for (int i = 0; i < 10; ++i) {
      SetExpr e = random_set(rng, 3);
      ASSERT_EQ(back.eval(e), k.eval(e));
    }
  }
}

TEST(Charge, PushforwardLinearAndComposes) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 150; ++trial) {
    Charge a = random_charge(rng), b = random_charge(rng);
    R w(static_cast<long>(rng() % 6), 5);
    static const Nat periods[] = {1, 2, 3, 4, 6, 12};
    Nat p = periods[rng() % 6];
    std::vector<Nat> targets;
    for (Nat r = 0; r < p; ++r) targets.push_back(1 + rng() % 4);
    NatMap phi = NatMap::rule(p, targets, {{1 + rng() % 10, 1 + rng() % 4}});
    NatMap psi = NatMap::rule(2, {1 + rng() % 3, 1 + rng() % 3}, {});
    Charge lhs = pushforward_charge(convex_combine({{w, a}, {R(1) - w, b}}), phi);
    Charge rhs = convex_combine({{w, pushforward_charge(a, phi)}, {R(1) - w, pushforward_charge(b, phi)}});
    ASSERT_EQ(lhs, rhs);
    ASSERT_EQ(pushforward_charge(a, phi.then(psi)), pushforward_charge(pushforward_charge(a, phi), psi));
    for (Nat t : phi.image()) ASSERT_EQ(pushforward_charge(a, phi).eval(SetExpr::singleton(t)), a.eval(phi.fiber(t)));
  }
}

TEST(Charge, ParseRoundTrip) {
  Charge k = parse_charge("atoms{1:1/2} + tail(k0=3,c=1/8,r=1/2) + diffuse[(1/4, uf{ap(0,2)})]");
  EXPECT_TRUE(k.is_probability());
  // evens: diffuse 1/4 plus tail mass on 4, 6, ... = (1/8)(1/2)/(1 - 1/4) = 1/12
  EXPECT_EQ(k.eval(SetExpr::evens()), R(1, 4) + R(1, 12));
  EXPECT_EQ(parse_charge("1/2*delta(1) + 1/2*uf{ap(0,2), int(5,)}").eval(SetExpr::evens()), R(1, 2));
  EXPECT_TRUE(parse_charge("diffuse").is_diffuse());
  EXPECT_EQ(parse_charge("geom(1, 1/2)"), Charge::tail(1, R(1, 2), R(1, 2)));
  std::mt19937_64 rng(10);
  for (int i = 0; i < 100; ++i) {
    Charge c = random_charge(rng);
    ASSERT_EQ(parse_charge(c.str()), c) << c.str();
  }
  for (const char* bad : {"", "atoms{1:}", "tail(k0=1,c=1/2)", "uf{fin{1}}", "delta(1) +", "atoms{1:1/2} x"})
    EXPECT_ANY_THROW(parse_charge(bad)) << bad;
  EXPECT_THROW(parse_probability_charge("atoms{1:1/2}"), InvariantViolation);
}
