#include <gtest/gtest.h>

#include <set>

#include "perfeq/perfection.hpp"
#include "support.hpp"

using namespace perfeq;
using testing_support::random_charge;
using testing_support::random_set;
using R = Rational;

namespace {

Charge uf(const SetExpr& s) { return Charge::ultrafilter(s); }
Charge half_even_odd() { return convex_combine({{R(1, 2), uf(SetExpr::evens())}, {R(1, 2), uf(SetExpr::odds())}}); }

// Brute-force argmax of P(k)/k over k <= horizon, P(k) the mass strictly below k.
std::vector<Nat> wald_oracle(const Charge& sigma, Nat horizon) {
  R below, best(-1);
  std::vector<Nat> arg;
  for (Nat k = 1; k <= horizon; ++k) {
    R v = below / R(long(k));
    if (v > best) {
      best = v;
      arg = {k};
    } else if (v == best) {
      arg.push_back(k);
    }
    below += sigma.point_mass(k);
  }
  return arg;
}

struct WaldWitness {
  CountableGame game = families::variant_wald();
  ChargeProfile sigma;
  std::vector<std::vector<SetExpr>> parts;
  R eps{1, 10};
  R eta{1, 100};
  ChargeProfile tau, kappa;
};

// Both sides of the symmetric construction: tau_i = eta*mixer + (1-eta)*mu_i, kappa_j on K_s in V_s.
WaldWitness wald_witness_instance() {
  WaldWitness c;
  Charge mu = half_even_odd();
  c.sigma = {mu, mu};
  std::vector<SetExpr> v{SetExpr::interval(1, 3), SetExpr::evens() & SetExpr::interval(4),
                         SetExpr::odds() & SetExpr::interval(4)};
  c.parts = {v, v};
  std::vector<Nat> k{2, 4, 5};
  Charge mixer = wald_mixer(k);
  std::map<Nat, R> atoms;
  for (std::size_t s = 0; s < v.size(); ++s) atoms[k[s]] += mu.eval(v[s]);
  for (auto it = atoms.begin(); it != atoms.end();)
    it = it->second.is_zero() ? atoms.erase(it) : std::next(it);
  Charge tau = convex_combine({{c.eta, mixer}, {R(1) - c.eta, mu}});
  c.tau = {tau, tau};
  c.kappa = {Charge::atoms(atoms), Charge::atoms(atoms)};
  return c;
}

}  // namespace

TEST(Perfection, CarrierExamples) {
  Charge g = Charge::geometric(1, R(1, 2));
  EXPECT_TRUE(carrier_includes(g, {SetExpr::singleton(1), SetExpr::singleton(2), SetExpr::evens()}));
  EXPECT_FALSE(carrier_includes(Charge::dirac(1), {SetExpr::singleton(2)}));
  EXPECT_FALSE(carrier_includes(uf(SetExpr::evens()), {SetExpr::odds()}));
  EXPECT_THROW(CarrierSpec({{SetExpr::empty()}}), InvalidArgument);
}

// Union of carriers under strict mixing, on random pairs and generators.
TEST(Perfection, CarrierOfMixture) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    Charge a = random_charge(rng), b = random_charge(rng);
    SetExpr g = random_set(rng, 3);
    if (g.is_empty()) continue;
    Charge m = convex_combine({{R(1, 3), a}, {R(2, 3), b}});
    EXPECT_EQ(carrier_positive(m, g), carrier_positive(a, g) || carrier_positive(b, g));
  }
}

TEST(Perfection, NeighborhoodExamples) {
  std::vector<SetExpr> cells{SetExpr::singleton(1), SetExpr::singleton(2), SetExpr::interval(3)};
  TychonovNbhd n({Charge::dirac(2)}, {cells}, R(1, 2));
  EXPECT_TRUE(nbhd_contains(n, {Charge::dirac(2)}));
  EXPECT_FALSE(nbhd_contains(n, {Charge::dirac(1)}));
  EXPECT_THROW(TychonovNbhd({Charge::dirac(2)}, {{SetExpr::interval(1, 3), SetExpr::interval(3)}}, R(1)),
               InvariantViolation);
  EXPECT_THROW(TychonovNbhd({Charge::dirac(2)}, {{SetExpr::interval(1, 3)}}, R(1)), InvariantViolation);
  WaldWitness c = wald_witness_instance();
  TychonovNbhd w(c.sigma, c.parts, c.eps);
  EXPECT_TRUE(nbhd_contains(w, c.kappa));
  EXPECT_TRUE(nbhd_contains(w, c.tau));
}

TEST(Perfection, WaldMixerExamples) {
  EXPECT_EQ(wald_oracle(wald_mixer({2}), 2000), (std::vector<Nat>{2}));
  Charge m = wald_mixer({2, 3});
  EXPECT_EQ(wald_oracle(m, 2000), (std::vector<Nat>{2, 3}));
  EXPECT_TRUE(m.is_probability());
  for (Nat k = 1; k <= 300; ++k) EXPECT_GT(m.point_mass(k).sign(), 0);
  EXPECT_THROW(wald_mixer({1, 3}), InvalidK);
  EXPECT_THROW(wald_mixer({3, 3}), InvalidK);
  EXPECT_THROW(wald_mixer({}), InvalidK);
}

TEST(Perfection, WaldMixerRandomAgainstOracle) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    std::set<Nat> ks;
    for (int i = 0, n = 1 + int(rng() % 5); i < n; ++i) ks.insert(2 + rng() % 49);
    std::vector<Nat> k(ks.begin(), ks.end());
    Charge m = wald_mixer(k);
    ASSERT_TRUE(m.is_probability());
    ASSERT_EQ(wald_oracle(m, 1000), k);
  }
}

TEST(Perfection, ThresholdsAndRegions) {
  EXPECT_EQ(br_threshold(2), R(5, 11));
  for (Nat k = 2; k < 500; ++k) EXPECT_GT(br_threshold(k), br_threshold(k + 1));
  BrRegion r = br_region(R(5, 11));
  EXPECT_EQ(r.actions, (std::vector<Nat>{2, 3}));
  EXPECT_EQ(r.value, R(1, 11));
  EXPECT_EQ(br_region(R(2, 5)).actions, (std::vector<Nat>{3}));
  for (Nat k = 2; k <= 100; ++k) {
    R p = br_threshold(k);
    R uk = (p - (R(1) - p) / R(long(k))) / R(long(k));
    R uk1 = (p - (R(1) - p) / R(long(k + 1))) / R(long(k + 1));
    ASSERT_EQ(uk, uk1);
    // Every other j up to well past p/uk is strictly worse.
    for (Nat j = 2; j <= 4 * k + 10; ++j) {
      if (j == k || j == k + 1) continue;
      R uj = (p - (R(1) - p) / R(long(j))) / R(long(j));
      ASSERT_LT(uj, uk);
    }
    ASSERT_EQ(br_region(p).actions, (std::vector<Nat>{k, k + 1}));
  }
  EXPECT_THROW(br_region(R(0)), InvalidArgument);
}

TEST(Perfection, HazyExamples) {
  EXPECT_EQ(hazy_filter_test(half_even_odd()).kind, HazyResult::Kind::Hazy);
  EXPECT_EQ(hazy_filter_test(uf(SetExpr::ap(1, 3))).kind, HazyResult::Kind::Hazy);
  std::vector<SetExpr> e{SetExpr::ap(0, 3), SetExpr::ap(1, 3), SetExpr::ap(2, 3)};
  Charge three = convex_combine({{R(1, 3), uf(e[0])}, {R(1, 3), uf(e[1])}, {R(1, 3), uf(e[2])}});
  HazyResult h = hazy_filter_test(three);
  ASSERT_EQ(h.kind, HazyResult::Kind::NotHazy);
  for (const auto& m : *h.masses) EXPECT_GT(m.sign(), 0);
  SetExpr u = (*h.partition)[0] | (*h.partition)[1] | (*h.partition)[2];
  EXPECT_TRUE(u.same_set(SetExpr::naturals()));
  EXPECT_THROW(hazy_filter_test(convex_combine({{R(1, 2), Charge::dirac(1)}, {R(1, 2), uf(e[0])}})), NotDiffuse);
}

// Oracle: every 3-coloring of the residues mod 12 that each component decides.
TEST(Perfection, HazyAgainstResidueOracle) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 1 + int(rng() % 4);
    std::vector<std::pair<R, Charge>> parts;
    std::vector<std::vector<int>> cores;
    for (int i = 0; i < n; ++i) {
      Nat r = rng() % 12;
      parts.emplace_back(R(1, n), uf(SetExpr::ap(r == 0 ? 12 : r, 12)));
      cores.push_back({int(r)});
    }
    Charge k = convex_combine(parts);
    bool split = false;
    std::vector<int> color(12, 0);
    for (long code = 0; code < 531441 && !split; ++code) {
      long c = code;
      for (int r = 0; r < 12; ++r, c /= 3) color[r] = int(c % 3);
      int mass[3] = {0, 0, 0};
      for (const auto& core : cores) mass[color[core[0]]]++;
      split = mass[0] && mass[1] && mass[2];
    }
    HazyResult h = hazy_filter_test(k);
    EXPECT_EQ(h.kind == HazyResult::Kind::NotHazy, split) << k.str();
    if (!split) EXPECT_EQ(h.kind, HazyResult::Kind::Hazy);
  }
}

TEST(Perfection, TwinsExamples) {
  EXPECT_EQ(twins_test(UltrafilterBase({SetExpr::evens()}), UltrafilterBase({SetExpr::odds()})).kind,
            TwinsResult::Kind::Twins);
  auto nt = twins_test(UltrafilterBase({SetExpr::ap(0, 4)}), UltrafilterBase({SetExpr::ap(2, 4)}));
  ASSERT_EQ(nt.kind, TwinsResult::Kind::NotTwins);
  EXPECT_TRUE(nt.x->same_set(SetExpr::ap(0, 4)));
  EXPECT_TRUE(nt.y->same_set(SetExpr::ap(2, 4)));
  EXPECT_EQ(twins_test(UltrafilterBase({SetExpr::ap(1, 5)}), UltrafilterBase({SetExpr::ap(1, 5)})).kind,
            TwinsResult::Kind::Twins);
}

// Oracle: scan windows {k, k+1} directly; NotTwins witnesses must be forced and window-free.
TEST(Perfection, TwinsAgainstWindowScan) {
  static const Nat mods[] = {1, 2, 3, 4, 6, 12};
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    auto base = [&] {
      Nat m = mods[rng() % 6];
      std::vector<SetExpr> g{SetExpr::ap(rng() % m, m)};
      if (rng() % 2) g.push_back(SetExpr::interval(1 + rng() % 20));
      return UltrafilterBase(g);
    };
    UltrafilterBase a = base(), b = base();
    const SetExpr &x = a.core(), &y = b.core();
    auto meets = [](const SetExpr& s, Nat k) { return s.contains(k) || s.contains(k + 1); };
    bool late = false;
    for (Nat k = 200; k < 224; ++k) late = late || (meets(x, k) && meets(y, k));
    TwinsResult t = twins_test(a, b);
    ASSERT_EQ(t.kind == TwinsResult::Kind::Twins, late);
    if (!late) {
      for (Nat k = 1; k < 300; ++k) ASSERT_FALSE(meets(*t.x, k) && meets(*t.y, k));
      EXPECT_TRUE(almost_equal(*t.x, x));
      EXPECT_TRUE(almost_equal(*t.y, y));
    }
  }
}

TEST(Perfection, RestrictedIsoExamples) {
  Charge zeta = Charge::atoms({{1, R(1, 4)}, {2, R(1, 4)}});
  RestrictedIso iso = restricted_iso(zeta);
  EXPECT_EQ(iso.k, R(1, 2));
  EXPECT_EQ(iso.phi, Charge::atoms({{1, R(1, 2)}, {2, R(1, 2)}}));
  EXPECT_EQ(iso.forward(Charge::dirac(3)), Charge::atoms({{1, R(1, 4)}, {2, R(1, 4)}, {3, R(1, 2)}}));
  EXPECT_THROW(restricted_iso(Charge::dirac(1)), MassOutOfRange);
  EXPECT_THROW(restricted_iso(Charge()), MassOutOfRange);
}

TEST(Perfection, RestrictedIsoRoundtrip) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    Charge z = random_charge(rng).scaled(R(1 + long(rng() % 8), 10));
    RestrictedIso iso = restricted_iso(z);
    Charge psi = random_charge(rng);
    Charge rho = iso.forward(psi);
    ASSERT_TRUE(rho.is_probability());
    std::vector<SetExpr> probes;
    for (int s = 0; s < 10; ++s) probes.push_back(random_set(rng, 2));
    ASSERT_TRUE(iso.inverse(rho).agrees_on(psi, probes)) << trial;
    for (const SetExpr& e : probes) {
      ASSERT_GE(rho.eval(e), z.eval(e));
    }
  }
}

TEST(Perfection, RestrictedNashDegenerate) {
  FiniteGame gp = FiniteGame::bimatrix({{0, 0}, {0, 1}}, {{0, 0}, {0, 1}});
  CountableGame g = embed_finite(gp);
  std::vector<Charge> zero{Charge(), Charge()};
  EXPECT_EQ(restricted_nash_sufficient(g, zero, {Charge::dirac(2), Charge::dirac(2)}, 10, R(1, 100)).verdict,
            Verdict::Holds);
  FiniteGame dom = FiniteGame::bimatrix({{1, 1}, {0, 0}}, {{1, 0}, {1, 0}});
  EXPECT_EQ(restricted_nash_sufficient(embed_finite(dom), zero, {Charge::dirac(2), Charge::dirac(1)}, 10, R(1, 100))
                .verdict,
            Verdict::Fails);
}

// Floors built as in the countably additive characterization: mu(k) = min(gamma(k), d) below L.
TEST(Perfection, RestrictedNashFromWitness) {
  SimpleFunction u = SimpleFunction::indicator({SetExpr::singleton(1), SetExpr::singleton(1)});
  std::vector<ActionSpace> nn{ActionSpace::naturals(), ActionSpace::naturals()};
  CountableGame g("coordination", nn, {PayoffSpec::simple(nn, u), PayoffSpec::simple(nn, u)});
  R eta(1, 20), d(1, 20);
  Nat big_l = 4;
  Charge geom = Charge::geometric(1, R(1, 2));
  Charge rho = convex_combine({{R(1) - eta, Charge::dirac(1)}, {eta, geom}});
  std::map<Nat, R> floor_atoms;
  for (Nat k = 1; k < big_l; ++k) floor_atoms[k] = min(rho.point_mass(k), d);
  Charge zeta(floor_atoms, {{big_l, eta * R(1, 2) * R(1, 2).pow(big_l - 1), R(1, 2)}}, {});
  auto r = restricted_nash_sufficient(g, {zeta, zeta}, {rho, rho}, 20, R(1, 100));
  EXPECT_EQ(r.verdict, Verdict::Holds);
  RestrictedIso iso = restricted_iso(zeta);
  EXPECT_TRUE(iso.forward(iso.inverse(rho)).agrees_on(rho, {SetExpr::evens(), SetExpr::interval(4)}));
}

TEST(Perfection, VariantWaldCarrierWitness) {
  WaldWitness c = wald_witness_instance();
  TychonovNbhd w(c.sigma, c.parts, c.eps);
  std::vector<std::vector<SetExpr>> specs[] = {
      {{SetExpr::singleton(1), SetExpr::singleton(2), SetExpr::evens()}, {SetExpr::odds()}},
      {{SetExpr::ap(3, 7)}, {SetExpr::interval(100), SetExpr::finite({5, 9})}},
      {{SetExpr::interval(1000)}, {SetExpr::ap(2, 12) & SetExpr::interval(50)}}};
  for (const auto& s : specs) {
    WitnessReport r = verify_perfection_witness(c.game, c.sigma, CarrierSpec(s), w, c.tau, c.kappa, 40, R(1, 1000));
    EXPECT_EQ(r.verdict, Verdict::Holds);
    // A true verdict survives any larger tolerance.
    for (R tol : {R(1, 10), R(1), R(5)})
      EXPECT_EQ(verify_perfection_witness(c.game, c.sigma, CarrierSpec(s), w, c.tau, c.kappa, 40, tol).verdict,
                Verdict::Holds);
  }
  // kappa on a non-best-response point fails.
  ChargeProfile bad = c.kappa;
  bad[1] = convex_combine({{R(1, 2), Charge::dirac(4)}, {R(1, 2), Charge::dirac(6)}});
  auto r = verify_perfection_witness(c.game, c.sigma, CarrierSpec({{}, {}}), w, c.tau, bad, 40, R(1, 1000));
  EXPECT_EQ(r.verdict, Verdict::Fails);
}

TEST(Perfection, ReducedGameWitness) {
  FiniteGame gp = FiniteGame::bimatrix({{0, 0}, {0, 1}}, {{0, 0}, {0, 1}});
  CountableGame g = embed_finite(gp);
  ChargeProfile sigma{Charge::dirac(2), Charge::dirac(2)};
  std::vector<SetExpr> cells{SetExpr::singleton(1), SetExpr::interval(2)};
  TychonovNbhd n(sigma, {cells, cells}, R(1, 10));
  Charge t = Charge::atoms({{1, R(1, 20)}, {2, R(19, 20)}});
  CarrierSpec all({{SetExpr::singleton(1), SetExpr::singleton(2)}, {SetExpr::singleton(1), SetExpr::singleton(2)}});
  EXPECT_EQ(verify_perfection_witness(g, sigma, all, n, {t, t}, sigma, 10, R(1, 100)).verdict, Verdict::Holds);
  // (U,L) is Nash but the tremble makes R strictly better.
  ChargeProfile ul{Charge::dirac(1), Charge::dirac(1)};
  TychonovNbhd m(ul, {cells, cells}, R(1, 10));
  Charge s = Charge::atoms({{1, R(19, 20)}, {2, R(1, 20)}});
  EXPECT_EQ(verify_perfection_witness(g, ul, all, m, {s, s}, ul, 10, R(1, 100)).verdict, Verdict::Fails);
}

TEST(Perfection, Example33) {
  CountableGame g = families::example_3_3();
  std::vector<Charge> diffuse{Charge::ultrafilter(UltrafilterBase()), uf(SetExpr::evens()), half_even_odd()};
  for (long num = 0; num <= 20; ++num) {
    R p(num, 20);
    std::map<Nat, R> row;
    if (!p.is_zero()) row[1] = p;
    if (p != R(1)) row[2] = R(1) - p;
    Charge k1 = Charge::atoms(row);
    for (const auto& k2 : diffuse) {
      NashReport r = nash_check(g, {k1, k2}, 50, R(1, 1000));
      ASSERT_EQ(r.verdict, p >= R(1, 2) ? Verdict::Holds : Verdict::Fails) << p.str();
    }
    // An atom for player 2 breaks equilibrium for every p.
    Charge k2 = convex_combine({{R(1, 2), Charge::dirac(3)}, {R(1, 2), diffuse[0]}});
    ASSERT_EQ(nash_check(g, {k1, k2}, 50, R(1, 1000)).verdict, Verdict::Fails);
  }
  // Perfection at p < 1 fails once the carrier forces a column atom.
  Charge mu = diffuse[1];
  for (long num = 10; num < 20; ++num) {
    R p(num, 20);
    Charge k1 = Charge::atoms({{1, p}, {2, R(1) - p}});
    ChargeProfile sigma{k1, mu};
    TychonovNbhd n(sigma, {{SetExpr::singleton(1), SetExpr::interval(2)}, {SetExpr::naturals()}}, R(1, 100));
    Charge t2 = convex_combine({{R(1, 1000), Charge::geometric(1, R(1, 2))}, {R(999, 1000), mu}});
    CarrierSpec spec({{}, {SetExpr::singleton(1)}});
    auto r = verify_perfection_witness(g, sigma, spec, n, {k1, t2}, sigma, 50, R(1, 1000));
    EXPECT_EQ(r.verdict, Verdict::Fails);
    EXPECT_EQ(*r.best_responses[0].improving, Nat{1});
  }
}

TEST(Perfection, MissingTailBound) {
  UniformLimit ul;
  ul.approximant = [](Nat n) {
    std::vector<SimpleFunction::Cell> cells{{{SetExpr::interval(n + 1), SetExpr::naturals()}, R(0)}};
    for (Nat k = 1; k <= n; ++k) cells.push_back({{SetExpr::singleton(k), SetExpr::naturals()}, R(1, long(k))});
    return SimpleFunction(2, cells);
  };
  ul.bound = [](Nat n) { return R(1, long(n + 1)); };
  ul.point = [](const std::vector<Nat>& a) { return R(1, long(a[0])); };
  std::vector<ActionSpace> nn{ActionSpace::naturals(), ActionSpace::naturals()};
  PayoffSpec u = PayoffSpec::uniform_limit(nn, ul);
  CountableGame g("user", nn, {u, u});
  EXPECT_THROW(best_response_check(g, 0, Charge::dirac(1), {Charge::dirac(1), Charge::dirac(1)}, 10, R(1, 10)),
               MissingTailBound);
}

// A pure strategy against a tail-and-diffuse opponent: brackets are inexact, but T only races B.
TEST(Perfection, AtomicStrategyAgainstInexactBrackets) {
  CountableGame g = families::example_3_3();
  Charge t2 = convex_combine({{R(1, 1000), Charge::geometric(1, R(1, 2))}, {R(999, 1000), uf(SetExpr::evens())}});
  BrCheck t = best_response_check(g, 0, Charge::dirac(1), {Charge::dirac(1), t2}, 10, R(1, 1000));
  EXPECT_EQ(t.verdict, Verdict::Holds);
  EXPECT_FALSE(t.value.exact());
  BrCheck b = best_response_check(g, 0, Charge::dirac(2), {Charge::dirac(1), t2}, 10, R(1, 1000));
  EXPECT_EQ(b.verdict, Verdict::Fails);
  EXPECT_EQ(*b.improving, Nat{1});
  // Two atoms with exactly tied payoffs.
  CountableGame h = families::hazy_filter_game();
  R p = br_threshold(5);
  Charge tau1 = Charge::atoms({{1, p}, {2, R(1) - p}});
  Charge rho = Charge::atoms({{5, R(1, 3)}, {6, R(2, 3)}});
  EXPECT_EQ(best_response_check(h, 1, rho, {tau1, rho}, 40, R(1, 1000)).verdict, Verdict::Holds);
  Charge off = Charge::atoms({{5, R(1, 3)}, {7, R(2, 3)}});
  EXPECT_EQ(best_response_check(h, 1, off, {tau1, off}, 40, R(1, 1000)).verdict, Verdict::Fails);
}
