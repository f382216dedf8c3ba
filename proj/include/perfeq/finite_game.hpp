#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "perfeq/lp.hpp"
#include "perfeq/rational.hpp"

namespace perfeq {

using Strategy = std::vector<Rational>;
using MixedProfile = std::vector<Strategy>;
using PureProfile = std::vector<std::size_t>;

/// n-player normal-form game. Tensors are flattened row-major, player 0 most significant.
class FiniteGame {
 public:
  FiniteGame(std::vector<std::size_t> action_counts, std::vector<std::vector<Rational>> payoffs,
             std::vector<std::vector<std::string>> labels = {})
      : counts_(std::move(action_counts)), payoffs_(std::move(payoffs)), labels_(std::move(labels)) {
    if (counts_.size() < 2) throw ShapeMismatch("a game needs at least two players");
    std::size_t total = 1;
    for (auto c : counts_) {
      if (c == 0) throw ShapeMismatch("every player needs at least one action");
      total *= c;
    }
    if (payoffs_.size() != counts_.size()) throw ShapeMismatch("one payoff tensor per player");
    for (const auto& t : payoffs_)
      if (t.size() != total) throw ShapeMismatch("payoff tensor size differs from action product");
    if (labels_.empty()) {
      for (auto c : counts_) {
        std::vector<std::string> l;
        for (std::size_t a = 0; a < c; ++a) l.push_back(std::to_string(a + 1));
        labels_.push_back(std::move(l));
      }
    }
    if (labels_.size() != counts_.size()) throw ShapeMismatch("one label list per player");
    for (std::size_t i = 0; i < counts_.size(); ++i)
      if (labels_[i].size() != counts_[i]) throw ShapeMismatch("label count differs from action count");
  }

  /// Two-player game from per-player matrices u[row][col].
  static FiniteGame bimatrix(const std::vector<std::vector<Rational>>& u1,
                             const std::vector<std::vector<Rational>>& u2,
                             std::vector<std::vector<std::string>> labels = {}) {
    std::size_t rows = u1.size(), cols = rows ? u1[0].size() : 0;
    std::vector<std::vector<Rational>> t(2);
    for (std::size_t r = 0; r < rows; ++r) {
      if (u1[r].size() != cols || u2.size() != rows || u2[r].size() != cols)
        throw ShapeMismatch("bimatrix rows must agree");
      for (std::size_t c = 0; c < cols; ++c) {
        t[0].push_back(u1[r][c]);
        t[1].push_back(u2[r][c]);
      }
    }
    return FiniteGame({rows, cols}, std::move(t), std::move(labels));
  }

  std::size_t players() const { return counts_.size(); }
  std::size_t actions(std::size_t player) const { return counts_.at(player); }
  const std::vector<std::size_t>& action_counts() const { return counts_; }
  std::size_t profile_count() const { return payoffs_[0].size(); }
  const std::vector<std::vector<std::string>>& labels() const { return labels_; }
  const std::vector<Rational>& tensor(std::size_t player) const { return payoffs_.at(player); }

  std::size_t flat(const PureProfile& a) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < counts_.size(); ++i) idx = idx * counts_[i] + a[i];
    return idx;
  }
  PureProfile unflat(std::size_t idx) const {
    PureProfile a(counts_.size());
    for (std::size_t i = counts_.size(); i-- > 0;) {
      a[i] = idx % counts_[i];
      idx /= counts_[i];
    }
    return a;
  }
  const Rational& payoff(std::size_t player, const PureProfile& a) const {
    return payoffs_.at(player)[flat(a)];
  }

 private:
  std::vector<std::size_t> counts_;
  std::vector<std::vector<Rational>> payoffs_;
  std::vector<std::vector<std::string>> labels_;
};

inline void check_strategy(const Strategy& s, std::size_t n) {
  if (s.size() != n) throw ShapeMismatch("strategy length differs from action count");
  Rational sum;
  for (const auto& p : s) {
    if (p.sign() < 0) throw InvariantViolation("negative probability " + p.str());
    sum += p;
  }
  if (sum != Rational(1)) throw InvariantViolation("probabilities sum to " + sum.str());
}

inline void check_profile(const FiniteGame& g, const MixedProfile& p) {
  if (p.size() != g.players()) throw ShapeMismatch("profile has wrong number of players");
  for (std::size_t i = 0; i < g.players(); ++i) check_strategy(p[i], g.actions(i));
}

inline Strategy pure_strategy(std::size_t n, std::size_t a) {
  Strategy s(n, Rational(0));
  s.at(a) = Rational(1);
  return s;
}

inline Strategy uniform_strategy(std::size_t n) { return Strategy(n, Rational(1, static_cast<long>(n))); }

inline MixedProfile uniform_profile(const FiniteGame& g) {
  MixedProfile p;
  for (std::size_t i = 0; i < g.players(); ++i) p.push_back(uniform_strategy(g.actions(i)));
  return p;
}

/// (1 - w) a + w b, coordinatewise.
inline MixedProfile mix(const MixedProfile& a, const MixedProfile& b, const Rational& w) {
  MixedProfile out = a;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < a[i].size(); ++k) out[i][k] = (Rational(1) - w) * a[i][k] + w * b[i][k];
  return out;
}

namespace detail {

// Calls f(pure profile, weight) for every pure profile of positive weight.
// The coordinate `skip` (if < players) is left free and ranges over all actions with weight 1.
template <class F>
void for_each_weighted(const FiniteGame& g, const MixedProfile& p, std::size_t skip, F&& f) {
  PureProfile a(g.players());
  auto rec = [&](auto&& self, std::size_t i, const Rational& w) -> void {
    if (i == g.players()) {
      f(a, w);
      return;
    }
    for (std::size_t k = 0; k < g.actions(i); ++k) {
      if (i == skip) {
        a[i] = k;
        self(self, i + 1, w);
        continue;
      }
      if (p[i][k].is_zero()) continue;
      a[i] = k;
      self(self, i + 1, w * p[i][k]);
    }
  };
  rec(rec, 0, Rational(1));
}

}  // namespace detail

inline Rational expected_payoff(const FiniteGame& g, const MixedProfile& p, std::size_t player) {
  check_profile(g, p);
  if (player >= g.players()) throw ShapeMismatch("player index out of range");
  Rational v;
  detail::for_each_weighted(g, p, g.players(), [&](const PureProfile& a, const Rational& w) {
    v += w * g.payoff(player, a);
  });
  return v;
}

/// Payoff of each pure action of `player` against the others' strategies in p.
inline std::vector<Rational> pure_payoffs(const FiniteGame& g, std::size_t player, const MixedProfile& p) {
  check_profile(g, p);
  if (player >= g.players()) throw ShapeMismatch("player index out of range");
  std::vector<Rational> out(g.actions(player));
  detail::for_each_weighted(g, p, player, [&](const PureProfile& a, const Rational& w) {
    out[a[player]] += w * g.payoff(player, a);
  });
  return out;
}

/// Zero-based indices of the pure best responses.
inline std::vector<std::size_t> pure_best_responses(const FiniteGame& g, std::size_t player,
                                                    const MixedProfile& p) {
  auto v = pure_payoffs(g, player, p);
  Rational best = *std::max_element(v.begin(), v.end());
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < v.size(); ++a)
    if (v[a] == best) out.push_back(a);
  return out;
}

struct NashResult {
  bool nash = true;
  std::size_t player = 0;  // witness, when !nash
  std::size_t action = 0;
  Rational gain;
};

inline NashResult is_nash(const FiniteGame& g, const MixedProfile& p) {
  check_profile(g, p);
  for (std::size_t i = 0; i < g.players(); ++i) {
    auto v = pure_payoffs(g, i, p);
    Rational own;
    for (std::size_t a = 0; a < v.size(); ++a) own += p[i][a] * v[a];
    for (std::size_t a = 0; a < v.size(); ++a)
      if (v[a] > own) {
        std::size_t best = a;
        for (std::size_t b = a; b < v.size(); ++b)
          if (v[b] > v[best]) best = b;
        return {false, i, best, v[best] - own};
      }
  }
  return {};
}

struct DominanceResult {
  bool dominated = false;
  Strategy dominator;  // set when dominated
};

/// LP over (tau, slack): tau.u(., o) - s_o = sigma.u(., o) for every opposing pure profile o,
/// sum tau = 1, maximize sum s_o. Dominated iff the optimum is positive.
inline DominanceResult weak_dominance(const FiniteGame& g, std::size_t player, const Strategy& sigma) {
  if (player >= g.players()) throw ShapeMismatch("player index out of range");
  check_strategy(sigma, g.actions(player));
  std::size_t m = g.actions(player);
  std::size_t opp = g.profile_count() / m;
  std::vector<std::vector<Rational>> a;
  std::vector<Rational> b;
  std::size_t o = 0;
  for (std::size_t idx = 0; idx < g.profile_count(); ++idx) {
    PureProfile prof = g.unflat(idx);
    if (prof[player] != 0) continue;
    std::vector<Rational> row(m + opp);
    Rational rhs;
    for (std::size_t k = 0; k < m; ++k) {
      prof[player] = k;
      row[k] = g.payoff(player, prof);
      rhs += sigma[k] * row[k];
    }
    row[m + o] = Rational(-1);
    a.push_back(std::move(row));
    b.push_back(rhs);
    ++o;
  }
  std::vector<Rational> ones(m + opp);
  for (std::size_t k = 0; k < m; ++k) ones[k] = Rational(1);
  a.push_back(ones);
  b.push_back(Rational(1));
  std::vector<Rational> c(m + opp);
  for (std::size_t k = m; k < m + opp; ++k) c[k] = Rational(1);
  LpResult r = solve_lp(std::move(a), std::move(b), std::move(c));
  if (r.status != LpResult::Status::Optimal) throw InvariantViolation("dominance LP must be bounded and feasible");
  if (r.value.sign() <= 0) return {};
  return {true, Strategy(r.x.begin(), r.x.begin() + static_cast<long>(m))};
}

/// Two-player perfection via the bimatrix characterization: Nash with both strategies undominated.
inline bool perfect_decide_2p(const FiniteGame& g, const MixedProfile& p) {
  if (g.players() != 2) throw PlayerCountUnsupported("exact perfection decision needs exactly 2 players, got " +
                                                     std::to_string(g.players()));
  if (!is_nash(g, p).nash) return false;
  return !weak_dominance(g, 0, p[0]).dominated && !weak_dominance(g, 1, p[1]).dominated;
}

struct FixedPoint {
  MixedProfile profile;  // (1 - eps) base + eps anchor
  MixedProfile base;
  Rational residual;     // max restricted unilateral gain; 0 at an exact fixed point
  std::size_t restart = 0;
  std::size_t iterations = 0;
};

/// Best-response dynamics inside {(1 - eps) s + eps anchor}. Restart 0 starts at the anchor,
/// later restarts at seeded random pure corners. Ties keep the incumbent.
inline FixedPoint perturbed_br_fixed_point(const FiniteGame& g, const MixedProfile& anchor, const Rational& eps,
                                           std::size_t max_iters, std::size_t restarts = 16,
                                           std::uint64_t seed = 0) {
  check_profile(g, anchor);
  for (const auto& s : anchor)
    for (const auto& x : s)
      if (x.sign() <= 0) throw InvalidArgument("anchor must have full support");
  if (eps.sign() <= 0 || eps >= Rational(1)) throw InvalidArgument("epsilon must lie in (0,1)");
  std::mt19937_64 rng(seed);
  std::optional<Rational> best_residual;

  auto residual_of = [&](const MixedProfile& base, const MixedProfile& prof) {
    Rational worst;
    for (std::size_t i = 0; i < g.players(); ++i) {
      auto v = pure_payoffs(g, i, prof);
      Rational top = *std::max_element(v.begin(), v.end()), own;
      for (std::size_t a = 0; a < v.size(); ++a) own += base[i][a] * v[a];
      worst = max(worst, (Rational(1) - eps) * (top - own));
    }
    return worst;
  };

  for (std::size_t r = 0; r < std::max<std::size_t>(restarts, 1); ++r) {
    MixedProfile base = anchor;
    if (r > 0)
      for (std::size_t i = 0; i < g.players(); ++i) base[i] = pure_strategy(g.actions(i), rng() % g.actions(i));
    std::set<std::vector<std::string>> seen;
    for (std::size_t it = 0; it <= max_iters; ++it) {
      MixedProfile prof = mix(base, anchor, eps);
      std::vector<std::string> key;
      for (const auto& s : base)
        for (const auto& x : s) key.push_back(x.str());
      bool cycle = !seen.insert(key).second;
      MixedProfile next = base;
      bool moved = false;
      for (std::size_t i = 0; i < g.players(); ++i) {
        auto br = pure_best_responses(g, i, prof);
        bool keep = true;
        for (std::size_t a = 0; a < base[i].size(); ++a)
          if (base[i][a].sign() > 0 && !std::binary_search(br.begin(), br.end(), a)) keep = false;
        if (!keep) {
          next[i] = pure_strategy(g.actions(i), br.front());
          moved = true;
        }
      }
      if (!moved) return {prof, base, Rational(0), r, it};
      Rational res = residual_of(base, prof);
      if (!best_residual || res < *best_residual) best_residual = res;
      if (cycle) break;
      base = std::move(next);
    }
  }
  throw NonConvergence("best-response iteration did not settle", best_residual ? best_residual->str() : "unknown");
}

struct PerfectionEvidence {
  Rational epsilon;
  std::optional<MixedProfile> tremble;  // completely mixed, within epsilon, profile is a best response to it
};

struct CandidateResult {
  bool refuted = false;
  std::string reason;
  std::vector<PerfectionEvidence> evidence;
};

inline bool supports_are_best_responses(const FiniteGame& g, const MixedProfile& p, const MixedProfile& against) {
  for (std::size_t i = 0; i < g.players(); ++i) {
    auto br = pure_best_responses(g, i, against);
    for (std::size_t a = 0; a < p[i].size(); ++a)
      if (p[i][a].sign() > 0 && !std::binary_search(br.begin(), br.end(), a)) return false;
  }
  return true;
}

inline bool within(const MixedProfile& a, const MixedProfile& b, const Rational& eps) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < a[i].size(); ++k)
      if ((a[i][k] - b[i][k]).abs() > eps) return false;
  return true;
}

/// n-player search form. Refutations are exact; a Candidate is evidence, not a certificate.
inline CandidateResult perfect_candidate_np(const FiniteGame& g, const MixedProfile& p,
                                            const std::vector<Rational>& schedule, std::size_t restarts = 16,
                                            std::uint64_t seed = 0) {
  check_profile(g, p);
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (schedule[k].sign() <= 0 || schedule[k] >= Rational(1))
      throw InvalidArgument("schedule entries must lie in (0,1)");
    if (k && !(schedule[k] < schedule[k - 1])) throw InvalidArgument("schedule must be strictly decreasing");
  }
  CandidateResult out;
  if (auto n = is_nash(g, p); !n.nash) {
    out.refuted = true;
    out.reason = "not a Nash equilibrium: player " + std::to_string(n.player + 1) + " gains " + n.gain.str() +
                 " by action " + g.labels()[n.player][n.action];
    return out;
  }
  for (std::size_t i = 0; i < g.players(); ++i) {
    auto d = weak_dominance(g, i, p[i]);
    if (d.dominated) {
      out.refuted = true;
      out.reason = "player " + std::to_string(i + 1) + " uses a weakly dominated strategy";
      return out;
    }
  }
  std::mt19937_64 rng(seed);
  std::vector<MixedProfile> anchors{uniform_profile(g)};
  for (std::size_t r = 0; r < restarts; ++r) {
    MixedProfile mu;
    for (std::size_t i = 0; i < g.players(); ++i) {
      Strategy s(g.actions(i));
      long total = 0;
      std::vector<long> w(g.actions(i));
      for (auto& x : w) total += (x = 1 + static_cast<long>(rng() % 16));
      for (std::size_t a = 0; a < s.size(); ++a) s[a] = Rational(w[a], total);
      mu.push_back(std::move(s));
    }
    anchors.push_back(std::move(mu));
  }
  for (const auto& eps : schedule) {
    PerfectionEvidence ev{eps, std::nullopt};
    for (const auto& mu : anchors) {
      MixedProfile t = mix(p, mu, eps);
      if (supports_are_best_responses(g, p, t)) {
        ev.tremble = t;
        break;
      }
      try {
        auto fp = perturbed_br_fixed_point(g, mu, eps, 64, 1, seed);
        if (within(fp.profile, p, eps) && supports_are_best_responses(g, p, fp.profile)) {
          ev.tremble = fp.profile;
          break;
        }
      } catch (const NonConvergence&) {
      }
    }
    out.evidence.push_back(std::move(ev));
  }
  return out;
}

}  // namespace perfeq
