#pragma once

#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "perfeq/action_map.hpp"
#include "perfeq/families.hpp"
#include "perfeq/finite_game.hpp"
#include "perfeq/perfection.hpp"

namespace perfeq {

/// Per-player table from source action index to target action index (0-based).
class FiniteActionMap {
 public:
  FiniteActionMap(std::vector<std::vector<std::size_t>> table, const std::vector<std::size_t>& target_counts)
      : table_(std::move(table)), target_counts_(target_counts) {
    if (table_.size() != target_counts_.size()) throw ArityMismatch("one table per player");
    for (std::size_t i = 0; i < table_.size(); ++i) {
      std::vector<bool> hit(target_counts_[i], false);
      for (auto t : table_[i]) {
        if (t >= target_counts_[i]) throw InvalidArgument("target action out of range for player " + std::to_string(i + 1));
        hit[t] = true;
      }
      for (std::size_t t = 0; t < hit.size(); ++t)
        if (!hit[t])
          throw InvalidArgument("map is not onto: player " + std::to_string(i + 1) + " action " + std::to_string(t + 1) +
                                " has no preimage");
    }
  }

  static FiniteActionMap identity(const std::vector<std::size_t>& counts) {
    std::vector<std::vector<std::size_t>> t;
    for (auto c : counts) {
      std::vector<std::size_t> row(c);
      std::iota(row.begin(), row.end(), std::size_t{0});
      t.push_back(std::move(row));
    }
    return FiniteActionMap(std::move(t), counts);
  }

  std::size_t players() const { return table_.size(); }
  std::size_t operator()(std::size_t player, std::size_t a) const { return table_.at(player).at(a); }
  const std::vector<std::vector<std::size_t>>& table() const { return table_; }
  const std::vector<std::size_t>& target_counts() const { return target_counts_; }

  PureProfile apply(const PureProfile& a) const {
    PureProfile b(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) b[i] = (*this)(i, a[i]);
    return b;
  }

  /// (after o this).
  FiniteActionMap then(const FiniteActionMap& after) const {
    auto t = table_;
    for (std::size_t i = 0; i < t.size(); ++i)
      for (auto& x : t[i]) x = after(i, x);
    return FiniteActionMap(std::move(t), after.target_counts_);
  }

  MixedProfile pushforward(const MixedProfile& p) const {
    MixedProfile out;
    for (std::size_t i = 0; i < p.size(); ++i) {
      Strategy s(target_counts_[i]);
      for (std::size_t a = 0; a < p[i].size(); ++a) s[table_[i][a]] += p[i][a];
      out.push_back(std::move(s));
    }
    return out;
  }

  std::string str(std::size_t player) const {
    std::string s = "map{";
    for (std::size_t a = 0; a < table_[player].size(); ++a)
      s += (a ? ", " : "") + std::to_string(a + 1) + "->" + std::to_string(table_[player][a] + 1);
    return s + "}";
  }

 private:
  std::vector<std::vector<std::size_t>> table_;
  std::vector<std::size_t> target_counts_;
};

/// `map{1->a, 2->a, 3->b}` with keys and targets given as labels or 1-based indices.
inline std::vector<std::size_t> parse_finite_map(std::string_view text, const std::vector<std::string>& source,
                                                 const std::vector<std::string>& target) {
  detail::Cursor c(text);
  auto resolve = [&](std::string_view tok, const std::vector<std::string>& labels) -> std::size_t {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == tok) return i;
    if (!tok.empty() && tok.find_first_not_of("0123456789") == std::string_view::npos) {
      std::size_t v = std::stoul(std::string(tok));
      if (v >= 1 && v <= labels.size()) return v - 1;
    }
    c.fail("unknown action '" + std::string(tok) + "'");
  };
  if (!c.accept_word("map")) c.fail("expected map{...}");
  c.expect('{');
  std::vector<std::optional<std::size_t>> out(source.size());
  do {
    auto key = c.until("-,}");
    if (!c.accept('-') || !c.accept('>')) c.fail("expected '->'");
    auto val = c.until(",}");
    out[resolve(key, source)] = resolve(val, target);
  } while (c.accept(','));
  c.expect('}');
  if (!c.done()) c.fail("trailing input");
  std::vector<std::size_t> table;
  for (std::size_t a = 0; a < out.size(); ++a) {
    if (!out[a]) c.fail("no image for action " + source[a]);
    table.push_back(*out[a]);
  }
  return table;
}

inline bool respects_payoffs(const FiniteGame& source, const FiniteGame& target, const FiniteActionMap& phi) {
  if (source.players() != target.players() || phi.players() != source.players())
    throw ArityMismatch("source, target and map disagree on the number of players");
  for (std::size_t i = 0; i < source.players(); ++i) {
    if (phi.table()[i].size() != source.actions(i) || phi.target_counts()[i] != target.actions(i))
      throw ArityMismatch("map shape differs from the games for player " + std::to_string(i + 1));
  }
  for (std::size_t idx = 0; idx < source.profile_count(); ++idx) {
    PureProfile a = source.unflat(idx);
    PureProfile b = phi.apply(a);
    for (std::size_t i = 0; i < source.players(); ++i)
      if (source.payoff(i, a) != target.payoff(i, b)) return false;
  }
  return true;
}

struct RespectsReport {
  bool holds = true;
  bool exact = true;  // false: only checked on approximants with error-bound slack
  std::string note;
};

namespace detail {

struct CellView {
  std::vector<SimpleFunction::Cell> cells;
  Rational slack;
};

inline CellView cells_of(const PayoffSpec& u, Nat n) {
  if (const auto* ul = std::get_if<UniformLimit>(&u.body())) return {ul->approximant(n).cells(), ul->bound(n)};
  return {u.as_simple().cells(), Rational(0)};
}

/// Image of a source set under a per-player map, intersected with the target space.
inline SetExpr image_of(const SetExpr& s, const NatMap& m, const ActionSpace& target) {
  if (m.is_identity()) return s & target.set();
  std::vector<Nat> img;
  for (Nat t : m.image())
    if (!(m.fiber(t) & s).is_empty()) img.push_back(t);
  return SetExpr::finite(std::move(img)) & target.set();
}

}  // namespace detail

/// Per-player NatMaps from a countable game to another. Identity coordinates require equal spaces;
/// other coordinates map onto a finite target space.
inline void check_countable_map(const CountableGame& source, const CountableGame& target,
                                const std::vector<NatMap>& phi) {
  if (source.players() != target.players() || phi.size() != source.players())
    throw ArityMismatch("source, target and map disagree on the number of players");
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const auto& ss = source.spaces[i];
    const auto& ts = target.spaces[i];
    std::string who = "player " + std::to_string(i + 1);
    if (phi[i].is_identity()) {
      if (ss.size != ts.size) throw InvalidArgument(who + ": identity map between different action spaces");
      continue;
    }
    if (!ts.finite()) throw InvalidArgument(who + ": a map with finite image cannot be onto the naturals");
    std::vector<bool> hit(*ts.size, false);
    for (Nat t : phi[i].image()) {
      if (ss.finite() && (phi[i].fiber(t) & ss.set()).is_empty()) continue;
      if (t > *ts.size) {
        if (!(phi[i].fiber(t) & ss.set()).is_empty())
          throw InvalidArgument(who + ": action mapped to " + std::to_string(t) + " outside the target space");
        continue;
      }
      hit[t - 1] = true;
    }
    for (std::size_t t = 0; t < hit.size(); ++t)
      if (!hit[t]) throw InvalidArgument(who + ": target action " + std::to_string(t + 1) + " has no preimage");
  }
}

/// Exact for simple and matrix payoffs. Uniform limits are compared on approximants
/// 1, 2, 4, ..., up to `max_index` with slack bound_source(n) + bound_target(n).
inline RespectsReport respects_payoffs(const CountableGame& source, const CountableGame& target,
                                       const std::vector<NatMap>& phi, Nat max_index = 64) {
  check_countable_map(source, target, phi);
  RespectsReport out;
  std::size_t n_players = source.players();
  for (std::size_t i = 0; i < n_players; ++i) {
    bool limit = source.payoffs[i].is_uniform_limit() || target.payoffs[i].is_uniform_limit();
    if (limit) out.exact = false;
    for (Nat n = 1; n <= (limit ? max_index : 1); n *= 2) {
      auto src = detail::cells_of(source.payoffs[i], n);
      auto tgt = detail::cells_of(target.payoffs[i], n);
      Rational slack = src.slack + tgt.slack;
      for (const auto& c : src.cells) {
        std::vector<SetExpr> img;
        bool empty = false;
        for (std::size_t j = 0; j < n_players && !empty; ++j) {
          SetExpr s = c.rect[j] & source.spaces[j].set();
          img.push_back(detail::image_of(s, phi[j], target.spaces[j]));
          empty = img.back().is_empty();
        }
        if (empty) continue;
        for (const auto& d : tgt.cells) {
          bool meets = true;
          for (std::size_t j = 0; j < n_players && meets; ++j) meets = !(d.rect[j] & img[j]).is_empty();
          if (meets && (c.value - d.value).abs() > slack) {
            out.holds = false;
            out.note = "player " + std::to_string(i + 1) + " payoff " + c.value.str() + " maps onto " + d.value.str();
            return out;
          }
        }
      }
    }
  }
  if (!out.exact) out.note = "uniform-limit payoffs checked on approximants up to index " + std::to_string(max_index);
  return out;
}

inline ChargeProfile pushforward_profile(const ChargeProfile& kappa, const std::vector<NatMap>& phi) {
  if (kappa.size() != phi.size()) throw ArityMismatch("profile and map differ in player count");
  ChargeProfile out;
  for (std::size_t i = 0; i < kappa.size(); ++i) out.push_back(pushforward_charge(kappa[i], phi[i]));
  return out;
}

struct ReducedForm {
  FiniteGame game;
  FiniteActionMap map;
};

/// Merges actions that give every player the same payoff against every opposing pure profile.
inline ReducedForm reduced_form(const FiniteGame& g) {
  std::size_t n = g.players();
  std::vector<std::vector<std::size_t>> table(n);
  std::vector<std::vector<std::size_t>> keep(n);  // representative source action per class
  for (std::size_t i = 0; i < n; ++i) {
    auto equivalent = [&](std::size_t a, std::size_t b) {
      for (std::size_t idx = 0; idx < g.profile_count(); ++idx) {
        PureProfile p = g.unflat(idx);
        if (p[i] != a) continue;
        PureProfile q = p;
        q[i] = b;
        for (std::size_t j = 0; j < n; ++j)
          if (g.payoff(j, p) != g.payoff(j, q)) return false;
      }
      return true;
    };
    for (std::size_t a = 0; a < g.actions(i); ++a) {
      std::size_t cls = keep[i].size();
      for (std::size_t k = 0; k < keep[i].size(); ++k)
        if (equivalent(keep[i][k], a)) {
          cls = k;
          break;
        }
      if (cls == keep[i].size()) keep[i].push_back(a);
      table[i].push_back(cls);
    }
  }
  std::vector<std::size_t> counts;
  std::vector<std::vector<std::string>> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    counts.push_back(keep[i].size());
    for (auto a : keep[i]) labels[i].push_back(g.labels()[i][a]);
  }
  std::size_t total = 1;
  for (auto c : counts) total *= c;
  std::vector<std::vector<Rational>> tensors(n, std::vector<Rational>(total));
  FiniteGame shape(counts, tensors, labels);
  for (std::size_t idx = 0; idx < total; ++idx) {
    PureProfile b = shape.unflat(idx);
    PureProfile a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = keep[i][b[i]];
    for (std::size_t j = 0; j < n; ++j) tensors[j][idx] = g.payoff(j, a);
  }
  FiniteGame reduced(counts, std::move(tensors), std::move(labels));
  return {std::move(reduced), FiniteActionMap(std::move(table), counts)};
}

struct InvarianceReport {
  bool holds = true;
  std::vector<MixedProfile> images;
  std::string note;
};

/// Pushes each certified perfect equilibrium of `source` through phi and certifies the image in `target`.
inline InvarianceReport invariance_check_finite(const FiniteGame& source, const FiniteGame& target,
                                                const FiniteActionMap& phi,
                                                const std::vector<MixedProfile>& equilibria) {
  if (source.players() != 2 || target.players() != 2)
    throw UncertifiableInput("perfection is only certified for 2 players; n-player profiles stay candidates");
  if (!respects_payoffs(source, target, phi)) throw InvalidArgument("map does not respect payoffs");
  InvarianceReport out;
  for (std::size_t e = 0; e < equilibria.size(); ++e) {
    if (!perfect_decide_2p(source, equilibria[e]))
      throw InvalidArgument("equilibrium " + std::to_string(e + 1) + " is not a certified perfect equilibrium of the source");
    MixedProfile img = phi.pushforward(equilibria[e]);
    out.images.push_back(img);
    if (out.holds && !perfect_decide_2p(target, img)) {
      out.holds = false;
      out.note = "image of equilibrium " + std::to_string(e + 1) + " is not perfect in the target";
    }
  }
  return out;
}

/// Countable games have no finite certificate; the hazy-filter scenario covers this case.
[[noreturn]] inline void invariance_check_countable(const CountableGame& source, const CountableGame&,
                                                    const std::vector<NatMap>&, const std::vector<ChargeProfile>&) {
  throw NotApplicable("invariance of " + source.name +
                      " has no finite certificate; run scenario hazy_filter_game for the countable case");
}

}  // namespace perfeq
