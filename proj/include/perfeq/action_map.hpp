#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "perfeq/setexpr.hpp"

namespace perfeq {

/// Map from the naturals to naturals: identity, or a finite exception table over an
/// eventually periodic residue rule. Non-identity maps have finite image.
class NatMap {
 public:
  static NatMap identity() { return NatMap(); }
  static NatMap constant(Nat target) { return rule(1, {target}, {}); }

  /// n -> exceptions[n] if present, else targets[n % period].
  static NatMap rule(Nat period, std::vector<Nat> targets, std::map<Nat, Nat> exceptions) {
    if (period == 0 || targets.size() != period)
      throw NonMeasurableMap("rule needs one target per residue class");
    for (Nat t : targets)
      if (t == 0) throw InvalidArgument("targets are naturals >= 1");
    for (auto [k, t] : exceptions)
      if (k == 0 || t == 0) throw InvalidArgument("exception keys and targets are naturals >= 1");
    NatMap m;
    m.identity_ = false;
    m.period_ = period;
    m.targets_ = std::move(targets);
    m.exceptions_ = std::move(exceptions);
    return m;
  }

  bool is_identity() const { return identity_; }
  Nat period() const { return period_; }
  const std::vector<Nat>& targets() const { return targets_; }
  const std::map<Nat, Nat>& exceptions() const { return exceptions_; }

  Nat operator()(Nat n) const {
    if (identity_) return n;
    if (auto it = exceptions_.find(n); it != exceptions_.end()) return it->second;
    return targets_[n % period_];
  }

  /// Sorted image; only for non-identity maps.
  std::vector<Nat> image() const {
    if (identity_) throw InvalidArgument("identity map has infinite image");
    std::vector<Nat> out;
    for (auto [k, t] : exceptions_) out.push_back(t);
    // A residue class contributes only if some non-exceptional n falls in it.
    for (Nat r = 0; r < period_; ++r)
      if (!fiber_rule(r).is_empty()) out.push_back(targets_[r]);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  SetExpr fiber(Nat t) const {
    if (identity_) return SetExpr::singleton(t);
    std::vector<Nat> ex;
    for (auto [k, v] : exceptions_)
      if (v == t) ex.push_back(k);
    SetExpr out = SetExpr::finite(ex);
    for (Nat r = 0; r < period_; ++r)
      if (targets_[r] == t) out = out | fiber_rule(r);
    return out;
  }

  SetExpr preimage(const SetExpr& g) const {
    if (identity_) return g;
    SetExpr out = SetExpr::empty();
    for (Nat t : image())
      if (g.contains(t)) out = out | fiber(t);
    return out;
  }

  /// (after o this)(n) = after(this(n)).
  NatMap then(const NatMap& after) const {
    if (identity_) return after;
    if (after.identity_) return *this;
    std::vector<Nat> targets;
    for (Nat t : targets_) targets.push_back(after(t));
    std::map<Nat, Nat> ex;
    for (auto [k, t] : exceptions_) ex[k] = after(t);
    return rule(period_, std::move(targets), std::move(ex));
  }

  std::string str() const {
    if (identity_) return "identity";
    std::string s = "rule(period=" + std::to_string(period_) + ", [";
    for (Nat r = 0; r < period_; ++r) s += (r ? ", " : "") + std::to_string(r) + "->" + std::to_string(targets_[r]);
    s += "], exceptions{";
    bool first = true;
    for (auto [k, t] : exceptions_) {
      s += (first ? "" : ", ") + std::to_string(k) + "->" + std::to_string(t);
      first = false;
    }
    return s + "})";
  }

 private:
  SetExpr fiber_rule(Nat r) const {
    std::vector<Nat> keys;
    for (auto [k, t] : exceptions_) keys.push_back(k);
    SetExpr cls = period_ == 1 ? SetExpr::naturals() : SetExpr::ap(r, period_);
    return cls - SetExpr::finite(keys);
  }

  bool identity_ = true;
  Nat period_ = 1;
  std::vector<Nat> targets_;
  std::map<Nat, Nat> exceptions_;
};

/// Accepts `identity`, `map{1->2, 2->2, 3->1, *->1}` (`*` sets the target of unlisted n;
/// without it unlisted n follow the largest key), and
/// `rule(period=P, [r->t, ...], exceptions{k->t, ...})` where `even`/`odd` name residues 0/1.
inline NatMap parse_nat_map(std::string_view text) {
  detail::Cursor c(text);
  if (c.accept_word("identity")) {
    if (!c.done()) c.fail("trailing input");
    return NatMap::identity();
  }
  auto arrow = [&] {
    if (!c.accept('-') || !c.accept('>')) c.fail("expected '->'");
  };
  if (c.accept_word("map")) {
    c.expect('{');
    std::map<Nat, Nat> table;
    std::optional<Nat> fallback;
    if (!c.accept('}')) {
      do {
        if (c.accept('*')) {
          arrow();
          fallback = c.nat();
        } else {
          Nat k = c.nat();
          arrow();
          table[k] = c.nat();
        }
      } while (c.accept(','));
      c.expect('}');
    }
    if (!c.done()) c.fail("trailing input");
    if (table.empty() && !fallback) c.fail("empty map");
    if (!fallback) fallback = table.rbegin()->second;
    return NatMap::rule(1, {*fallback}, std::move(table));
  }
  if (c.accept_word("rule")) {
    c.expect('(');
    if (!c.accept_word("period")) c.fail("expected period=");
    c.expect('=');
    Nat period = c.nat();
    if (period == 0) c.fail("period must be >= 1");
    c.expect(',');
    c.expect('[');
    std::vector<Nat> targets(period, 0);
    do {
      Nat r;
      if (c.accept_word("even")) r = 0;
      else if (c.accept_word("odd")) r = 1;
      else r = c.nat();
      if (r >= period) c.fail("residue out of range");
      arrow();
      targets[r] = c.nat();
    } while (c.accept(','));
    c.expect(']');
    std::map<Nat, Nat> ex;
    if (c.accept(',')) {
      if (!c.accept_word("exceptions")) c.fail("expected exceptions{...}");
      c.expect('{');
      if (!c.accept('}')) {
        do {
          Nat k = c.nat();
          arrow();
          ex[k] = c.nat();
        } while (c.accept(','));
        c.expect('}');
      }
    }
    c.expect(')');
    if (!c.done()) c.fail("trailing input");
    for (Nat t : targets)
      if (t == 0) c.fail("every residue class needs a target");
    return NatMap::rule(period, std::move(targets), std::move(ex));
  }
  c.fail("expected identity, map{...} or rule(...)");
}

}  // namespace perfeq
