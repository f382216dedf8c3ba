#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "perfeq/action_map.hpp"
#include "perfeq/rational.hpp"
#include "perfeq/setexpr.hpp"

namespace perfeq {

/// Placeholder for any free ultrafilter containing every generator.
class UltrafilterBase {
 public:
  UltrafilterBase() : UltrafilterBase(std::vector<SetExpr>{}) {}
  explicit UltrafilterBase(std::vector<SetExpr> generators) : gens_(std::move(generators)) {
    core_ = SetExpr::naturals();
    for (const auto& g : gens_) {
      if (!g.is_infinite()) throw InvalidBase("generator " + g.str() + " is not infinite");
      core_ = core_ & g;
    }
    // The full intersection is the smallest finite intersection.
    if (!core_.is_infinite()) throw InvalidBase("generators lack the finite intersection property");
    core_ = SetExpr::from_normal_form(core_.normal_form());
  }

  const std::vector<SetExpr>& generators() const { return gens_; }
  const SetExpr& core() const { return core_; }

  /// 1 or 0 when the base forces E or its complement; nullopt otherwise.
  std::optional<bool> decide(const SetExpr& e) const {
    if (almost_subset(core_, e)) return true;
    if (almost_subset(core_, !e)) return false;
    return std::nullopt;
  }

  bool same_filter(const UltrafilterBase& o) const { return core_.same_set(o.core_); }

  std::string str() const {
    std::string s = "uf{";
    for (std::size_t i = 0; i < gens_.size(); ++i) s += (i ? ", " : "") + gens_[i].str();
    return s + "}";
  }

 private:
  std::vector<SetExpr> gens_;
  SetExpr core_;
};

/// Mass coeff * ratio^(k - start) on every k >= start.
struct GeometricTail {
  Nat start = 1;
  Rational coeff;
  Rational ratio;

  Rational at(Nat k) const { return k < start ? Rational(0) : coeff * ratio.pow(k - start); }
  Rational total() const { return coeff / (Rational(1) - ratio); }

  /// Exact mass on E, summed per residue class of E's normal form.
  Rational mass_on(const SetExpr& e) const {
    const NormalForm& nf = e.normal_form();
    Nat s = std::max(start, nf.threshold);
    Rational out;
    Rational one_minus = Rational(1) - ratio;
    // Consecutive members a..b contribute r^(a-start) (1 - r^(b-a+1)) / (1 - r).
    for (Nat k = start; k < s;) {
      if (!nf.contains(k)) {
        ++k;
        continue;
      }
      Nat b = k;
      while (b + 1 < s && nf.contains(b + 1)) ++b;
      out += ratio.pow(k - start) * (Rational(1) - ratio.pow(b - k + 1)) / one_minus;
      k = b + 1;
    }
    Rational pk = ratio.pow(s - start);
    Rational denom = Rational(1) - ratio.pow(nf.period);
    for (Nat j = 0; j < nf.period; ++j, pk *= ratio)
      if (nf.mask[(s + j) % nf.period]) out += pk / denom;
    return coeff * out;
  }

  friend bool operator==(const GeometricTail&, const GeometricTail&) = default;
};

struct DiffuseComponent {
  Rational weight;
  UltrafilterBase base;
};

/// Nonnegative finitely additive measure on the naturals: atoms plus geometric tails
/// (point masses add up), plus weighted ultrafilter placeholders.
/// Placeholders with equal base intersections are identified.
class Charge {
 public:
  static constexpr Nat kMaxMaterialize = Nat{1} << 16;

  Charge() = default;
  Charge(std::map<Nat, Rational> atoms, std::vector<GeometricTail> tails, std::vector<DiffuseComponent> diffuse)
      : atoms_(std::move(atoms)), tails_(std::move(tails)), diffuse_(std::move(diffuse)) {
    canonicalize();
  }

  static Charge dirac(Nat k) { return Charge({{k, Rational(1)}}, {}, {}); }
  static Charge atoms(std::map<Nat, Rational> a) { return Charge(std::move(a), {}, {}); }
  static Charge tail(Nat start, Rational coeff, Rational ratio) {
    return Charge({}, {GeometricTail{start, std::move(coeff), std::move(ratio)}}, {});
  }
  /// Probability with mass proportional to ratio^k on k >= start.
  static Charge geometric(Nat start, const Rational& ratio) {
    return Charge({}, {GeometricTail{start, Rational(1) - ratio, ratio}}, {});
  }
  static Charge ultrafilter(UltrafilterBase base) { return Charge({}, {}, {{Rational(1), std::move(base)}}); }
  static Charge ultrafilter(const SetExpr& generator) { return ultrafilter(UltrafilterBase({generator})); }

  const std::map<Nat, Rational>& atom_map() const { return atoms_; }
  const std::vector<GeometricTail>& tails() const { return tails_; }
  const std::vector<DiffuseComponent>& diffuse() const { return diffuse_; }

  Rational point_mass(Nat k) const {
    Rational m;
    if (auto it = atoms_.find(k); it != atoms_.end()) m = it->second;
    for (const auto& t : tails_) m += t.at(k);
    return m;
  }

  Rational countably_additive_mass() const {
    Rational m;
    for (const auto& [k, w] : atoms_) m += w;
    for (const auto& t : tails_) m += t.total();
    return m;
  }
  Rational diffuse_mass() const {
    Rational m;
    for (const auto& d : diffuse_) m += d.weight;
    return m;
  }
  Rational mass() const { return countably_additive_mass() + diffuse_mass(); }
  bool is_probability() const { return mass() == Rational(1); }
  bool is_diffuse() const { return atoms_.empty() && tails_.empty(); }
  bool is_zero() const { return atoms_.empty() && tails_.empty() && diffuse_.empty(); }
  /// Finitely many atoms and nothing else.
  bool is_finite_atomic() const { return tails_.empty() && diffuse_.empty(); }

  Rational eval(const SetExpr& e) const {
    Rational v;
    for (const auto& [k, w] : atoms_)
      if (e.contains(k)) v += w;
    for (const auto& t : tails_) v += t.mass_on(e);
    for (const auto& d : diffuse_) {
      auto dec = d.base.decide(e);
      if (!dec) throw UndeterminedByBase(e.str() + " is not decided by " + d.base.str());
      if (*dec) v += d.weight;
    }
    return v;
  }

  Charge countably_additive_part() const { return Charge(atoms_, tails_, {}); }
  Charge diffuse_part() const { return Charge({}, {}, diffuse_); }

  Charge scaled(const Rational& s) const { return linear_combination({{s, *this}}); }

  /// Signed combination; throws NegativeMass if the result is not a nonnegative measure.
  static Charge linear_combination(const std::vector<std::pair<Rational, Charge>>& parts) {
    std::map<Nat, Rational> atoms;
    std::vector<GeometricTail> tails;
    std::vector<DiffuseComponent> diffuse;
    for (const auto& [w, c] : parts) {
      if (w.is_zero()) continue;
      for (const auto& [k, m] : c.atoms_) atoms[k] += w * m;
      for (const auto& t : c.tails_) tails.push_back({t.start, w * t.coeff, t.ratio});
      for (const auto& d : c.diffuse_) diffuse.push_back({w * d.weight, d.base});
    }
    return Charge(std::move(atoms), std::move(tails), std::move(diffuse));
  }

  /// Same measure on every listed set and every singleton below `upto`.
  bool agrees_on(const Charge& o, const std::vector<SetExpr>& sets, Nat upto = 64) const {
    for (const auto& s : sets)
      if (eval(s) != o.eval(s)) return false;
    for (Nat k = 1; k <= upto; ++k)
      if (point_mass(k) != o.point_mass(k)) return false;
    return true;
  }

  friend bool operator==(const Charge& a, const Charge& b) {
    if (a.atoms_ != b.atoms_ || a.tails_ != b.tails_ || a.diffuse_.size() != b.diffuse_.size()) return false;
    for (std::size_t i = 0; i < a.diffuse_.size(); ++i)
      if (a.diffuse_[i].weight != b.diffuse_[i].weight || !a.diffuse_[i].base.same_filter(b.diffuse_[i].base))
        return false;
    return true;
  }

  std::string str() const {
    std::vector<std::string> parts;
    if (!atoms_.empty() || (tails_.empty() && diffuse_.empty())) {
      std::string s = "atoms{";
      bool first = true;
      for (const auto& [k, w] : atoms_) {
        s += (first ? "" : ", ") + std::to_string(k) + ":" + w.str();
        first = false;
      }
      parts.push_back(s + "}");
    }
    for (const auto& t : tails_)
      parts.push_back("tail(k0=" + std::to_string(t.start) + ",c=" + t.coeff.str() + ",r=" + t.ratio.str() + ")");
    if (!diffuse_.empty()) {
      std::string s = "diffuse[";
      for (std::size_t i = 0; i < diffuse_.size(); ++i)
        s += (i ? ", " : "") + std::string("(") + diffuse_[i].weight.str() + ", " + diffuse_[i].base.str() + ")";
      parts.push_back(s + "]");
    }
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? " + " : "") + parts[i];
    return out;
  }

 private:
  void canonicalize() {
    // Tails: one per ratio, starting at the latest start; earlier segments become atoms.
    std::map<Rational, std::vector<GeometricTail>> by_ratio;
    for (auto& t : tails_) {
      if (t.ratio.sign() <= 0 || t.ratio >= Rational(1)) throw InvalidArgument("tail ratio must lie in (0,1)");
      if (t.start == 0) throw InvalidArgument("tail start must be >= 1");
      if (!t.coeff.is_zero()) by_ratio[t.ratio].push_back(t);
    }
    std::vector<GeometricTail> merged;
    for (auto& [r, group] : by_ratio) {
      Nat last = 0;
      for (const auto& t : group) last = std::max(last, t.start);
      Rational coeff;
      for (const auto& t : group) {
        if (last - t.start > kMaxMaterialize)
          throw IncompatibleTails("tails with ratio " + r.str() + " start too far apart to merge");
        Rational pk(1);
        for (Nat k = t.start; k < last; ++k, pk *= r) atoms_[k] += t.coeff * pk;
        coeff += t.coeff * pk;
      }
      if (coeff.sign() < 0) throw NegativeMass("tail with ratio " + r.str() + " has negative coefficient");
      if (!coeff.is_zero()) merged.push_back({last, coeff, r});
    }
    tails_ = std::move(merged);

    for (auto it = atoms_.begin(); it != atoms_.end();) {
      if (it->second.is_zero()) {
        it = atoms_.erase(it);
        continue;
      }
      if (it->first == 0) throw InvalidArgument("atoms live on naturals >= 1");
      if (it->second.sign() < 0 && point_mass(it->first).sign() < 0)
        throw NegativeMass("negative mass at " + std::to_string(it->first));
      ++it;
    }

    std::vector<DiffuseComponent> comps;
    for (auto& d : diffuse_) {
      auto same = std::find_if(comps.begin(), comps.end(),
                               [&](const DiffuseComponent& c) { return c.base.same_filter(d.base); });
      if (same == comps.end()) comps.push_back(d);
      else same->weight += d.weight;
    }
    diffuse_.clear();
    for (auto& c : comps) {
      if (c.weight.sign() < 0) throw NegativeMass("negative diffuse weight on " + c.base.str());
      if (!c.weight.is_zero()) diffuse_.push_back(std::move(c));
    }
    std::sort(diffuse_.begin(), diffuse_.end(), [](const DiffuseComponent& a, const DiffuseComponent& b) {
      return a.base.core().str() < b.base.core().str();
    });
  }

  std::map<Nat, Rational> atoms_;
  std::vector<GeometricTail> tails_;
  std::vector<DiffuseComponent> diffuse_;
};

inline Rational charge_eval(const Charge& kappa, const SetExpr& e) { return kappa.eval(e); }

/// Atoms and tails are always decided, so positive mass there settles it without the diffuse part.
inline bool carrier_positive(const Charge& kappa, const SetExpr& e) {
  if (kappa.countably_additive_part().eval(e).sign() > 0) return true;
  return kappa.eval(e).sign() > 0;
}

struct Decomposition {
  Rational weight_ca;
  std::optional<Charge> countably_additive;
  Rational weight_d;
  std::optional<Charge> diffuse;
};

inline Decomposition decompose(const Charge& kappa) {
  Rational total = kappa.mass();
  if (total.is_zero()) throw InvalidArgument("cannot decompose the zero measure");
  Decomposition d;
  Rational ca = kappa.countably_additive_mass();
  d.weight_ca = ca / total;
  d.weight_d = kappa.diffuse_mass() / total;
  if (!ca.is_zero()) d.countably_additive = kappa.countably_additive_part().scaled(Rational(1) / ca);
  if (!d.weight_d.is_zero()) d.diffuse = kappa.diffuse_part().scaled(Rational(1) / kappa.diffuse_mass());
  return d;
}

/// Convex combination of probability charges. Tails of equal ratio merge exactly; tails of
/// different ratios are kept side by side, so no tail pair is ever incompatible.
inline Charge convex_combine(const std::vector<std::pair<Rational, Charge>>& parts) {
  Rational sum;
  for (const auto& [w, c] : parts) {
    if (w.sign() < 0) throw InvalidArgument("convex weights must be nonnegative");
    sum += w;
  }
  if (sum != Rational(1)) throw InvalidArgument("convex weights sum to " + sum.str());
  return Charge::linear_combination(parts);
}

inline Charge pushforward_charge(const Charge& kappa, const NatMap& phi) {
  if (phi.is_identity()) return kappa;
  std::map<Nat, Rational> atoms;
  for (Nat t : phi.image()) atoms[t] = kappa.eval(phi.fiber(t));
  return Charge::atoms(std::move(atoms));
}

namespace detail {

inline Rational parse_rational_token(Cursor& c) {
  c.skip_ws();
  std::string_view tok = c.until(",:)]}*+ ");
  if (tok.empty()) c.fail("expected rational");
  try {
    return Rational::parse(tok);
  } catch (const ParseError&) {
    c.fail("bad rational '" + std::string(tok) + "'");
  }
}

inline UltrafilterBase parse_uf(Cursor& c) {
  c.expect('{');
  std::vector<SetExpr> gens;
  if (!c.accept('}')) {
    do gens.push_back(parse_setexpr(c.until(",}")));
    while (c.accept(','));
    c.expect('}');
  }
  return UltrafilterBase(std::move(gens));
}

inline Charge parse_charge_term(Cursor& c) {
  if (c.accept_word("atoms")) {
    c.expect('{');
    std::map<Nat, Rational> atoms;
    if (!c.accept('}')) {
      do {
        Nat k = c.nat();
        c.expect(':');
        atoms[k] += parse_rational_token(c);
      } while (c.accept(','));
      c.expect('}');
    }
    return Charge::atoms(std::move(atoms));
  }
  if (c.accept_word("tail")) {
    c.expect('(');
    std::optional<Nat> k0;
    std::optional<Rational> coeff, ratio;
    do {
      if (c.accept_word("k0")) {
        c.expect('=');
        k0 = c.nat();
      } else if (c.accept_word("c")) {
        c.expect('=');
        coeff = parse_rational_token(c);
      } else if (c.accept_word("r")) {
        c.expect('=');
        ratio = parse_rational_token(c);
      } else {
        c.fail("expected k0=, c= or r=");
      }
    } while (c.accept(','));
    c.expect(')');
    if (!k0 || !coeff || !ratio) c.fail("tail needs k0, c and r");
    return Charge::tail(*k0, *coeff, *ratio);
  }
  if (c.accept_word("geom")) {
    c.expect('(');
    Nat k0 = c.nat();
    c.expect(',');
    Rational r = parse_rational_token(c);
    c.expect(')');
    return Charge::geometric(k0, r);
  }
  if (c.accept_word("delta")) {
    c.expect('(');
    Nat k = c.nat();
    c.expect(')');
    return Charge::dirac(k);
  }
  if (c.accept_word("uf")) return Charge::ultrafilter(parse_uf(c));
  if (c.accept_word("diffuse")) {
    if (!c.accept('[')) return Charge::ultrafilter(UltrafilterBase());
    std::vector<DiffuseComponent> comps;
    if (!c.accept(']')) {
      do {
        c.expect('(');
        Rational w = parse_rational_token(c);
        c.expect(',');
        if (!c.accept_word("uf")) c.fail("expected uf{...}");
        comps.push_back({w, parse_uf(c)});
        c.expect(')');
      } while (c.accept(','));
      c.expect(']');
    }
    return Charge({}, {}, std::move(comps));
  }
  c.fail("expected atoms{...}, tail(...), geom(...), delta(...), uf{...} or diffuse[...]");
}

}  // namespace detail

/// Sum of terms, each optionally scaled as `w*term`. `diffuse` alone is an ultrafilter with
/// no constraint beyond being free.
inline Charge parse_charge(std::string_view text) {
  detail::Cursor c(text);
  std::vector<std::pair<Rational, Charge>> parts;
  do {
    Rational w(1);
    char p = c.peek();
    if ((p >= '0' && p <= '9') || p == '-') {
      w = detail::parse_rational_token(c);
      c.expect('*');
    }
    parts.emplace_back(w, detail::parse_charge_term(c));
  } while (c.accept('+'));
  if (!c.done()) c.fail("trailing input");
  return Charge::linear_combination(parts);
}

/// Parse and require total mass exactly 1.
inline Charge parse_probability_charge(std::string_view text) {
  Charge k = parse_charge(text);
  if (!k.is_probability())
    throw InvariantViolation("charge '" + std::string(text) + "' has total mass " + k.mass().str());
  return k;
}

}  // namespace perfeq
