#pragma once

#include <functional>
#include <map>
#include <numeric>
#include <memory>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "perfeq/charge.hpp"

namespace perfeq {

/// Action set {1..size}, or all naturals when size is empty.
struct ActionSpace {
  std::optional<Nat> size;
  static ActionSpace naturals() { return {}; }
  static ActionSpace finite(Nat n) { return {n}; }
  bool finite() const { return size.has_value(); }
  SetExpr set() const { return size ? SetExpr::interval(1, *size) : SetExpr::naturals(); }
};

using ChargeProfile = std::vector<Charge>;
using PartialProfile = std::vector<std::optional<Charge>>;

/// Finite sum of values on rectangles that partition the product of the naturals.
class SimpleFunction {
 public:
  struct Cell {
    std::vector<SetExpr> rect;
    Rational value;
  };

  /// Per-coordinate refinement blocks and, per product of blocks, a dense value array.
  struct ProductForm {
    std::vector<std::vector<SetExpr>> blocks;
    std::vector<Rational> values;  // row-major over blocks, coordinate 0 most significant
  };

  static constexpr std::size_t kMaxProductCells = std::size_t{1} << 22;

  SimpleFunction(std::size_t arity, std::vector<Cell> cells) : arity_(arity) {
    if (arity == 0) throw ShapeMismatch("simple function needs at least one coordinate");
    for (auto& c : cells) {
      if (c.rect.size() != arity) throw ShapeMismatch("rectangle arity differs from function arity");
      bool empty = false;
      for (const auto& s : c.rect) empty = empty || s.is_empty();
      if (!empty) cells_.push_back(std::move(c));
    }
    blocks_ = std::make_shared<const std::vector<std::vector<SetExpr>>>(build_blocks());
  }

  static SimpleFunction constant(std::size_t arity, const Rational& v) {
    return SimpleFunction(arity, {{std::vector<SetExpr>(arity, SetExpr::naturals()), v}});
  }

  /// value on the rectangle, 0 elsewhere.
  static SimpleFunction indicator(const std::vector<SetExpr>& rect, const Rational& value = Rational(1)) {
    std::vector<Cell> cells{{rect, value}};
    // Complement of a rectangle as a disjoint union: first coordinate that leaves it.
    for (std::size_t j = 0; j < rect.size(); ++j) {
      std::vector<SetExpr> r;
      for (std::size_t i = 0; i < rect.size(); ++i)
        r.push_back(i < j ? rect[i] : i == j ? !rect[i] : SetExpr::naturals());
      cells.push_back({r, Rational(0)});
    }
    return SimpleFunction(rect.size(), std::move(cells));
  }

  std::size_t arity() const { return arity_; }
  const std::vector<Cell>& cells() const { return cells_; }
  /// Per-coordinate refinement of the cell sets; every cell is a union of block products.
  const std::vector<std::vector<SetExpr>>& blocks() const { return *blocks_; }

  Rational value_at(const std::vector<Nat>& a) const {
    if (a.size() != arity_) throw ShapeMismatch("point arity differs from function arity");
    for (const auto& c : cells_) {
      bool in = true;
      for (std::size_t i = 0; i < arity_ && in; ++i) in = c.rect[i].contains(a[i]);
      if (in) return c.value;
    }
    throw InvariantViolation("no cell contains the point");
  }

 private:
  // Blocks of coordinate i: naturals grouped by which cell sets contain them.
  std::vector<SetExpr> refine(std::size_t i) const {
    std::vector<const NormalForm*> sets;
    for (const auto& c : cells_) {
      const NormalForm* nf = &c.rect[i].normal_form();
      if (std::find(sets.begin(), sets.end(), nf) == sets.end()) sets.push_back(nf);
    }
    Nat t = 1, p = 1;
    for (const auto* nf : sets) {
      t = std::max(t, nf->threshold);
      p = std::lcm(p, nf->period);
      if (p > NormalForm::kLimit) throw SetTooLarge("refinement period exceeds size limit");
    }
    std::size_t words = (sets.size() + 63) / 64;
    std::map<std::vector<std::uint64_t>, std::size_t> index;
    std::vector<NormalForm> out;
    auto block_of = [&](Nat n) -> NormalForm& {
      std::vector<std::uint64_t> sig(words, 0);
      for (std::size_t s = 0; s < sets.size(); ++s)
        if (sets[s]->contains(n)) sig[s / 64] |= std::uint64_t{1} << (s % 64);
      auto [it, fresh] = index.try_emplace(std::move(sig), out.size());
      if (fresh) {
        NormalForm nf;
        nf.threshold = t;
        nf.head.assign(t - 1, false);
        nf.period = p;
        nf.mask.assign(p, false);
        out.push_back(std::move(nf));
      }
      return out[it->second];
    };
    for (Nat n = 1; n < t; ++n) block_of(n).head[n - 1] = true;
    for (Nat j = 0; j < p; ++j) block_of(t + j).mask[(t + j) % p] = true;
    std::vector<SetExpr> blocks;
    for (auto& nf : out) {
      nf.canonicalize();
      blocks.push_back(SetExpr::from_normal_form(nf));
    }
    return blocks;
  }

  std::vector<std::vector<SetExpr>> build_blocks() const {
    std::vector<std::vector<SetExpr>> blocks;
    std::vector<std::vector<Nat>> reps;
    std::size_t total = 1;
    for (std::size_t i = 0; i < arity_; ++i) {
      blocks.push_back(refine(i));
      total *= blocks.back().size();
      if (total > kMaxProductCells) throw SetTooLarge("product refinement too large");
      reps.emplace_back();
      for (const auto& b : blocks.back()) reps.back().push_back(*b.next_member());
    }
    ProductForm shape{blocks, {}};
    std::vector<std::uint8_t> hits(total, 0);
    for (const auto& c : cells_) {
      std::vector<std::vector<std::size_t>> cover(arity_);
      for (std::size_t i = 0; i < arity_; ++i)
        for (std::size_t b = 0; b < reps[i].size(); ++b)
          if (c.rect[i].contains(reps[i][b])) cover[i].push_back(b);
      for_each_index(shape, cover, [&](std::size_t idx) {
        if (hits[idx]) throw InvariantViolation("simple function cells overlap");
        hits[idx] = 1;
      });
    }
    if (std::find(hits.begin(), hits.end(), 0) != hits.end())
      throw InvariantViolation("simple function cells are not exhaustive");
    return blocks;
  }

 public:
  /// Calls f(flat index) for every product of the listed block indices.
  template <class F>
  static void for_each_index(const ProductForm& pf, const std::vector<std::vector<std::size_t>>& cover, F&& f) {
    std::size_t n = cover.size();
    for (const auto& c : cover)
      if (c.empty()) return;
    std::vector<std::size_t> pos(n, 0);
    for (;;) {
      std::size_t idx = 0;
      for (std::size_t i = 0; i < n; ++i) idx = idx * pf.blocks[i].size() + cover[i][pos[i]];
      f(idx);
      std::size_t i = n;
      while (i > 0) {
        --i;
        if (++pos[i] < cover[i].size()) break;
        pos[i] = 0;
        if (i == 0) return;
      }
    }
  }

 private:
  std::size_t arity_;
  std::vector<Cell> cells_;
  std::shared_ptr<const std::vector<std::vector<SetExpr>>> blocks_;
};

/// Dense payoff on finite action sets, row-major with coordinate 0 most significant.
struct FiniteMatrix {
  std::vector<std::size_t> counts;
  std::vector<Rational> tensor;
};

class PayoffSpec;
using PayoffPtr = std::shared_ptr<const PayoffSpec>;

/// u = uniform limit of simple approximants f_n with |u - f_n| <= bound(n).
/// Optional extras sharpen integration: `point` is the exact pointwise value; an envelope e_j
/// with |u(a)| <= e_j(a_j) and e_j nonincreasing to 0 makes diffuse mass on coordinate j
/// contribute exactly 0; `section(j, a)` returns u with coordinate j fixed to a.
struct UniformLimit {
  std::function<SimpleFunction(Nat)> approximant;
  std::function<Rational(Nat)> bound;
  std::function<Rational(const std::vector<Nat>&)> point;
  std::vector<std::function<Rational(Nat)>> envelope;
  std::function<PayoffPtr(std::size_t, Nat)> section;
  Nat max_index = Nat{1} << 24;
};

class PayoffSpec {
 public:
  using Body = std::variant<FiniteMatrix, SimpleFunction, UniformLimit>;

  static PayoffSpec matrix(FiniteMatrix m) {
    std::size_t total = 1;
    std::vector<ActionSpace> spaces;
    for (auto c : m.counts) {
      if (c == 0) throw ShapeMismatch("empty action set");
      total *= c;
      spaces.push_back(ActionSpace::finite(c));
    }
    if (m.tensor.size() != total) throw ShapeMismatch("tensor size differs from action product");
    return PayoffSpec(std::move(spaces), std::move(m));
  }
  static PayoffSpec simple(std::vector<ActionSpace> spaces, SimpleFunction f) {
    if (spaces.size() != f.arity()) throw ShapeMismatch("action space count differs from arity");
    return PayoffSpec(std::move(spaces), std::move(f));
  }
  /// Spot-checks the approximation bound and envelopes on a grid before accepting.
  static PayoffSpec uniform_limit(std::vector<ActionSpace> spaces, UniformLimit ul, std::uint64_t seed = 0) {
    if (!ul.approximant || !ul.bound || !ul.point) throw InvalidArgument("uniform limit needs approximant, bound and point");
    ul.envelope.resize(spaces.size());
    PayoffSpec s(std::move(spaces), std::move(ul));
    s.spot_check(seed);
    return s;
  }

  std::size_t arity() const { return spaces_.size(); }
  const std::vector<ActionSpace>& spaces() const { return spaces_; }
  const Body& body() const { return body_; }
  bool is_matrix() const { return std::holds_alternative<FiniteMatrix>(body_); }
  bool is_simple() const { return std::holds_alternative<SimpleFunction>(body_); }
  bool is_uniform_limit() const { return std::holds_alternative<UniformLimit>(body_); }

  Rational value_at(const std::vector<Nat>& a) const {
    if (a.size() != arity()) throw ShapeMismatch("point arity differs from payoff arity");
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!spaces_[i].set().contains(a[i])) throw InvalidArgument("action outside its action set");
    if (auto* m = std::get_if<FiniteMatrix>(&body_)) {
      std::size_t idx = 0;
      for (std::size_t i = 0; i < a.size(); ++i) idx = idx * m->counts[i] + (a[i] - 1);
      return m->tensor[idx];
    }
    if (auto* f = std::get_if<SimpleFunction>(&body_)) return f->value_at(a);
    return std::get<UniformLimit>(body_).point(a);
  }

  /// Simple view on the naturals: matrix entries on {a}, zero outside the action sets.
  SimpleFunction as_simple() const {
    if (auto* f = std::get_if<SimpleFunction>(&body_)) return *f;
    const auto& m = std::get<FiniteMatrix>(body_);
    std::vector<SimpleFunction::Cell> cells;
    std::size_t n = m.counts.size();
    for (std::size_t idx = 0; idx < m.tensor.size(); ++idx) {
      std::vector<SetExpr> rect(n);
      std::size_t rest = idx;
      for (std::size_t i = n; i-- > 0;) {
        rect[i] = SetExpr::singleton(rest % m.counts[i] + 1);
        rest /= m.counts[i];
      }
      cells.push_back({rect, m.tensor[idx]});
    }
    std::vector<SetExpr> inside;
    for (auto c : m.counts) inside.push_back(SetExpr::interval(1, c));
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<SetExpr> r;
      for (std::size_t i = 0; i < n; ++i)
        r.push_back(i < j ? inside[i] : i == j ? !inside[i] : SetExpr::naturals());
      cells.push_back({r, Rational(0)});
    }
    return SimpleFunction(n, std::move(cells));
  }

 private:
  PayoffSpec(std::vector<ActionSpace> spaces, Body body) : spaces_(std::move(spaces)), body_(std::move(body)) {}

  void spot_check(std::uint64_t seed) const {
    const auto& ul = std::get<UniformLimit>(body_);
    std::vector<std::vector<Nat>> points;
    std::size_t n = arity();
    std::vector<Nat> hi(n);
    for (std::size_t i = 0; i < n; ++i) hi[i] = spaces_[i].size ? std::min<Nat>(*spaces_[i].size, 32) : 32;
    std::mt19937_64 rng(seed);
    std::size_t grid = 1;
    for (auto h : hi) grid *= h;
    if (grid <= 4096) {
      for (std::size_t idx = 0; idx < grid; ++idx) {
        std::vector<Nat> a(n);
        std::size_t rest = idx;
        for (std::size_t i = n; i-- > 0;) {
          a[i] = rest % hi[i] + 1;
          rest /= hi[i];
        }
        points.push_back(a);
      }
    } else {
      for (int k = 0; k < 4096; ++k) {
        std::vector<Nat> a(n);
        for (std::size_t i = 0; i < n; ++i) a[i] = 1 + rng() % hi[i];
        points.push_back(a);
      }
    }
    for (int k = 0; k < 64; ++k) {
      std::vector<Nat> a(n);
      for (std::size_t i = 0; i < n; ++i)
        a[i] = spaces_[i].size ? 1 + rng() % *spaces_[i].size : 33 + rng() % 100000;
      points.push_back(a);
    }
    for (Nat idx : {Nat{1}, Nat{2}, Nat{4}, Nat{8}, Nat{16}, Nat{32}, Nat{64}}) {
      SimpleFunction f = ul.approximant(idx);
      if (f.arity() != n) throw ShapeMismatch("approximant arity differs from payoff arity");
      Rational b = ul.bound(idx);
      for (const auto& a : points)
        if ((ul.point(a) - f.value_at(a)).abs() > b)
          throw InvariantViolation("approximant " + std::to_string(idx) + " exceeds its error bound");
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!ul.envelope[j]) continue;
      for (Nat k = 1; k < 64; ++k)
        if (ul.envelope[j](k + 1) > ul.envelope[j](k)) throw InvariantViolation("envelope is not nonincreasing");
      for (const auto& a : points)
        if (ul.point(a).abs() > ul.envelope[j](a[j])) throw InvariantViolation("payoff exceeds its envelope");
    }
  }

  std::vector<ActionSpace> spaces_;
  Body body_;
};

/// Sum over cells of value times the product of coordinate masses. Measures need not be
/// normalized. Zero factors short-circuit, so undecided sets multiplied by 0 are harmless.
inline Rational integrate_simple(const ChargeProfile& profile, const SimpleFunction& f) {
  if (profile.size() != f.arity()) throw ShapeMismatch("profile arity differs from function arity");
  Rational v;
  for (const auto& c : f.cells()) {
    if (c.value.is_zero()) continue;
    Rational w = c.value;
    for (std::size_t i = 0; i < profile.size() && !w.is_zero(); ++i) w *= profile[i].eval(c.rect[i]);
    v += w;
  }
  return v;
}

namespace detail {

inline void check_support(const std::vector<ActionSpace>& spaces, const ChargeProfile& p) {
  if (p.size() != spaces.size()) throw ShapeMismatch("profile arity differs from payoff arity");
  for (std::size_t i = 0; i < p.size(); ++i)
    if (spaces[i].finite() && !p[i].eval(!spaces[i].set()).is_zero())
      throw InvariantViolation("charge of coordinate " + std::to_string(i + 1) + " leaves its action set");
}

inline Rational finite_atomic_sum(const ChargeProfile& p, const std::function<Rational(const std::vector<Nat>&)>& u) {
  Rational v;
  std::vector<Nat> a(p.size());
  auto rec = [&](auto&& self, std::size_t i, const Rational& w) -> void {
    if (i == p.size()) {
      v += w * u(a);
      return;
    }
    for (const auto& [k, m] : p[i].atom_map()) {
      a[i] = k;
      self(self, i + 1, w * m);
    }
  };
  rec(rec, 0, Rational(1));
  return v;
}

inline Nat smallest_index(const UniformLimit& ul, const Rational& tol) {
  auto ok = [&](Nat n) { return Rational(2) * ul.bound(n) <= tol; };
  Nat hi = 1;
  while (!ok(hi)) {
    if (hi >= ul.max_index) throw NoApproximant("no approximant reaches tolerance " + tol.str());
    hi = std::min(hi * 2, ul.max_index);
  }
  Nat lo = hi / 2 + 1;
  if (hi == 1) return 1;
  while (lo < hi) {
    Nat mid = lo + (hi - lo) / 2;
    if (ok(mid)) hi = mid;
    else lo = mid + 1;
  }
  return hi;
}

}  // namespace detail

struct IntegrationResult {
  Bracket value;
  std::optional<Nat> index;  // approximant used, if any
};

inline IntegrationResult integrate_detail(const ChargeProfile& profile, const PayoffSpec& u, const Rational& tol) {
  if (tol.sign() <= 0) throw InvalidArgument("tolerance must be positive");
  detail::check_support(u.spaces(), profile);
  if (u.is_matrix()) {
    Rational v = detail::finite_atomic_sum(profile, [&](const std::vector<Nat>& a) { return u.value_at(a); });
    return {{v, v}, std::nullopt};
  }
  if (u.is_simple()) {
    Rational v = integrate_simple(profile, std::get<SimpleFunction>(u.body()));
    return {{v, v}, std::nullopt};
  }
  const auto& ul = std::get<UniformLimit>(u.body());
  ChargeProfile p = profile;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (ul.envelope[j] && !p[j].diffuse().empty()) p[j] = p[j].countably_additive_part();
    if (p[j].is_zero()) return {{Rational(0), Rational(0)}, std::nullopt};
  }
  bool atomic = true;
  for (const auto& c : p) atomic = atomic && c.is_finite_atomic();
  if (atomic) {
    Rational v = detail::finite_atomic_sum(p, ul.point);
    return {{v, v}, std::nullopt};
  }
  if (ul.section && p.size() > 1) {
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (!p[j].is_finite_atomic()) continue;
      ChargeProfile rest;
      for (std::size_t i = 0; i < p.size(); ++i)
        if (i != j) rest.push_back(p[i]);
      Rational sub_tol = tol / max(Rational(1), p[j].mass());
      Bracket acc{Rational(0), Rational(0)};
      std::optional<Nat> used;
      bool ok = true;
      for (const auto& [k, m] : p[j].atom_map()) {
        PayoffPtr s = ul.section(j, k);
        if (!s) {
          ok = false;
          break;
        }
        auto r = integrate_detail(rest, *s, sub_tol);
        acc = acc + scale(r.value, m);
        if (r.index) used = std::max(used.value_or(0), *r.index);
      }
      if (ok) return {acc, used};
    }
  }
  Nat n = detail::smallest_index(ul, tol);
  Rational mass(1);
  for (const auto& c : p) mass *= c.mass();
  Rational v = integrate_simple(p, ul.approximant(n));
  Rational b = ul.bound(n) * min(mass, Rational(1));
  return {{v - b, v + b}, n};
}

/// Bracket of width <= tol around the expected payoff.
inline Bracket integrate_bracket(const ChargeProfile& profile, const PayoffSpec& u, const Rational& tol) {
  return integrate_detail(profile, u, tol).value;
}

/// Expected payoff with `player`'s coordinate fixed to delta(action).
inline Bracket pure_action_payoff(const PayoffSpec& u, std::size_t player, Nat action, const ChargeProfile& opponents,
                                  const Rational& tol) {
  if (player >= u.arity() || opponents.size() != u.arity()) throw ShapeMismatch("profile arity differs from payoff arity");
  ChargeProfile p = opponents;
  p[player] = Charge::dirac(action);
  return integrate_bracket(p, u, tol);
}

/// Integrates out the coordinates with a charge; returns a function of the remaining ones.
inline SimpleFunction partial_integrate(const SimpleFunction& f, const PartialProfile& kappa_j) {
  if (kappa_j.size() != f.arity()) throw ShapeMismatch("partial profile arity differs from function arity");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < f.arity(); ++i)
    if (!kappa_j[i]) keep.push_back(i);
  if (keep.empty()) throw InvalidArgument("at least one coordinate must remain");
  SimpleFunction::ProductForm out;
  for (auto i : keep) out.blocks.push_back(f.blocks()[i]);
  std::size_t total = 1;
  for (const auto& b : out.blocks) total *= b.size();
  out.values.assign(total, Rational(0));
  for (const auto& c : f.cells()) {
    if (c.value.is_zero()) continue;
    Rational w = c.value;
    for (std::size_t i = 0; i < f.arity() && !w.is_zero(); ++i)
      if (kappa_j[i]) w *= kappa_j[i]->eval(c.rect[i]);
    if (w.is_zero()) continue;
    std::vector<std::vector<std::size_t>> cover;
    for (std::size_t k = 0; k < keep.size(); ++k) {
      std::vector<std::size_t> hit;
      for (std::size_t b = 0; b < out.blocks[k].size(); ++b)
        if (c.rect[keep[k]].contains(*out.blocks[k][b].next_member())) hit.push_back(b);
      cover.push_back(std::move(hit));
    }
    SimpleFunction::for_each_index(out, cover, [&](std::size_t idx) { out.values[idx] += w; });
  }
  std::vector<SimpleFunction::Cell> cells;
  std::vector<std::vector<std::size_t>> all;
  for (const auto& b : out.blocks) {
    std::vector<std::size_t> v(b.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
    all.push_back(std::move(v));
  }
  SimpleFunction::for_each_index(out, all, [&](std::size_t idx) {
    std::vector<SetExpr> rect(keep.size());
    std::size_t rest = idx;
    for (std::size_t k = keep.size(); k-- > 0;) {
      rect[k] = out.blocks[k][rest % out.blocks[k].size()];
      rest /= out.blocks[k].size();
    }
    cells.push_back({std::move(rect), out.values[idx]});
  });
  return SimpleFunction(keep.size(), std::move(cells));
}

struct FubiniResult {
  bool holds = false;
  Rational iterated;
  Rational product;
};

/// kappa_i and kappa_j are complementary partial profiles.
inline FubiniResult fubini_verify(const SimpleFunction& f, const PartialProfile& kappa_i, const PartialProfile& kappa_j) {
  if (kappa_i.size() != f.arity() || kappa_j.size() != f.arity()) throw ShapeMismatch("partial profile arity mismatch");
  ChargeProfile full, outer;
  for (std::size_t k = 0; k < f.arity(); ++k) {
    if (kappa_i[k].has_value() == kappa_j[k].has_value())
      throw InvalidArgument("partial profiles must split the coordinates");
    full.push_back(kappa_i[k] ? *kappa_i[k] : *kappa_j[k]);
    if (kappa_i[k]) outer.push_back(*kappa_i[k]);
  }
  FubiniResult r;
  r.iterated = integrate_simple(outer, partial_integrate(f, kappa_j));
  r.product = integrate_simple(full, f);
  r.holds = r.iterated == r.product;
  return r;
}

}  // namespace perfeq
