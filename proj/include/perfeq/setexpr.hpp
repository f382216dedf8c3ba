#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "perfeq/error.hpp"

namespace perfeq {

using Nat = std::uint64_t;

/// Eventually periodic subset of {1, 2, ...}.
/// For 1 <= n < threshold membership is head[n-1]; for n >= threshold it is mask[n % period].
struct NormalForm {
  Nat threshold = 1;
  std::vector<bool> head;
  Nat period = 1;
  std::vector<bool> mask{false};

  static constexpr Nat kLimit = Nat{1} << 22;

  bool contains(Nat n) const {
    if (n == 0) return false;
    if (n < threshold) return head[n - 1];
    return mask[n % period];
  }
  bool infinite() const { return std::find(mask.begin(), mask.end(), true) != mask.end(); }
  Nat finite_size() const { return static_cast<Nat>(std::count(head.begin(), head.end(), true)); }

  /// Smallest period and threshold describing the same set.
  void canonicalize() {
    for (Nat d = 1; d <= period; ++d) {
      if (period % d != 0) continue;
      bool ok = true;
      for (Nat r = d; r < period && ok; ++r) ok = mask[r] == mask[r % d];
      if (ok) {
        mask.resize(d);
        period = d;
        break;
      }
    }
    while (threshold > 1 && head[threshold - 2] == mask[(threshold - 1) % period]) {
      head.pop_back();
      --threshold;
    }
  }

  friend bool operator==(const NormalForm&, const NormalForm&) = default;

  static NormalForm combine(const NormalForm& a, const NormalForm& b, bool (*op)(bool, bool)) {
    NormalForm out;
    out.threshold = std::max(a.threshold, b.threshold);
    out.period = std::lcm(a.period, b.period);
    if (out.threshold > kLimit || out.period > kLimit)
      throw SetTooLarge("normal form exceeds size limit");
    out.head.resize(out.threshold - 1);
    for (Nat n = 1; n < out.threshold; ++n) out.head[n - 1] = op(a.contains(n), b.contains(n));
    out.mask.assign(out.period, false);
    Nat base = out.threshold;
    for (Nat i = 0; i < out.period; ++i) {
      Nat n = base + i;
      out.mask[n % out.period] = op(a.contains(n), b.contains(n));
    }
    out.canonicalize();
    return out;
  }
};

struct Classification {
  enum class Kind { Empty, Finite, Infinite };
  Kind kind = Kind::Empty;
  Nat size = 0;  // meaningful for Finite
  friend bool operator==(const Classification&, const Classification&) = default;
};

class SetExpr {
 public:
  struct Finite { std::vector<Nat> elems; };
  struct Progression { Nat offset; Nat step; };
  struct Interval { Nat lo; std::optional<Nat> hi; };
  // std::vector accepts the incomplete SetExpr type.
  struct Not { std::vector<SetExpr> args; };
  struct Or { std::vector<SetExpr> args; };
  struct And { std::vector<SetExpr> args; };
  using Node = std::variant<Finite, Progression, Interval, Not, Or, And>;

  SetExpr() : SetExpr(Finite{}) {}

  static SetExpr finite(std::vector<Nat> xs) {
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return SetExpr(Finite{std::move(xs)});
  }
  static SetExpr singleton(Nat n) { return finite({n}); }
  static SetExpr ap(Nat offset, Nat step) {
    if (step == 0) throw InvalidArgument("progression step must be >= 1");
    return SetExpr(Progression{offset, step});
  }
  static SetExpr interval(Nat lo, std::optional<Nat> hi = std::nullopt) {
    return SetExpr(Interval{lo, hi});
  }
  static SetExpr naturals() { return interval(1); }
  static SetExpr empty() { return finite({}); }
  static SetExpr evens() { return ap(0, 2); }
  static SetExpr odds() { return ap(1, 2); }

  /// Rebuild an expression tree from a normal form.
  static SetExpr from_normal_form(const NormalForm& nf) {
    std::vector<Nat> head;
    for (Nat n = 1; n < nf.threshold; ++n)
      if (nf.head[n - 1]) head.push_back(n);
    std::optional<SetExpr> tail;
    for (Nat r = 0; r < nf.period; ++r) {
      if (!nf.mask[r]) continue;
      SetExpr p = nf.period == 1 ? interval(nf.threshold) : ap(r, nf.period);
      tail = tail ? *tail | p : p;
    }
    if (tail && nf.period > 1 && nf.threshold > 1) tail = interval(nf.threshold) & *tail;
    if (!tail) return finite(head);
    if (head.empty()) return *tail;
    return finite(head) | *tail;
  }

  friend SetExpr operator!(const SetExpr& e) { return SetExpr(Not{{e}}); }
  friend SetExpr operator|(const SetExpr& a, const SetExpr& b) { return SetExpr(Or{{a, b}}); }
  friend SetExpr operator&(const SetExpr& a, const SetExpr& b) { return SetExpr(And{{a, b}}); }
  friend SetExpr operator-(const SetExpr& a, const SetExpr& b) { return a & !b; }

  const Node& node() const { return *node_; }
  const NormalForm& normal_form() const { return *nf_; }

  /// Membership by walking the expression tree.
  bool eval(Nat n) const {
    if (n == 0) return false;
    return std::visit(
        [n](const auto& x) -> bool {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Finite>) {
            return std::binary_search(x.elems.begin(), x.elems.end(), n);
          } else if constexpr (std::is_same_v<T, Progression>) {
            return n >= x.offset && (n - x.offset) % x.step == 0;
          } else if constexpr (std::is_same_v<T, Interval>) {
            return n >= x.lo && (!x.hi || n <= *x.hi);
          } else if constexpr (std::is_same_v<T, Not>) {
            return !x.args[0].eval(n);
          } else if constexpr (std::is_same_v<T, Or>) {
            return x.args[0].eval(n) || x.args[1].eval(n);
          } else {
            return x.args[0].eval(n) && x.args[1].eval(n);
          }
        },
        *node_);
  }
  bool contains(Nat n) const { return nf_->contains(n); }

  Classification classify() const {
    if (nf_->infinite()) return {Classification::Kind::Infinite, 0};
    Nat k = nf_->finite_size();
    return {k == 0 ? Classification::Kind::Empty : Classification::Kind::Finite, k};
  }
  bool is_empty() const { return classify().kind == Classification::Kind::Empty; }
  bool is_infinite() const { return nf_->infinite(); }
  bool is_finite() const { return !nf_->infinite(); }

  bool same_set(const SetExpr& o) const { return *nf_ == *o.nf_; }

  /// Smallest member >= from, if any.
  std::optional<Nat> next_member(Nat from = 1) const {
    from = std::max<Nat>(from, 1);
    Nat stop = std::max(from, nf_->threshold) + nf_->period;
    for (Nat n = from; n < stop; ++n)
      if (nf_->contains(n)) return n;
    return std::nullopt;
  }
  /// Largest member of a finite set.
  std::optional<Nat> max_member() const {
    if (is_infinite()) return std::nullopt;
    for (Nat n = nf_->threshold; n-- > 1;)
      if (nf_->head[n - 1]) return n;
    return std::nullopt;
  }
  std::vector<Nat> members_upto(Nat limit) const {
    std::vector<Nat> out;
    for (Nat n = 1; n <= limit; ++n)
      if (nf_->contains(n)) out.push_back(n);
    return out;
  }

  /// {n : n + 1 in this set}.
  SetExpr shift_down() const {
    const NormalForm& a = *nf_;
    NormalForm out;
    out.threshold = std::max<Nat>(a.threshold, 2) - 1;
    out.head.resize(out.threshold - 1);
    for (Nat n = 1; n < out.threshold; ++n) out.head[n - 1] = a.contains(n + 1);
    out.period = a.period;
    out.mask.assign(a.period, false);
    for (Nat i = 0; i < a.period; ++i) {
      Nat n = out.threshold + i;
      out.mask[n % a.period] = a.contains(n + 1);
    }
    out.canonicalize();
    return from_normal_form(out);
  }

  std::string str() const { return render(0); }

 private:
  explicit SetExpr(Node n) : node_(std::make_shared<const Node>(std::move(n))) {
    nf_ = std::make_shared<const NormalForm>(build());
  }

  NormalForm build() const {
    return std::visit(
        [](const auto& x) -> NormalForm {
          using T = std::decay_t<decltype(x)>;
          NormalForm f;
          if constexpr (std::is_same_v<T, Finite>) {
            Nat top = 0;
            for (Nat e : x.elems) top = std::max(top, e);
            if (top >= NormalForm::kLimit) throw SetTooLarge("finite set element too large");
            f.threshold = top + 1;
            f.head.assign(top, false);
            for (Nat e : x.elems)
              if (e > 0) f.head[e - 1] = true;
          } else if constexpr (std::is_same_v<T, Progression>) {
            if (x.offset >= NormalForm::kLimit || x.step >= NormalForm::kLimit)
              throw SetTooLarge("progression too large");
            f.threshold = std::max<Nat>(x.offset, 1);
            f.head.assign(f.threshold - 1, false);
            f.period = x.step;
            f.mask.assign(x.step, false);
            f.mask[x.offset % x.step] = true;
          } else if constexpr (std::is_same_v<T, Interval>) {
            if (x.lo >= NormalForm::kLimit || (x.hi && *x.hi >= NormalForm::kLimit))
              throw SetTooLarge("interval bound too large");
            if (x.hi) {
              f.threshold = *x.hi + 1;
              f.head.assign(*x.hi, false);
              for (Nat n = std::max<Nat>(x.lo, 1); n <= *x.hi; ++n) f.head[n - 1] = true;
            } else {
              f.threshold = std::max<Nat>(x.lo, 1);
              f.head.assign(f.threshold - 1, false);
              f.mask = {true};
            }
          } else if constexpr (std::is_same_v<T, Not>) {
            f = x.args[0].normal_form();
            f.head.flip();
            f.mask.flip();
          } else if constexpr (std::is_same_v<T, Or>) {
            return NormalForm::combine(x.args[0].normal_form(), x.args[1].normal_form(),
                                       [](bool p, bool q) { return p || q; });
          } else {
            return NormalForm::combine(x.args[0].normal_form(), x.args[1].normal_form(),
                                       [](bool p, bool q) { return p && q; });
          }
          f.canonicalize();
          return f;
        },
        *node_);
  }

  // prec: 0 top, 1 inside '&', 2 inside '!'
  std::string render(int prec) const {
    return std::visit(
        [prec](const auto& x) -> std::string {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Finite>) {
            std::string s = "fin{";
            for (std::size_t i = 0; i < x.elems.size(); ++i)
              s += (i ? "," : "") + std::to_string(x.elems[i]);
            return s + "}";
          } else if constexpr (std::is_same_v<T, Progression>) {
            return "ap(" + std::to_string(x.offset) + "," + std::to_string(x.step) + ")";
          } else if constexpr (std::is_same_v<T, Interval>) {
            return "int(" + std::to_string(x.lo) + "," + (x.hi ? std::to_string(*x.hi) : "") + ")";
          } else if constexpr (std::is_same_v<T, Not>) {
            return "!" + x.args[0].render(2);
          } else if constexpr (std::is_same_v<T, Or>) {
            std::string s = x.args[0].render(0) + " | " + x.args[1].render(0);
            return prec > 0 ? "(" + s + ")" : s;
          } else {
            std::string s = x.args[0].render(1) + " & " + x.args[1].render(1);
            return prec > 1 ? "(" + s + ")" : s;
          }
        },
        *node_);
  }

  std::shared_ptr<const Node> node_;
  std::shared_ptr<const NormalForm> nf_;
};

inline bool setexpr_eval(const SetExpr& e, Nat n) { return e.eval(n); }
inline Classification setexpr_classify(const SetExpr& e) { return e.classify(); }
inline bool almost_subset(const SetExpr& a, const SetExpr& b) { return (a - b).is_finite(); }
inline bool almost_equal(const SetExpr& a, const SetExpr& b) {
  return almost_subset(a, b) && almost_subset(b, a);
}

namespace detail {

class Cursor {
 public:
  explicit Cursor(std::string_view s) : s_(s) {}
  void skip_ws() {
    while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t' || s_[i_] == '\n')) ++i_;
  }
  bool done() { skip_ws(); return i_ >= s_.size(); }
  char peek() { skip_ws(); return i_ < s_.size() ? s_[i_] : '\0'; }
  bool accept(char c) {
    if (peek() != c) return false;
    ++i_;
    return true;
  }
  bool accept_word(std::string_view w) {
    skip_ws();
    if (s_.substr(i_, w.size()) != w) return false;
    i_ += w.size();
    return true;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }
  std::optional<Nat> maybe_nat() {
    skip_ws();
    std::size_t j = i_;
    while (j < s_.size() && s_[j] >= '0' && s_[j] <= '9') ++j;
    if (j == i_) return std::nullopt;
    if (j - i_ > 18) fail("number too large");
    Nat v = std::stoull(std::string(s_.substr(i_, j - i_)));
    i_ = j;
    return v;
  }
  Nat nat() {
    auto v = maybe_nat();
    if (!v) fail("expected natural number");
    return *v;
  }
  /// Raw text up to (not including) any char in stops at paren/brace depth 0.
  std::string_view until(std::string_view stops) {
    skip_ws();
    std::size_t j = i_;
    int depth = 0;
    while (j < s_.size()) {
      char c = s_[j];
      if (depth == 0 && stops.find(c) != std::string_view::npos) break;
      if (c == '(' || c == '{' || c == '[') ++depth;
      if (c == ')' || c == '}' || c == ']') {
        if (depth == 0) break;
        --depth;
      }
      ++j;
    }
    auto out = s_.substr(i_, j - i_);
    i_ = j;
    while (!out.empty() && out.back() == ' ') out.remove_suffix(1);
    return out;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg + " at column " + std::to_string(i_ + 1) + " in '" + std::string(s_) + "'");
  }
  std::size_t pos() const { return i_; }

 private:
  std::string_view s_;
  std::size_t i_ = 0;
};

inline SetExpr parse_union(Cursor& c);

inline SetExpr parse_factor(Cursor& c) {
  if (c.accept('!')) return !parse_factor(c);
  if (c.accept('(')) {
    SetExpr e = parse_union(c);
    c.expect(')');
    return e;
  }
  if (c.accept_word("fin")) {
    c.expect('{');
    std::vector<Nat> xs;
    if (!c.accept('}')) {
      do xs.push_back(c.nat());
      while (c.accept(','));
      c.expect('}');
    }
    return SetExpr::finite(std::move(xs));
  }
  if (c.accept_word("ap")) {
    c.expect('(');
    Nat a = c.nat();
    c.expect(',');
    Nat d = c.nat();
    c.expect(')');
    if (d == 0) c.fail("progression step must be >= 1");
    return SetExpr::ap(a, d);
  }
  if (c.accept_word("int")) {
    c.expect('(');
    Nat lo = c.nat();
    c.expect(',');
    auto hi = c.maybe_nat();
    c.expect(')');
    return SetExpr::interval(lo, hi);
  }
  c.fail("expected set expression");
}

inline SetExpr parse_intersection(Cursor& c) {
  SetExpr e = parse_factor(c);
  while (c.accept('&')) e = e & parse_factor(c);
  return e;
}

inline SetExpr parse_union(Cursor& c) {
  SetExpr e = parse_intersection(c);
  while (c.accept('|')) e = e | parse_intersection(c);
  return e;
}

}  // namespace detail

inline SetExpr parse_setexpr(std::string_view text) {
  detail::Cursor c(text);
  SetExpr e = detail::parse_union(c);
  if (!c.done()) c.fail("trailing input");
  return e;
}

}  // namespace perfeq
