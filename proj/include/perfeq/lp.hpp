#pragma once

#include <cstddef>
#include <vector>

#include "perfeq/rational.hpp"

namespace perfeq {

struct LpResult {
  enum class Status { Optimal, Infeasible, Unbounded };
  Status status = Status::Infeasible;
  std::vector<Rational> x;
  Rational value;
};

/// maximize c.x subject to A x = b, x >= 0. Two-phase tableau simplex, Bland's rule.
class ExactSimplex {
 public:
  ExactSimplex(std::vector<std::vector<Rational>> a, std::vector<Rational> b, std::vector<Rational> c)
      : m_(a.size()), n_(c.size()), c_(std::move(c)) {
    if (b.size() != m_) throw ShapeMismatch("rhs length differs from row count");
    t_.assign(m_, std::vector<Rational>(n_ + m_ + 1));
    for (std::size_t i = 0; i < m_; ++i) {
      if (a[i].size() != n_) throw ShapeMismatch("constraint row has wrong width");
      bool flip = b[i].sign() < 0;
      for (std::size_t j = 0; j < n_; ++j) t_[i][j] = flip ? -a[i][j] : a[i][j];
      t_[i][n_ + i] = Rational(1);
      t_[i][n_ + m_] = flip ? -b[i] : b[i];
    }
    basis_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) basis_[i] = n_ + i;
  }

  LpResult solve() {
    LpResult out;
    std::size_t width = n_ + m_;
    std::vector<Rational> phase1(width);
    for (std::size_t j = n_; j < width; ++j) phase1[j] = Rational(-1);
    if (!optimize(phase1, width)) throw InvariantViolation("phase one cannot be unbounded");
    if (objective(phase1).sign() < 0) return out;

    // Drive artificial variables out of the basis; drop redundant rows.
    for (std::size_t i = 0; i < t_.size();) {
      if (basis_[i] < n_) { ++i; continue; }
      std::size_t j = 0;
      while (j < n_ && t_[i][j].is_zero()) ++j;
      if (j < n_) {
        pivot(i, j);
        ++i;
      } else {
        t_.erase(t_.begin() + static_cast<long>(i));
        basis_.erase(basis_.begin() + static_cast<long>(i));
      }
    }
    std::vector<Rational> phase2(c_);
    phase2.resize(width);
    if (!optimize(phase2, n_)) {
      out.status = LpResult::Status::Unbounded;
      return out;
    }
    out.status = LpResult::Status::Optimal;
    out.x.assign(n_, Rational(0));
    for (std::size_t i = 0; i < t_.size(); ++i)
      if (basis_[i] < n_) out.x[basis_[i]] = t_[i].back();
    out.value = objective(phase2);
    return out;
  }

 private:
  Rational objective(const std::vector<Rational>& cost) const {
    Rational z;
    for (std::size_t i = 0; i < t_.size(); ++i) z += cost[basis_[i]] * t_[i].back();
    return z;
  }

  // Returns false if unbounded. Columns >= limit are never entered.
  bool optimize(const std::vector<Rational>& cost, std::size_t limit) {
    for (;;) {
      std::size_t enter = limit;
      for (std::size_t j = 0; j < limit; ++j) {
        Rational reduced = -cost[j];
        for (std::size_t i = 0; i < t_.size(); ++i)
          if (!t_[i][j].is_zero()) reduced += cost[basis_[i]] * t_[i][j];
        if (reduced.sign() < 0) { enter = j; break; }
      }
      if (enter == limit) return true;
      std::size_t leave = t_.size();
      Rational best;
      for (std::size_t i = 0; i < t_.size(); ++i) {
        if (t_[i][enter].sign() <= 0) continue;
        Rational ratio = t_[i].back() / t_[i][enter];
        if (leave == t_.size() || ratio < best || (ratio == best && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave == t_.size()) return false;
      pivot(leave, enter);
    }
  }

  void pivot(std::size_t r, std::size_t col) {
    Rational p = t_[r][col];
    for (auto& v : t_[r]) v /= p;
    for (std::size_t i = 0; i < t_.size(); ++i) {
      if (i == r || t_[i][col].is_zero()) continue;
      Rational f = t_[i][col];
      for (std::size_t j = 0; j < t_[i].size(); ++j)
        if (!t_[r][j].is_zero()) t_[i][j] -= f * t_[r][j];
    }
    basis_[r] = col;
  }

  std::size_t m_, n_;
  std::vector<Rational> c_;
  std::vector<std::vector<Rational>> t_;
  std::vector<std::size_t> basis_;
};

inline LpResult solve_lp(std::vector<std::vector<Rational>> a, std::vector<Rational> b,
                         std::vector<Rational> c) {
  return ExactSimplex(std::move(a), std::move(b), std::move(c)).solve();
}

}  // namespace perfeq
