#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "motcert/rational.hpp"

namespace motcert::detail {

template <class T>
struct FieldTraits;

template <>
struct FieldTraits<Rational> {
  static constexpr bool exact = true;
  static Rational tol() { return Rational(0); }
};

template <>
struct FieldTraits<double> {
  static constexpr bool exact = false;
  static double tol() { return 1e-9; }
};

enum class LpStatus { optimal, infeasible };

template <class T>
struct LpResult {
  LpStatus status = LpStatus::infeasible;
  T value{};
  std::vector<T> x;
};

/// Two-phase dense tableau simplex for  min c.x  s.t.  A x = b, x >= 0.
/// Bland's rule throughout: with exact rational entries the pivoting cannot
/// cycle, which is what makes the downstream optimality audits exact.
template <class T>
class DenseSimplex {
 public:
  DenseSimplex(std::vector<std::vector<T>> a, std::vector<T> b, std::vector<T> c)
      : n_(c.size()), m_(b.size()), n_art_(b.size()), cost_(std::move(c)) {
    if (a.size() != m_) throw std::invalid_argument("simplex: row count mismatch");
    tol_ = FieldTraits<T>::tol();
    // Layout: [A | I | rhs]; artificial column i is n_ + i. Column layout is
    // fixed even when redundant rows are dropped later.
    tableau_.assign(m_, std::vector<T>(n_ + n_art_ + 1, T{}));
    basis_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      if (a[i].size() != n_) throw std::invalid_argument("simplex: column count mismatch");
      bool flip = b[i] < T{};
      for (std::size_t j = 0; j < n_; ++j) tableau_[i][j] = flip ? -a[i][j] : a[i][j];
      tableau_[i][rhs()] = flip ? -b[i] : b[i];
      tableau_[i][n_ + i] = T{1};
      basis_[i] = n_ + i;
    }
  }

  LpResult<T> solve() {
    if (!phase_one()) return {LpStatus::infeasible, T{}, {}};
    phase_two();
    LpResult<T> out;
    out.status = LpStatus::optimal;
    out.x.assign(n_, T{});
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] < n_) out.x[basis_[i]] = tableau_[i][rhs()];
    out.value = T{};
    for (std::size_t j = 0; j < n_; ++j) out.value += cost_[j] * out.x[j];
    return out;
  }

 private:
  std::size_t rhs() const { return n_ + n_art_; }

  void pivot(std::size_t row, std::size_t col) {
    auto& prow = tableau_[row];
    T inv = prow[col];
    for (auto& v : prow) v = v / inv;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == row) continue;
      T f = tableau_[i][col];
      if (f == T{}) continue;
      auto& r = tableau_[i];
      for (std::size_t j = 0; j <= rhs(); ++j) r[j] = r[j] - f * prow[j];
    }
    T rc = reduced_[col];  // snapshot: the loop zeroes this entry at j == col
    if (rc != T{})
      for (std::size_t j = 0; j <= rhs(); ++j) reduced_[j] = reduced_[j] - rc * prow[j];
    basis_[row] = col;
  }

  // Bland: smallest eligible entering index, smallest-ratio row with ties
  // broken by smallest basis index.
  bool iterate(std::size_t max_col) {
    while (true) {
      std::size_t enter = max_col;
      for (std::size_t j = 0; j < max_col; ++j) {
        if (reduced_[j] < -tol_) {
          enter = j;
          break;
        }
      }
      if (enter == max_col) return true;  // optimal
      std::size_t leave = m_;
      for (std::size_t i = 0; i < m_; ++i) {
        if (tableau_[i][enter] <= tol_) continue;
        if (leave == m_) {
          leave = i;
          continue;
        }
        T lhs = tableau_[i][rhs()] * tableau_[leave][enter];
        T rhs_v = tableau_[leave][rhs()] * tableau_[i][enter];
        if (lhs < rhs_v || (lhs == rhs_v && basis_[i] < basis_[leave])) leave = i;
      }
      if (leave == m_) throw std::logic_error("simplex: unbounded objective");
      pivot(leave, enter);
    }
  }

  void build_reduced(const std::vector<T>& c, std::size_t c_dim) {
    reduced_.assign(rhs() + 1, T{});
    for (std::size_t j = 0; j < c_dim; ++j) reduced_[j] = c[j];
    for (std::size_t i = 0; i < m_; ++i) {
      T cb = basis_[i] < c_dim ? c[basis_[i]] : T{};
      if (cb == T{}) continue;
      for (std::size_t j = 0; j <= rhs(); ++j) reduced_[j] = reduced_[j] - cb * tableau_[i][j];
    }
  }

  bool phase_one() {
    std::vector<T> art_cost(n_ + n_art_, T{});
    for (std::size_t i = 0; i < n_art_; ++i) art_cost[n_ + i] = T{1};
    build_reduced(art_cost, n_ + n_art_);
    iterate(n_);  // artificials never re-enter
    T infeas = T{};
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] >= n_) infeas += tableau_[i][rhs()];
    if (infeas > tol_ * T(static_cast<int>(m_ ? m_ : 1))) return false;
    // Drive residual artificials out; a row with no original-column pivot is redundant.
    for (std::size_t i = 0; i < m_;) {
      if (basis_[i] < n_) {
        ++i;
        continue;
      }
      std::size_t col = n_;
      for (std::size_t j = 0; j < n_; ++j) {
        T v = tableau_[i][j] < T{} ? T{} - tableau_[i][j] : tableau_[i][j];
        if (v > tol_) {
          col = j;
          break;
        }
      }
      if (col < n_) {
        pivot(i, col);
        ++i;
      } else {
        tableau_.erase(tableau_.begin() + static_cast<std::ptrdiff_t>(i));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
        --m_;
      }
    }
    return true;
  }

  void phase_two() {
    build_reduced(cost_, n_);
    iterate(n_);
  }

  std::size_t n_, m_, n_art_;
  std::vector<T> cost_;
  T tol_{};
  std::vector<std::vector<T>> tableau_;
  std::vector<T> reduced_;
  std::vector<std::size_t> basis_;
};

template <class T>
LpResult<T> solve_equality_lp(std::vector<std::vector<T>> a, std::vector<T> b, std::vector<T> c) {
  return DenseSimplex<T>(std::move(a), std::move(b), std::move(c)).solve();
}

}  // namespace motcert::detail
