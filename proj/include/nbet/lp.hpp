#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "nbet/numerics.hpp"

namespace nbet {

enum class LpStatus { Optimal, Infeasible, Unbounded };

template <class T>
struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  T value = T(0);
  Vector<T> x;
};

namespace detail {

// Dense tableau. The last column holds the right-hand side; `obj` is the
// reduced-cost row of "z - c x = 0", so its rhs entry is the objective value.
template <class T>
class Tableau {
 public:
  Tableau(std::vector<Vector<T>> rows, std::vector<std::size_t> basis, double tol)
      : rows_(std::move(rows)), basis_(std::move(basis)), tol_(tol) {}

  std::vector<Vector<T>>& rows() { return rows_; }
  std::vector<std::size_t>& basis() { return basis_; }
  Vector<T>& obj() { return obj_; }
  std::size_t rhs() const { return rows_.empty() ? obj_.size() - 1 : rows_.front().size() - 1; }

  int sign(const T& x) const { return ScalarTraits<T>::sign(x, tol_); }

  void set_objective(Vector<T> obj) {
    obj_ = std::move(obj);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const T f = obj_[basis_[i]];
      if (sign(f) == 0) continue;
      for (std::size_t j = 0; j < obj_.size(); ++j) obj_[j] -= f * rows_[i][j];
    }
  }

  void pivot(std::size_t r, std::size_t col) {
    const T inv = T(1) / rows_[r][col];
    for (auto& x : rows_[r]) x *= inv;
    rows_[r][col] = T(1);
    auto eliminate = [&](Vector<T>& row) {
      const T f = row[col];
      if (ScalarTraits<T>::sign(f) == 0) return;
      for (std::size_t j = 0; j < row.size(); ++j) row[j] -= f * rows_[r][j];
      row[col] = T(0);
    };
    for (std::size_t i = 0; i < rows_.size(); ++i)
      if (i != r) eliminate(rows_[i]);
    eliminate(obj_);
    basis_[r] = col;
  }

  /// Bland's rule on columns [0, allowed). Returns false when unbounded.
  bool optimize(std::size_t allowed, std::size_t max_iter) {
    const std::size_t rc = rhs();
    for (std::size_t iter = 0;; ++iter) {
      if (iter >= max_iter) fail(ErrorKind::NumericalFailure, "simplex iteration limit reached");
      std::size_t enter = allowed;
      for (std::size_t j = 0; j < allowed; ++j)
        if (sign(obj_[j]) < 0) {
          enter = j;
          break;
        }
      if (enter == allowed) return true;
      std::optional<std::size_t> leave;
      T best_ratio(0);
      for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (sign(rows_[i][enter]) <= 0) continue;
        const T ratio = rows_[i][rc] / rows_[i][enter];
        if (!leave) {
          leave = i;
          best_ratio = ratio;
          continue;
        }
        const int cmp = sign(T(ratio - best_ratio));
        if (cmp < 0 || (cmp == 0 && basis_[i] < basis_[*leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (!leave) return false;
      pivot(*leave, enter);
    }
  }

 private:
  std::vector<Vector<T>> rows_;
  std::vector<std::size_t> basis_;
  Vector<T> obj_;
  double tol_;
};

}  // namespace detail

/// Two-phase primal simplex: maximize c.x subject to A x = b, x >= 0.
template <class T>
LpResult<T> simplex_max(const Matrix<T>& a, const Vector<T>& b, const Vector<T>& c, double tol = 1e-11) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (b.size() != m || c.size() != n) fail(ErrorKind::Malformed, "LP dimension mismatch");
  const std::size_t width = n + m + 1;

  std::vector<Vector<T>> rows(m, Vector<T>(width, T(0)));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    const bool flip = ScalarTraits<T>::sign(b[i]) < 0;
    for (std::size_t j = 0; j < n; ++j) rows[i][j] = flip ? T(-a(i, j)) : a(i, j);
    rows[i][n + i] = T(1);
    rows[i][width - 1] = flip ? T(-b[i]) : b[i];
    basis[i] = n + i;
  }
  // Float tolerances are relative to the largest right-hand side.
  double scale = 1.0;
  if constexpr (!is_exact_v<T>)
    for (const auto& x : b) scale = std::max(scale, std::fabs(x));
  detail::Tableau<T> tab(std::move(rows), std::move(basis), tol * scale);
  const std::size_t max_iter = 50 * (n + m + 10) * (m + 1);

  // Phase one: drive the artificial variables to zero.
  Vector<T> phase1(width, T(0));
  for (std::size_t i = 0; i < m; ++i) phase1[n + i] = T(1);
  tab.set_objective(std::move(phase1));
  tab.optimize(n + m, max_iter);
  LpResult<T> result;
  if (tab.sign(tab.obj()[width - 1]) < 0) {
    result.status = LpStatus::Infeasible;
    return result;
  }

  // Pivot remaining zero-level artificials out, dropping redundant rows.
  for (std::size_t i = 0; i < tab.rows().size();) {
    if (tab.basis()[i] < n) {
      ++i;
      continue;
    }
    std::optional<std::size_t> col;
    for (std::size_t j = 0; j < n; ++j)
      if (tab.sign(tab.rows()[i][j]) != 0) {
        col = j;
        break;
      }
    if (col) {
      tab.pivot(i, *col);
      ++i;
    } else {
      tab.rows().erase(tab.rows().begin() + static_cast<std::ptrdiff_t>(i));
      tab.basis().erase(tab.basis().begin() + static_cast<std::ptrdiff_t>(i));
    }
  }
  // Artificial columns can no longer enter; zero them so they never matter.
  for (auto& row : tab.rows())
    for (std::size_t j = n; j < n + m; ++j) row[j] = T(0);

  Vector<T> phase2(width, T(0));
  for (std::size_t j = 0; j < n; ++j) phase2[j] = -c[j];
  tab.set_objective(std::move(phase2));
  if (!tab.optimize(n, max_iter)) {
    result.status = LpStatus::Unbounded;
    return result;
  }

  result.status = LpStatus::Optimal;
  result.value = tab.obj()[width - 1];
  result.x.assign(n, T(0));
  for (std::size_t i = 0; i < tab.rows().size(); ++i)
    if (tab.basis()[i] < n) result.x[tab.basis()[i]] = tab.rows()[i][width - 1];
  return result;
}

/// max sum(s) over 0 <= s <= cap with s.b = 0 for every b in `orth`.
template <class T>
T lp_max_capped(const Vector<T>& cap, const std::vector<Vector<T>>& orth, double tol = 1e-11) {
  const std::size_t n = cap.size();
  for (const auto& b : orth)
    if (b.size() != n) fail(ErrorKind::Malformed, "constraint dimension mismatch");
  const std::size_t rows = n + orth.size();
  Matrix<T> a(rows, 2 * n);
  Vector<T> rhs(rows, T(0));
  Vector<T> c(2 * n, T(0));
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = T(1);
    a(i, n + i) = T(1);
    rhs[i] = cap[i];
    c[i] = T(1);
  }
  for (std::size_t k = 0; k < orth.size(); ++k)
    for (std::size_t j = 0; j < n; ++j) a(n + k, j) = orth[k][j];
  const auto r = simplex_max(a, rhs, c, tol);
  if (r.status != LpStatus::Optimal) fail(ErrorKind::NumericalFailure, "capped LP did not reach an optimum");
  return r.value;
}

/// min sum(t) subject to B t = target and 0 <= t_i <= upper_i, where an absent
/// bound leaves t_i unbounded above. Entries with a zero bound are fixed to 0.
/// Returns nullopt when infeasible.
template <class T>
std::optional<LpResult<T>> lp_min_mass(const std::vector<std::optional<T>>& upper,
                                       const std::vector<Vector<T>>& constraints, const Vector<T>& target,
                                       double tol = 1e-11) {
  const std::size_t n = upper.size();
  std::vector<std::size_t> free_vars, bounded;
  for (std::size_t i = 0; i < n; ++i) {
    if (upper[i] && ScalarTraits<T>::sign(*upper[i]) <= 0) continue;
    free_vars.push_back(i);
    if (upper[i]) bounded.push_back(i);
  }
  const std::size_t nv = free_vars.size() + bounded.size();
  const std::size_t nr = constraints.size() + bounded.size();
  Matrix<T> a(nr, nv);
  Vector<T> rhs(nr, T(0));
  Vector<T> c(nv, T(0));
  for (std::size_t k = 0; k < constraints.size(); ++k) {
    for (std::size_t j = 0; j < free_vars.size(); ++j) a(k, j) = constraints[k][free_vars[j]];
    rhs[k] = target[k];
  }
  for (std::size_t j = 0; j < free_vars.size(); ++j) c[j] = T(-1);
  std::size_t slack = free_vars.size();
  std::size_t row = constraints.size();
  for (std::size_t j = 0; j < free_vars.size(); ++j) {
    if (!upper[free_vars[j]]) continue;
    a(row, j) = T(1);
    a(row, slack) = T(1);
    rhs[row] = *upper[free_vars[j]];
    ++slack;
    ++row;
  }
  auto r = simplex_max(a, rhs, c, tol);
  if (r.status == LpStatus::Infeasible) return std::nullopt;
  if (r.status != LpStatus::Optimal) fail(ErrorKind::NumericalFailure, "mass LP is unbounded");
  LpResult<T> out;
  out.status = LpStatus::Optimal;
  out.value = -r.value;
  out.x.assign(n, T(0));
  for (std::size_t j = 0; j < free_vars.size(); ++j) out.x[free_vars[j]] = r.x[j];
  return out;
}

}  // namespace nbet
