#pragma once

// Independent reference computations for the test suites. Nothing here calls
// into the library's algorithms; only its plain data types are shared.

#include <gmpxx.h>

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using Q = mpq_class;
using QVec = std::vector<Q>;
using QMat = std::vector<QVec>;  // row-major

inline QMat identity(std::size_t n) {
  QMat m(n, QVec(n, Q(0)));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
  return m;
}

inline QMat multiply(const QMat& a, const QMat& b) {
  const std::size_t n = a.size(), k = b.size(), p = b.empty() ? 0 : b[0].size();
  QMat c(n, QVec(p, Q(0)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) {
      Q s = 0;
      for (std::size_t t = 0; t < k; ++t) s += a[i][t] * b[t][j];
      c[i][j] = s;
    }
  return c;
}

inline QVec row_times(const QVec& v, const QMat& m) {
  QVec out(m.empty() ? 0 : m[0].size(), Q(0));
  for (std::size_t j = 0; j < out.size(); ++j)
    for (std::size_t i = 0; i < v.size(); ++i) out[j] += v[i] * m[i][j];
  return out;
}

inline Q total(const QVec& v) {
  Q s = 0;
  for (const auto& x : v) s += x;
  return s;
}

/// Every word over `letters` symbols with length at most `max_len`, shortest first.
inline std::vector<std::vector<std::size_t>> all_words(std::size_t letters, std::size_t max_len) {
  std::vector<std::vector<std::size_t>> out{{}};
  std::size_t begin = 0;
  for (std::size_t len = 1; len <= max_len; ++len) {
    const std::size_t end = out.size();
    for (std::size_t i = begin; i < end; ++i)
      for (std::size_t a = 0; a < letters; ++a) {
        auto w = out[i];
        w.push_back(a);
        out.push_back(std::move(w));
      }
    begin = end;
  }
  return out;
}

inline QMat product(const std::vector<QMat>& family, const std::vector<std::size_t>& w, std::size_t dim) {
  QMat m = identity(dim);
  for (auto a : w) m = multiply(m, family[a]);
  return m;
}

/// ‖v M_z‖ = ‖v‖ for every word z with |z| <= max_len.
inline bool norm_constant(const std::vector<QMat>& family, const QVec& v, std::size_t max_len) {
  const Q base = total(v);
  std::vector<QVec> frontier{v};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<QVec> next;
    std::set<QVec> seen;
    for (const auto& u : frontier)
      for (const auto& m : family) {
        QVec w = row_times(u, m);
        if (total(w) != base) return false;
        if (seen.insert(w).second) next.push_back(std::move(w));
      }
    frontier = std::move(next);
  }
  return true;
}

/// Some prefix z with |z| <= max_len and some letter a give ‖x M_z M_a‖ != ‖x M_z‖.
inline bool some_risk(const std::vector<QMat>& family, const QVec& x, std::size_t max_len) {
  std::vector<QVec> frontier{x};
  for (std::size_t len = 0; len <= max_len; ++len) {
    std::vector<QVec> next;
    std::set<QVec> seen;
    for (const auto& u : frontier) {
      const Q n = total(u);
      for (const auto& m : family) {
        QVec w = row_times(u, m);
        if (total(w) != n) return true;
        if (len < max_len && seen.insert(w).second) next.push_back(std::move(w));
      }
    }
    frontier = std::move(next);
  }
  return false;
}

/// Same search in floating point for directions that are not exact.
inline bool some_risk_float(const std::vector<std::vector<std::vector<double>>>& family, const std::vector<double>& x,
                            std::size_t max_len, double tol) {
  std::vector<std::vector<double>> frontier{x};
  const std::size_t k = family.size();
  for (std::size_t len = 0; len <= max_len; ++len) {
    std::vector<std::vector<double>> next;
    for (const auto& u : frontier) {
      double n = 0;
      for (double e : u) n += e;
      if (n <= 0) continue;
      double avg_log = 0;
      std::vector<std::vector<double>> images;
      for (const auto& m : family) {
        std::vector<double> w(u.size(), 0.0);
        for (std::size_t j = 0; j < u.size(); ++j)
          for (std::size_t i = 0; i < u.size(); ++i) w[j] += u[i] * m[i][j];
        double s = 0;
        for (double e : w) s += e;
        avg_log += s > 0 ? std::log(s) : -INFINITY;
        for (auto& e : w) e /= (s > 0 ? s : 1);
        images.push_back(std::move(w));
      }
      const double delta = std::log(n) - avg_log / static_cast<double>(k);
      if (delta > tol) return true;
      if (len < max_len)
        for (auto& w : images) next.push_back(std::move(w));
    }
    frontier = std::move(next);
  }
  return false;
}

/// Rank by fraction-free reasoning over Q with plain Gaussian elimination.
inline std::size_t rank(std::vector<QVec> rows) {
  std::size_t r = 0;
  const std::size_t cols = rows.empty() ? 0 : rows[0].size();
  for (std::size_t c = 0; c < cols && r < rows.size(); ++c) {
    std::size_t p = r;
    while (p < rows.size() && rows[p][c] == 0) ++p;
    if (p == rows.size()) continue;
    std::swap(rows[p], rows[r]);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == r || rows[i][c] == 0) continue;
      const Q f = rows[i][c] / rows[r][c];
      for (std::size_t j = 0; j < cols; ++j) rows[i][j] -= f * rows[r][j];
    }
    ++r;
  }
  return r;
}

/// Unique solution of A x = b for square A, if A is invertible.
inline std::optional<QVec> solve(QMat a, QVec b) {
  const std::size_t n = a.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && a[p][c] == 0) ++p;
    if (p == n) return std::nullopt;
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == c || a[i][c] == 0) continue;
      const Q f = a[i][c] / a[c][c];
      for (std::size_t j = 0; j < n; ++j) a[i][j] -= f * a[c][j];
      b[i] -= f * b[c];
    }
  }
  QVec x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return x;
}

/// max Σ s over 0 <= s <= cap, s.b = 0 for b in `orth`, by enumerating every
/// vertex: each coordinate is pinned at 0, pinned at its cap, or free, and the
/// free coordinates must be determined by a square subsystem of the equalities.
inline Q box_lp_max(const QVec& cap, const std::vector<QVec>& orth) {
  const std::size_t n = cap.size();
  std::optional<Q> best;
  std::vector<int> state(n, 0);  // 0 -> zero, 1 -> cap, 2 -> free
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i < n) {
      for (int s = 0; s < 3; ++s) {
        state[i] = s;
        rec(i + 1);
      }
      return;
    }
    std::vector<std::size_t> free_idx;
    QVec fixed(n, Q(0));
    for (std::size_t k = 0; k < n; ++k) {
      if (state[k] == 1) fixed[k] = cap[k];
      if (state[k] == 2) free_idx.push_back(k);
    }
    const std::size_t f = free_idx.size();
    // Residual equalities on the free coordinates.
    std::vector<QVec> rows;
    QVec rhs;
    for (const auto& b : orth) {
      QVec row;
      Q r = 0;
      for (std::size_t k = 0; k < n; ++k) r -= b[k] * fixed[k];
      for (auto k : free_idx) row.push_back(b[k]);
      rows.push_back(row);
      rhs.push_back(r);
    }
    QVec s = fixed;
    if (f > 0) {
      // Choose f independent equalities; the vertex must satisfy the rest too.
      std::vector<std::size_t> pick;
      std::optional<QVec> sol;
      std::function<bool(std::size_t)> choose = [&](std::size_t from) -> bool {
        if (pick.size() == f) {
          QMat a;
          QVec bb;
          for (auto p : pick) {
            a.push_back(rows[p]);
            bb.push_back(rhs[p]);
          }
          sol = solve(a, bb);
          return sol.has_value();
        }
        for (std::size_t p = from; p < rows.size(); ++p) {
          pick.push_back(p);
          if (choose(p + 1)) return true;
          pick.pop_back();
        }
        return false;
      };
      if (!choose(0)) return;
      for (std::size_t t = 0; t < f; ++t) s[free_idx[t]] = (*sol)[t];
    }
    for (std::size_t k = 0; k < n; ++k)
      if (s[k] < 0 || s[k] > cap[k]) return;
    for (const auto& b : orth) {
      Q d = 0;
      for (std::size_t k = 0; k < n; ++k) d += b[k] * s[k];
      if (d != 0) return;
    }
    const Q val = total(s);
    if (!best || val > *best) best = val;
  };
  rec(0);
  return best.value_or(Q(0));
}

/// Binary or base-k representations of 1, 2, 3, ... concatenated as digit values.
inline std::vector<std::size_t> champernowne_digits(std::size_t base, std::size_t n) {
  std::vector<std::size_t> out;
  for (unsigned long long k = 1; out.size() < n; ++k) {
    std::string s;
    for (unsigned long long x = k; x; x /= base) s.insert(s.begin(), static_cast<char>('0' + x % base));
    for (char c : s) {
      if (out.size() == n) break;
      out.push_back(static_cast<std::size_t>(c - '0'));
    }
  }
  return out;
}

/// Max over words w of length len of |#occurrences(w)/(n-len+1) - k^-len|,
/// counting substrings of the digit string directly.
inline double block_deviation(const std::vector<std::size_t>& x, std::size_t base, std::size_t len) {
  std::map<std::vector<std::size_t>, std::size_t> counts;
  for (std::size_t i = 0; i + len <= x.size(); ++i)
    ++counts[std::vector<std::size_t>(x.begin() + static_cast<long>(i), x.begin() + static_cast<long>(i + len))];
  const double windows = static_cast<double>(x.size() - len + 1);
  const double expected = std::pow(static_cast<double>(base), -static_cast<double>(len));
  double blocks = std::pow(static_cast<double>(base), static_cast<double>(len));
  double dev = 0;
  for (const auto& [w, c] : counts) dev = std::max(dev, std::fabs(static_cast<double>(c) / windows - expected));
  if (static_cast<double>(counts.size()) < blocks) dev = std::max(dev, expected);  // unseen words
  return dev;
}

/// E[C_n] by summing over every run of states: probability times product of bets.
struct PathAutomaton {
  std::size_t states = 0;
  std::size_t initial = 0;
  // delta[s][a][t], gamma[s][a]
  std::vector<std::vector<QVec>> delta;
  std::vector<QVec> gamma;
};

inline Q expected_by_paths(const PathAutomaton& b, const std::vector<std::size_t>& w) {
  Q sum = 0;
  std::function<void(std::size_t, std::size_t, Q)> walk = [&](std::size_t pos, std::size_t s, Q weight) {
    if (weight == 0) return;
    if (pos == w.size()) {
      sum += weight;
      return;
    }
    const auto a = w[pos];
    const Q bet = b.gamma[s][a];
    for (std::size_t t = 0; t < b.states; ++t)
      if (b.delta[s][a][t] != 0) walk(pos + 1, t, weight * bet * b.delta[s][a][t]);
  };
  walk(0, b.initial, Q(1));
  return sum;
}

/// Hilbert distance straight from its definition, in doubles.
inline double hilbert(const std::vector<double>& u, const std::vector<double>& v) {
  double a = 0, b = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] == 0 && v[i] == 0) continue;
    a = std::max(a, u[i] / v[i]);
    b = std::max(b, v[i] / u[i]);
  }
  return std::log(a) + std::log(b);
}

/// Support of 1_E M_w via the explicit product.
inline std::set<std::size_t> act(const std::vector<QMat>& family, const std::set<std::size_t>& e,
                                 const std::vector<std::size_t>& w, std::size_t dim) {
  QVec v(dim, Q(0));
  for (auto i : e) v[i] = 1;
  for (auto a : w) v = row_times(v, family[a]);
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < dim; ++i)
    if (v[i] > 0) out.insert(i);
  return out;
}

/// Subsets reachable from singletons by words, by exhaustive closure.
inline std::set<std::set<std::size_t>> reachable_supports(const std::vector<QMat>& family, std::size_t dim) {
  std::set<std::set<std::size_t>> seen;
  std::vector<std::set<std::size_t>> todo;
  for (std::size_t i = 0; i < dim; ++i) {
    std::set<std::size_t> s{i};
    if (seen.insert(s).second) todo.push_back(s);
  }
  while (!todo.empty()) {
    auto e = todo.back();
    todo.pop_back();
    for (std::size_t a = 0; a < family.size(); ++a) {
      auto t = act(family, e, {a}, dim);
      if (seen.insert(t).second) todo.push_back(t);
    }
  }
  return seen;
}

/// Only the empty set is bottom: every reachable support can be sent to the
/// empty set by some word.
inline bool only_null_bottom(const std::vector<QMat>& family, std::size_t dim) {
  const auto reach = reachable_supports(family, dim);
  for (const auto& e : reach) {
    std::set<std::set<std::size_t>> seen{e};
    std::vector<std::set<std::size_t>> todo{e};
    bool dies = e.empty();
    while (!todo.empty() && !dies) {
      auto s = todo.back();
      todo.pop_back();
      for (std::size_t a = 0; a < family.size(); ++a) {
        auto t = act(family, s, {a}, dim);
        if (t.empty()) dies = true;
        if (seen.insert(t).second) todo.push_back(t);
      }
    }
    if (!dies) return false;
  }
  return true;
}

}  // namespace oracle
