#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "nbet/linalg.hpp"
#include "nbet/numerics.hpp"

namespace nbet {

/// Characteristic polynomial det(t I - A), coefficients in ascending degree
/// (the last one is 1). Faddeev-LeVerrier recursion.
inline std::vector<Rational> characteristic_polynomial(const Matrix<Rational>& a) {
  const std::size_t n = a.rows();
  std::vector<Rational> c(n + 1);
  c[n] = 1;
  Matrix<Rational> m(n, n);
  for (std::size_t k = 1; k <= n; ++k) {
    Matrix<Rational> next = a * m;
    for (std::size_t i = 0; i < n; ++i) next(i, i) += c[n - k + 1];
    m = std::move(next);
    const Matrix<Rational> am = a * m;
    Rational tr = 0;
    for (std::size_t i = 0; i < n; ++i) tr += am(i, i);
    c[n - k] = -tr / static_cast<long>(k);
  }
  return c;
}

inline Rational eval_polynomial(const std::vector<Rational>& c, const Rational& x) {
  Rational acc = 0;
  for (std::size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
  return acc;
}

/// The rational with the smallest denominator in [lo, hi], for 0 <= lo <= hi.
inline Rational simplest_between(Rational lo, Rational hi) {
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), lo.get_num_mpz_t(), lo.get_den_mpz_t());
  if (Rational(fl) == lo) return Rational(fl);
  if (Rational(fl + 1) <= hi) return Rational(fl + 1);
  Rational lo_frac = lo - Rational(fl);
  Rational hi_frac = hi - Rational(fl);
  Rational inner = simplest_between(Rational(1 / hi_frac), Rational(1 / lo_frac));
  Rational out = Rational(fl) + Rational(1 / inner);
  out.canonicalize();
  return out;
}

struct PerronPair {
  Rational value;
  Vector<Rational> left;  // positive, unit 1-norm, left * B = value * left
};

namespace detail {

inline double perron_estimate(const Matrix<Rational>& b) {
  const Matrix<double> bf = matrix_cast<double>(b);
  Vector<double> v(b.rows(), 1.0 / static_cast<double>(b.rows()));
  double lambda = 0.0;
  for (int it = 0; it < 2000; ++it) {
    Vector<double> w = vec_mat(v, bf);
    const double s = norm1(w);
    if (s <= 0.0) return 0.0;
    for (auto& x : w) x /= s;
    lambda = s;
    v = std::move(w);
  }
  return lambda;
}

}  // namespace detail

/// Exact Perron root and left eigenvector of a strictly positive matrix when
/// the root is rational; nullopt when it is not.
inline std::optional<PerronPair> rational_perron(const Matrix<Rational>& b) {
  const std::size_t n = b.rows();
  if (n == 0 || b.cols() != n) fail(ErrorKind::Malformed, "Perron block must be square");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (sgn(b(i, j)) <= 0) fail(ErrorKind::NotPositive, "Perron block must be strictly positive");

  auto certify = [&](const Rational& lambda) -> std::optional<PerronPair> {
    Matrix<Rational> sys = b.transpose();
    for (std::size_t i = 0; i < n; ++i) sys(i, i) -= lambda;
    auto ns = nullspace(sys);
    if (ns.size() != 1) return std::nullopt;
    Vector<Rational> y = ns[0];
    const int s = sgn(y[0]);
    for (const auto& e : y)
      if (sgn(e) != s || s == 0) return std::nullopt;
    const Rational total = norm1(y);
    for (auto& e : y) e /= total;
    return PerronPair{lambda, std::move(y)};
  };

  if (n == 1) return PerronPair{b(0, 0), {Rational(1)}};

  std::vector<Rational> poly = characteristic_polynomial(b);
  // Integer primitive form; its leading coefficient bounds root denominators.
  mpz_class lcm = 1;
  for (const auto& c : poly) mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), c.get_den_mpz_t());
  mpz_class g = 0;
  for (auto& c : poly) {
    c *= lcm;
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_num_mpz_t());
  }
  for (auto& c : poly) c /= g;
  const Rational q = abs(poly.back());
  const Rational min_width = 1 / (q * q);

  auto sign_at = [&](const Rational& x) { return sgn(eval_polynomial(poly, x)); };

  Rational row_min, row_max;
  for (std::size_t i = 0; i < n; ++i) {
    Rational s = 0;
    for (std::size_t j = 0; j < n; ++j) s += b(i, j);
    if (i == 0 || s < row_min) row_min = s;
    if (i == 0 || s > row_max) row_max = s;
  }
  if (row_min == row_max) return certify(row_min);

  const double est = detail::perron_estimate(b);
  Rational lo(est * (1 - 1e-9));
  Rational hi(est * (1 + 1e-9));
  if (lo < row_min) lo = row_min;
  if (hi > row_max) hi = row_max;
  if (sign_at(lo) == 0) return certify(lo);
  if (sign_at(hi) == 0) return certify(hi);
  if (sign_at(lo) == sign_at(hi)) {
    lo = row_min;
    hi = row_max;
    if (sign_at(lo) == 0) return certify(lo);
    if (sign_at(hi) == 0) return certify(hi);
    if (sign_at(lo) == sign_at(hi)) return std::nullopt;
  }
  const int lo_sign = sign_at(lo);
  for (int guard = 0; guard < 100000; ++guard) {
    const Rational cand = simplest_between(lo, hi);
    if (sign_at(cand) == 0) return certify(cand);
    if (hi - lo < min_width) return std::nullopt;
    const Rational third = (hi - lo) / 3;
    const Rational mid = simplest_between(Rational(lo + third), Rational(hi - third));
    const int s = sign_at(mid);
    if (s == 0) return certify(mid);
    if (s == lo_sign) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::nullopt;
}

}  // namespace nbet
