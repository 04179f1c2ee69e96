#pragma once

#include <cmath>
#include <limits>

#include "nbet/numerics.hpp"

namespace nbet {

/// Hilbert projective distance between two non-negative vectors with the
/// same support. Ratios are formed exactly before the logarithm.
template <class T>
double hilbert_distance(const Vector<T>& u, const Vector<T>& v, double eps = kDefaultEps) {
  if (u.size() != v.size()) fail(ErrorKind::Malformed, "dimension mismatch");
  const IndexSet su = support(u, eps);
  const IndexSet sv = support(v, eps);
  if (su.empty() || sv.empty()) fail(ErrorKind::ZeroVector, "Hilbert distance of a zero vector");
  if (su != sv) fail(ErrorKind::SupportMismatch, "supports " + su.to_string() + " and " + sv.to_string() + " differ");
  const auto idx = su.members();
  T max_uv = u[idx[0]] / v[idx[0]];
  T max_vu = v[idx[0]] / u[idx[0]];
  for (auto i : idx) {
    const T a = u[i] / v[i];
    const T b = v[i] / u[i];
    if (a > max_uv) max_uv = a;
    if (b > max_vu) max_vu = b;
  }
  if constexpr (is_exact_v<T>) {
    // The product of both maxima is >= 1; one logarithm keeps cancellation out.
    const Rational prod = max_uv * max_vu;
    return prod == 1 ? 0.0 : std::max(0.0, log_of(prod));
  } else {
    return std::max(0.0, std::log(max_uv) + std::log(max_vu));
  }
}

/// Birkhoff contraction coefficient tanh(D/4), where D is the projective
/// diameter of the image cone, computed from the largest cross ratio.
template <class T>
double birkhoff_tau(const Matrix<T>& m) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (ScalarTraits<T>::sign(m(i, j)) <= 0) fail(ErrorKind::NotPositive, "matrix has a non-positive entry");
  T worst(1);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.rows(); ++j)
      for (std::size_t k = 0; k < m.cols(); ++k)
        for (std::size_t l = 0; l < m.cols(); ++l) {
          const T r = (m(i, k) * m(j, l)) / (m(j, k) * m(i, l));
          if (r > worst) worst = r;
        }
  const double s = std::sqrt(to_double(worst));
  if (!std::isfinite(s)) return 1.0;
  return (s - 1.0) / (s + 1.0);
}

}  // namespace nbet
