#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "nbet/numerics.hpp"

namespace nbet {

namespace detail {

template <class T>
double max_abs(const Vector<T>& v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, std::fabs(to_double(x)));
  return m;
}

template <class T>
bool is_zero_entry(const T& x, double threshold) {
  if constexpr (is_exact_v<T>) {
    (void)threshold;
    return sgn(x) == 0;
  } else {
    return std::fabs(x) <= threshold;
  }
}

}  // namespace detail

/// Incrementally maintained reduced row echelon basis of a span.
/// Float mode uses a pivot threshold relative to the input's largest entry.
template <class T>
class SpanBuilder {
 public:
  explicit SpanBuilder(std::size_t dim, double pivot_tol = 1e-10) : dim_(dim), tol_(pivot_tol) {}

  std::size_t dim() const { return dim_; }
  std::size_t rank() const { return rows_.size(); }
  const std::vector<Vector<T>>& basis() const { return rows_; }
  const std::vector<std::size_t>& pivots() const { return pivots_; }

  /// Adds v to the span. Returns true when the rank grew.
  bool add(const Vector<T>& v) {
    if (v.size() != dim_) fail(ErrorKind::Malformed, "span vector dimension mismatch");
    Vector<T> r = reduce(v);
    const double threshold = tol_ * std::max(1.0, detail::max_abs(v));
    std::size_t pivot = dim_;
    double best = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
      if (detail::is_zero_entry(r[j], threshold)) {
        if constexpr (!is_exact_v<T>) r[j] = 0.0;
        continue;
      }
      if constexpr (is_exact_v<T>) {
        pivot = j;
        break;
      } else if (std::fabs(r[j]) > best) {
        best = std::fabs(r[j]);
        pivot = j;
      }
    }
    if (pivot == dim_) return false;
    const T inv = T(1) / r[pivot];
    for (auto& x : r) x *= inv;
    r[pivot] = T(1);
    for (std::size_t k = 0; k < rows_.size(); ++k) {
      const T factor = rows_[k][pivot];
      if (ScalarTraits<T>::sign(factor) == 0) continue;
      for (std::size_t j = 0; j < dim_; ++j) rows_[k][j] -= factor * r[j];
      rows_[k][pivot] = T(0);
    }
    rows_.push_back(std::move(r));
    pivots_.push_back(pivot);
    return true;
  }

  bool contains(const Vector<T>& v) const {
    const Vector<T> r = reduce(v);
    const double threshold = tol_ * std::max(1.0, detail::max_abs(v));
    return std::all_of(r.begin(), r.end(), [&](const T& x) { return detail::is_zero_entry(x, threshold); });
  }

 private:
  Vector<T> reduce(Vector<T> v) const {
    for (std::size_t k = 0; k < rows_.size(); ++k) {
      const T factor = v[pivots_[k]];
      if (ScalarTraits<T>::sign(factor) == 0) continue;
      for (std::size_t j = 0; j < dim_; ++j) v[j] -= factor * rows_[k][j];
      v[pivots_[k]] = T(0);
    }
    return v;
  }

  std::size_t dim_;
  double tol_;
  std::vector<Vector<T>> rows_;
  std::vector<std::size_t> pivots_;
};

/// A basis of the span of the given vectors.
template <class T>
std::vector<Vector<T>> row_space_basis(const std::vector<Vector<T>>& vectors, std::size_t dim) {
  SpanBuilder<T> span(dim);
  for (const auto& v : vectors) span.add(v);
  return span.basis();
}

template <class T>
std::vector<Vector<T>> row_space_basis(const std::vector<Vector<T>>& vectors) {
  if (vectors.empty()) return {};
  return row_space_basis(vectors, vectors.front().size());
}

/// Basis of {c : A c = 0}.
template <class T>
std::vector<Vector<T>> nullspace(const Matrix<T>& a, double pivot_tol = 1e-10) {
  const std::size_t n = a.cols();
  SpanBuilder<T> span(n, pivot_tol);
  for (std::size_t i = 0; i < a.rows(); ++i) span.add(a.row(i));

  // Row echelon rows have unit pivots and zeros in other pivot columns.
  const auto& rows = span.basis();
  std::vector<std::optional<std::size_t>> pivot_row(n);
  for (std::size_t k = 0; k < rows.size(); ++k) pivot_row[span.pivots()[k]] = k;

  std::vector<Vector<T>> out;
  for (std::size_t free = 0; free < n; ++free) {
    if (pivot_row[free]) continue;
    Vector<T> c(n, T(0));
    c[free] = T(1);
    for (std::size_t j = 0; j < n; ++j)
      if (pivot_row[j]) c[j] = -rows[*pivot_row[j]][free];
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace nbet
