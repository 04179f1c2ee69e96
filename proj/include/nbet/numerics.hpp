#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdio>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "nbet/error.hpp"

namespace nbet {

using Rational = mpq_class;

/// Default comparison tolerance for float mode.
inline constexpr double kDefaultEps = 1e-9;

// ---------------------------------------------------------------------------
// Scalars
// ---------------------------------------------------------------------------

template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static constexpr const char* mode_name = "exact";

  static int sign(const Rational& x, double /*tol*/ = 0.0) { return sgn(x); }
  static double to_double(const Rational& x) { return x.get_d(); }
  static Rational from_double(double d) { return Rational(d); }
  static std::string to_string(const Rational& x) { return x.get_str(); }
};

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  static constexpr const char* mode_name = "float";

  static int sign(double x, double tol = 0.0) {
    if (x > tol) return 1;
    if (x < -tol) return -1;
    return 0;
  }
  static double to_double(double x) { return x; }
  static double from_double(double d) { return d; }
  static std::string to_string(double x);
};

inline std::string ScalarTraits<double>::to_string(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T>
inline constexpr bool is_exact_v = ScalarTraits<T>::exact;

template <class T>
double to_double(const T& x) {
  return ScalarTraits<T>::to_double(x);
}

template <class T>
std::string to_string(const T& x) {
  return ScalarTraits<T>::to_string(x);
}

template <class To, class From>
To scalar_cast(const From& x) {
  if constexpr (std::is_same_v<To, From>) {
    return x;
  } else if constexpr (std::is_same_v<To, double>) {
    return ScalarTraits<From>::to_double(x);
  } else {
    return ScalarTraits<To>::from_double(ScalarTraits<From>::to_double(x));
  }
}

/// Natural logarithm of a non-negative rational without overflow or
/// underflow in the intermediate conversion; -inf for zero.
inline double log_of(const Rational& x) {
  if (sgn(x) <= 0) {
    if (sgn(x) == 0) return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
  }
  long en = 0, ed = 0;
  const double mn = mpz_get_d_2exp(&en, x.get_num_mpz_t());
  const double md = mpz_get_d_2exp(&ed, x.get_den_mpz_t());
  return std::log(mn) - std::log(md) +
         static_cast<double>(en - ed) * std::numbers::ln2;
}

inline double log_of(double x) {
  if (x == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(x);
}

/// Parses "p/q", integers and decimals (optionally with an exponent) into an
/// exact rational.
inline Rational parse_rational(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
      s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
      s.remove_suffix(1);
    return s;
  };
  std::string_view s = trim(text);
  if (s.empty()) fail(ErrorKind::Parse, "empty number");

  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    const Rational num = parse_rational(s.substr(0, slash));
    const Rational den = parse_rational(s.substr(slash + 1));
    if (sgn(den) == 0) fail(ErrorKind::Parse, "zero denominator in '" + std::string(s) + "'");
    return Rational(num / den);
  }

  bool negative = false;
  std::size_t i = 0;
  if (s[i] == '+' || s[i] == '-') {
    negative = s[i] == '-';
    ++i;
  }
  std::string digits;
  long frac_len = 0;
  bool seen_dot = false, seen_digit = false;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      seen_digit = true;
      if (seen_dot) ++frac_len;
    } else if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else {
      break;
    }
  }
  if (!seen_digit) fail(ErrorKind::Parse, "not a number: '" + std::string(s) + "'");
  long exponent = 0;
  if (i < s.size()) {
    if (s[i] != 'e' && s[i] != 'E') fail(ErrorKind::Parse, "not a number: '" + std::string(s) + "'");
    ++i;
    const std::string exp_text(s.substr(i));
    if (exp_text.empty()) fail(ErrorKind::Parse, "missing exponent in '" + std::string(s) + "'");
    std::size_t used = 0;
    try {
      exponent = std::stol(exp_text, &used);
    } catch (const std::exception&) {
      fail(ErrorKind::Parse, "bad exponent in '" + std::string(s) + "'");
    }
    if (used != exp_text.size()) fail(ErrorKind::Parse, "bad exponent in '" + std::string(s) + "'");
  }
  mpz_class num(digits, 10);
  const long shift = exponent - frac_len;
  mpz_class pow10;
  mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(shift < 0 ? -shift : shift));
  Rational r = shift >= 0 ? Rational(num * pow10) : Rational(num, pow10);
  r.canonicalize();
  if (negative) r = -r;
  return r;
}

template <class T>
T parse_scalar(std::string_view text);

template <>
inline Rational parse_scalar<Rational>(std::string_view text) {
  return parse_rational(text);
}

template <>
inline double parse_scalar<double>(std::string_view text) {
  return parse_rational(text).get_d();
}

// ---------------------------------------------------------------------------
// Vectors and matrices
// ---------------------------------------------------------------------------

template <class T>
using Vector = std::vector<T>;

template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) fail(ErrorKind::Malformed, "matrix data size mismatch");
  }
  Matrix(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    for (const auto& r : rows) {
      if (r.size() != cols_) fail(ErrorKind::Malformed, "ragged matrix literal");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  Vector<T> row(std::size_t i) const {
    return Vector<T>(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                     data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <class T>
Matrix<T> operator*(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows()) fail(ErrorKind::Malformed, "matrix product dimension mismatch");
  Matrix<T> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      if (ScalarTraits<T>::sign(a(i, k)) == 0) continue;
      const T& aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

/// Row vector times matrix: v M.
template <class T>
Vector<T> vec_mat(const Vector<T>& v, const Matrix<T>& m) {
  if (v.size() != m.rows()) fail(ErrorKind::Malformed, "vector-matrix dimension mismatch");
  Vector<T> out(m.cols(), T(0));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (ScalarTraits<T>::sign(v[i]) == 0) continue;
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += v[i] * m(i, j);
  }
  return out;
}

/// Matrix times column vector: M c.
template <class T>
Vector<T> mat_vec(const Matrix<T>& m, const Vector<T>& c) {
  if (c.size() != m.cols()) fail(ErrorKind::Malformed, "matrix-vector dimension mismatch");
  Vector<T> out(m.rows(), T(0));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i] += m(i, j) * c[j];
  return out;
}

template <class T>
T dot(const Vector<T>& a, const Vector<T>& b) {
  if (a.size() != b.size()) fail(ErrorKind::Malformed, "dot product dimension mismatch");
  T s(0);
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Sum of entries; equals the 1-norm on non-negative vectors.
template <class T>
T norm1(const Vector<T>& v) {
  T s(0);
  for (const auto& x : v) s += x;
  return s;
}

/// Sum of absolute values, for signed vectors.
template <class T>
T abs_norm1(const Vector<T>& v) {
  T s(0);
  for (const auto& x : v) s += ScalarTraits<T>::sign(x) < 0 ? T(-x) : x;
  return s;
}

template <class T>
Vector<T> scaled(Vector<T> v, const T& factor) {
  for (auto& x : v) x *= factor;
  return v;
}

template <class T>
Vector<T> unit_basis(std::size_t dim, std::size_t i) {
  Vector<T> e(dim, T(0));
  e.at(i) = T(1);
  return e;
}

template <class To, class From>
Vector<To> vector_cast(const Vector<From>& v) {
  Vector<To> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(scalar_cast<To>(x));
  return out;
}

template <class To, class From>
Matrix<To> matrix_cast(const Matrix<From>& m) {
  Matrix<To> out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = scalar_cast<To>(m(i, j));
  return out;
}

// ---------------------------------------------------------------------------
// Index sets
// ---------------------------------------------------------------------------

inline constexpr std::size_t kMaxDim = 64;

/// Subset of [0, m) stored as a bitmask. Printed 1-based.
class IndexSet {
 public:
  constexpr IndexSet() = default;
  constexpr explicit IndexSet(std::uint64_t bits) : bits_(bits) {}

  static IndexSet full(std::size_t m) {
    return IndexSet(m >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << m) - 1));
  }
  static IndexSet singleton(std::size_t i) { return IndexSet(std::uint64_t{1} << i); }
  static IndexSet of(std::initializer_list<std::size_t> members) {
    IndexSet s;
    for (auto i : members) s.insert(i);
    return s;
  }

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
  bool contains(std::size_t i) const { return (bits_ >> i) & 1u; }
  void insert(std::size_t i) { bits_ |= std::uint64_t{1} << i; }
  bool subset_of(IndexSet other) const { return (bits_ & ~other.bits_) == 0; }

  /// Members in ascending order, 0-based.
  std::vector<std::size_t> members() const {
    std::vector<std::size_t> out;
    for (std::uint64_t b = bits_; b; b &= b - 1) out.push_back(static_cast<std::size_t>(std::countr_zero(b)));
    return out;
  }

  std::string to_string() const {
    std::string s = "{";
    bool first = true;
    for (auto i : members()) {
      if (!first) s += ",";
      s += std::to_string(i + 1);
      first = false;
    }
    return s + "}";
  }

  friend constexpr IndexSet operator|(IndexSet a, IndexSet b) { return IndexSet(a.bits_ | b.bits_); }
  friend constexpr IndexSet operator&(IndexSet a, IndexSet b) { return IndexSet(a.bits_ & b.bits_); }
  friend constexpr bool operator==(IndexSet a, IndexSet b) = default;
  friend constexpr auto operator<=>(IndexSet a, IndexSet b) = default;

 private:
  std::uint64_t bits_ = 0;
};

/// {i : v(i) > 0}. In float mode an entry counts as zero when it is at most
/// eps * norm1(v).
template <class T>
IndexSet support(const Vector<T>& v, double eps = kDefaultEps) {
  IndexSet s;
  if constexpr (is_exact_v<T>) {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (sgn(v[i]) > 0) s.insert(i);
  } else {
    const double threshold = eps * norm1(v);
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] > threshold && v[i] > 0.0) s.insert(i);
  }
  return s;
}

template <class T>
Vector<T> indicator(IndexSet e, std::size_t dim) {
  Vector<T> v(dim, T(0));
  for (auto i : e.members()) v[i] = T(1);
  return v;
}

/// M^{[rows x cols]}, indices kept in ascending order.
template <class T>
Matrix<T> submatrix(const Matrix<T>& m, IndexSet rowset, IndexSet colset) {
  if (rowset.empty() || colset.empty()) fail(ErrorKind::DegenerateSelection, "empty row or column selection");
  const auto r = rowset.members();
  const auto c = colset.members();
  if (r.back() >= m.rows() || c.back() >= m.cols())
    fail(ErrorKind::DegenerateSelection, "selection outside matrix range");
  Matrix<T> out(r.size(), c.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j) out(i, j) = m(r[i], c[j]);
  return out;
}

}  // namespace nbet
