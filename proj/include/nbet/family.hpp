#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "nbet/numerics.hpp"
#include "nbet/word.hpp"

namespace nbet {

template <class T>
class MatrixFamily {
 public:
  MatrixFamily() = default;

  MatrixFamily(std::vector<std::string> alphabet, std::vector<Matrix<T>> matrices, double eps = kDefaultEps)
      : alphabet_(std::move(alphabet)), matrices_(std::move(matrices)), eps_(eps) {
    if (alphabet_.empty()) fail(ErrorKind::Malformed, "alphabet is empty");
    if (alphabet_.size() != matrices_.size()) fail(ErrorKind::Malformed, "one matrix per symbol required");
    for (std::size_t a = 0; a < alphabet_.size(); ++a) {
      if (alphabet_[a].empty()) fail(ErrorKind::Malformed, "empty symbol");
      for (std::size_t b = 0; b < a; ++b)
        if (alphabet_[a] == alphabet_[b]) fail(ErrorKind::Malformed, "duplicate symbol '" + alphabet_[a] + "'");
    }
    dim_ = matrices_.front().rows();
    if (dim_ == 0) fail(ErrorKind::Malformed, "dimension must be at least 1");
    if (dim_ > kMaxDim) fail(ErrorKind::Malformed, "dimension above " + std::to_string(kMaxDim) + " is not supported");
    for (std::size_t a = 0; a < matrices_.size(); ++a) {
      const auto& m = matrices_[a];
      if (m.rows() != dim_ || m.cols() != dim_)
        fail(ErrorKind::Malformed, "matrix for '" + alphabet_[a] + "' is not " + std::to_string(dim_) + "x" + std::to_string(dim_));
      for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = 0; j < dim_; ++j)
          if (ScalarTraits<T>::sign(m(i, j)) < 0)
            fail(ErrorKind::NotNonNegative, "negative entry in matrix '" + alphabet_[a] + "' at (" +
                                                std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
    }
  }

  std::size_t dim() const { return dim_; }
  std::size_t letters() const { return alphabet_.size(); }
  double eps() const { return eps_; }
  const std::vector<std::string>& alphabet() const { return alphabet_; }
  const Matrix<T>& matrix(std::size_t a) const { return matrices_.at(a); }
  const std::vector<Matrix<T>>& matrices() const { return matrices_; }

  std::size_t symbol_index(std::string_view sym) const { return nbet::symbol_index(alphabet_, sym); }

  Word parse_word(std::string_view text) const { return nbet::parse_word(alphabet_, text); }
  std::string format_word(const Word& w) const { return nbet::format_word(alphabet_, w); }

 private:
  std::vector<std::string> alphabet_;
  std::vector<Matrix<T>> matrices_;
  std::size_t dim_ = 0;
  double eps_ = kDefaultEps;
};

template <class To, class From>
MatrixFamily<To> family_cast(const MatrixFamily<From>& f) {
  std::vector<Matrix<To>> ms;
  for (const auto& m : f.matrices()) ms.push_back(matrix_cast<To>(m));
  return MatrixFamily<To>(f.alphabet(), std::move(ms), f.eps());
}

/// The subfamily {M_a^{[K x K]}}.
template <class T>
MatrixFamily<T> restrict_family(const MatrixFamily<T>& f, IndexSet k) {
  std::vector<Matrix<T>> ms;
  for (const auto& m : f.matrices()) ms.push_back(submatrix(m, k, k));
  return MatrixFamily<T>(f.alphabet(), std::move(ms), f.eps());
}

// ---------------------------------------------------------------------------
// Fairness
// ---------------------------------------------------------------------------

enum class FairnessKind { Fair, SuperfairStrict, NotSuperfair };

inline std::string_view to_string(FairnessKind k) {
  switch (k) {
    case FairnessKind::Fair: return "Fair";
    case FairnessKind::SuperfairStrict: return "SuperfairStrict";
    case FairnessKind::NotSuperfair: return "NotSuperfair";
  }
  return "?";
}

template <class T>
struct FairnessWitness {
  std::size_t index;  // 0-based basis index
  T row_mass;         // sum over letters of norm1(e_i M_a)
};

template <class T>
struct FairnessVerdict {
  FairnessKind kind = FairnessKind::Fair;
  std::vector<FairnessWitness<T>> witnesses;
};

/// Row masses sum_a norm1(e_i M_a) compared against |A|. Witnesses list the
/// rows that deviate in the direction that determines the verdict.
template <class T>
FairnessVerdict<T> validate(const MatrixFamily<T>& f) {
  const T target(static_cast<long>(f.letters()));
  const double tol = is_exact_v<T> ? 0.0 : f.eps() * static_cast<double>(f.letters());
  std::vector<FairnessWitness<T>> above, below;
  for (std::size_t i = 0; i < f.dim(); ++i) {
    T mass(0);
    for (const auto& m : f.matrices())
      for (std::size_t j = 0; j < f.dim(); ++j) mass += m(i, j);
    const int s = ScalarTraits<T>::sign(T(mass - target), tol);
    if (s > 0) above.push_back({i, mass});
    if (s < 0) below.push_back({i, mass});
  }
  FairnessVerdict<T> v;
  if (!above.empty()) {
    v.kind = FairnessKind::NotSuperfair;
    v.witnesses = std::move(above);
  } else if (!below.empty()) {
    v.kind = FairnessKind::SuperfairStrict;
    v.witnesses = std::move(below);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Words and capital
// ---------------------------------------------------------------------------

template <class T>
Matrix<T> word_matrix(const MatrixFamily<T>& f, const Word& w) {
  Matrix<T> m = Matrix<T>::identity(f.dim());
  for (auto a : w) {
    if (a >= f.letters()) fail(ErrorKind::UnknownSymbol, "letter index out of range");
    m = m * f.matrix(a);
  }
  return m;
}

/// v M_w, applied letter by letter.
template <class T>
Vector<T> apply_word(const MatrixFamily<T>& f, Vector<T> v, const Word& w) {
  for (auto a : w) {
    if (a >= f.letters()) fail(ErrorKind::UnknownSymbol, "letter index out of range");
    v = vec_mat(v, f.matrix(a));
  }
  return v;
}

/// ln norm1(v M_w); -inf when the product vanishes.
template <class T>
double log_capital(const MatrixFamily<T>& f, const Vector<T>& v, const Word& w) {
  return log_of(norm1(apply_word(f, v, w)));
}

/// min(1, ln|u| - (1/|A|) sum_a ln|u M_a|), exactly 0 when every letter
/// preserves the norm and 1 when some letter kills u.
template <class T>
double delta_risk(const MatrixFamily<T>& f, const Vector<T>& u) {
  const T total = norm1(u);
  if (ScalarTraits<T>::sign(total) <= 0) fail(ErrorKind::ZeroVector, "risk of the zero vector");
  bool all_equal = true;
  double sum_log = 0.0;
  for (const auto& m : f.matrices()) {
    const T n = norm1(vec_mat(u, m));
    if (ScalarTraits<T>::sign(n) <= 0) return 1.0;
    if (n != total) all_equal = false;
    if constexpr (is_exact_v<T>) {
      sum_log += log_of(Rational(n / total));
    } else {
      sum_log += std::log(n / total);
    }
  }
  if (all_equal) return 0.0;
  const double d = -sum_log / static_cast<double>(f.letters());
  return std::clamp(d, 0.0, 1.0);
}

struct CumulativeRisk {
  double value = 0.0;
  bool dead_prefix = false;  // some strict prefix annihilated v
  std::size_t terms = 0;     // number of prefixes summed
};

/// Sum of delta_risk(v M_{w'}) over strict prefixes w' of w.
template <class T>
CumulativeRisk cumulative_risk(const MatrixFamily<T>& f, const Vector<T>& v, const Word& w) {
  if (ScalarTraits<T>::sign(norm1(v)) <= 0) fail(ErrorKind::ZeroVector, "cumulative risk of the zero vector");
  CumulativeRisk out;
  Vector<T> cur = v;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (ScalarTraits<T>::sign(norm1(cur)) <= 0) {
      out.dead_prefix = true;
      return out;
    }
    out.value += delta_risk(f, cur);
    ++out.terms;
    cur = vec_mat(cur, f.matrix(w[k]));
  }
  return out;
}

}  // namespace nbet
