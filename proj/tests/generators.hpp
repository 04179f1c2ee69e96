#pragma once

// Seeded random instances for the property suites.

#include <random>
#include <vector>

#include "nbet/nbet.hpp"
#include "oracles.hpp"

namespace gen {

using nbet::Matrix;
using nbet::MatrixFamily;
using nbet::Rational;
using nbet::Vector;
using Rng = std::mt19937_64;

inline long uniform_int(Rng& rng, long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); }
inline bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

/// mpq_class(num, den) does not reduce; comparisons need canonical values.
inline Rational ratio(long num, long den) {
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline Rational small_rational(Rng& rng, long max_num = 9, long max_den = 6) {
  return ratio(uniform_int(rng, 1, max_num), uniform_int(rng, 1, max_den));
}

/// Row i gets random non-negative weights across all letters, rescaled so the
/// row mass is exactly |A| (fair) or a random fraction of it (strict).
inline MatrixFamily<Rational> superfair_family(Rng& rng, std::size_t m, std::size_t letters, double zero_prob,
                                               double strict_prob) {
  std::vector<Matrix<Rational>> ms(letters, Matrix<Rational>(m, m));
  for (std::size_t i = 0; i < m; ++i) {
    Rational mass = 0;
    while (mass == 0) {
      for (std::size_t a = 0; a < letters; ++a)
        for (std::size_t j = 0; j < m; ++j) {
          ms[a](i, j) = coin(rng, zero_prob) ? Rational(0) : small_rational(rng);
          mass += ms[a](i, j);
        }
    }
    Rational target(static_cast<long>(letters));
    if (coin(rng, strict_prob)) target *= ratio(uniform_int(rng, 1, 7), 8);
    for (std::size_t a = 0; a < letters; ++a)
      for (std::size_t j = 0; j < m; ++j) ms[a](i, j) = ms[a](i, j) * target / mass;
  }
  nbet::Alphabet alphabet;
  for (std::size_t a = 0; a < letters; ++a) alphabet.push_back(std::string(1, static_cast<char>('0' + a)));
  return MatrixFamily<Rational>(alphabet, std::move(ms));
}

/// A betting automaton; each state independently never bets with
/// probability `idle_prob`, otherwise bets a random split of |A|.
inline nbet::BettingAutomaton<Rational> automaton(Rng& rng, std::size_t states, std::size_t letters, double idle_prob,
                                                  double sparse_prob = 0.4) {
  nbet::BettingAutomaton<Rational> b;
  for (std::size_t s = 0; s < states; ++s) b.states.push_back("s" + std::to_string(s));
  for (std::size_t a = 0; a < letters; ++a) b.alphabet.push_back(std::string(1, static_cast<char>('a' + a)));
  b.initial = 0;
  b.delta.assign(states, std::vector<Vector<Rational>>(letters, Vector<Rational>(states, Rational(0))));
  b.gamma.assign(states, std::vector<Rational>(letters, Rational(0)));
  for (std::size_t s = 0; s < states; ++s) {
    for (std::size_t a = 0; a < letters; ++a) {
      Rational sum = 0;
      auto& row = b.delta[s][a];
      while (sum == 0) {
        for (std::size_t t = 0; t < states; ++t) {
          row[t] = coin(rng, sparse_prob) ? Rational(0) : small_rational(rng);
          sum += row[t];
        }
      }
      for (auto& p : row) p /= sum;
    }
    if (coin(rng, idle_prob)) {
      for (auto& g : b.gamma[s]) g = 1;
    } else {
      Rational sum = 0;
      for (auto& g : b.gamma[s]) {
        g = coin(rng, 0.25) ? Rational(0) : small_rational(rng);
        sum += g;
      }
      if (sum == 0) {
        b.gamma[s][0] = 1;
        sum = 1;
      }
      for (auto& g : b.gamma[s]) g = g * static_cast<long>(letters) / sum;
    }
  }
  return b;
}

inline Vector<Rational> nonneg_vector(Rng& rng, std::size_t m, double zero_prob = 0.2) {
  Vector<Rational> v(m, Rational(0));
  while (nbet::norm1(v) == 0)
    for (auto& e : v) e = coin(rng, zero_prob) ? Rational(0) : small_rational(rng);
  return v;
}

inline Vector<Rational> positive_vector(Rng& rng, std::size_t m) { return nonneg_vector(rng, m, 0.0); }

inline Vector<Rational> with_support(Rng& rng, const nbet::IndexSet& s, std::size_t m) {
  Vector<Rational> v(m, Rational(0));
  for (auto i : s.members()) v[i] = small_rational(rng);
  return v;
}

inline Matrix<Rational> nonneg_matrix(Rng& rng, std::size_t m, double zero_prob) {
  Matrix<Rational> a(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) a(i, j) = coin(rng, zero_prob) ? Rational(0) : small_rational(rng);
  return a;
}

inline nbet::Word word(Rng& rng, std::size_t letters, std::size_t max_len) {
  nbet::Word w(static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long>(max_len))));
  for (auto& a : w) a = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long>(letters) - 1));
  return w;
}

inline std::vector<oracle::QMat> to_oracle(const MatrixFamily<Rational>& f) {
  std::vector<oracle::QMat> out;
  for (const auto& m : f.matrices()) {
    oracle::QMat q(m.rows(), oracle::QVec(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) q[i][j] = m(i, j);
    out.push_back(std::move(q));
  }
  return out;
}

inline std::vector<std::vector<std::vector<double>>> to_oracle_double(const MatrixFamily<Rational>& f) {
  std::vector<std::vector<std::vector<double>>> out;
  for (const auto& m : f.matrices()) {
    std::vector<std::vector<double>> d(m.rows(), std::vector<double>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) d[i][j] = m(i, j).get_d();
    out.push_back(std::move(d));
  }
  return out;
}

/// Mixed source of superfair families that satisfy the strong connectivity
/// hypothesis: plain random families and families from random automata, some
/// of whose states never bet.
inline MatrixFamily<Rational> star_family(Rng& rng, std::size_t max_dim) {
  for (;;) {
    const auto m = static_cast<std::size_t>(uniform_int(rng, 1, static_cast<long>(max_dim)));
    MatrixFamily<Rational> f;
    switch (uniform_int(rng, 0, 2)) {
      case 0:
        f = superfair_family(rng, m, 2, 0.5, 0.3);
        break;
      case 1:
        f = nbet::to_matrix_family(automaton(rng, m, 2, 0.5)).family;
        break;
      default:
        f = nbet::to_matrix_family(automaton(rng, m, 2, 1.0)).family;
        if (coin(rng, 0.5)) {
          // One betting state on top of idle ones.
          auto b = automaton(rng, m, 2, 1.0);
          b.gamma[0] = {Rational(1) + ratio(1, uniform_int(rng, 2, 5)), Rational(0)};
          b.gamma[0][1] = Rational(2) - b.gamma[0][0];
          f = nbet::to_matrix_family(b).family;
        }
    }
    if (nbet::star_check(nbet::reachability_graph(f))) return f;
  }
}

}  // namespace gen
