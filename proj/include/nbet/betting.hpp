#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <string>
#include <thread>
#include <vector>

#include "nbet/family.hpp"
#include "nbet/rng.hpp"
#include "nbet/sequences.hpp"

namespace nbet {

/// Probabilistic betting automaton: transition distributions delta[s][a]
/// over states and bets gamma[s][a].
template <class T>
struct BettingAutomaton {
  std::vector<std::string> states;
  Alphabet alphabet;
  std::size_t initial = 0;
  std::vector<std::vector<Vector<T>>> delta;  // [state][letter] -> distribution over states
  std::vector<std::vector<T>> gamma;          // [state][letter] -> bet
  double eps = kDefaultEps;

  std::size_t state_index(std::string_view name) const {
    for (std::size_t s = 0; s < states.size(); ++s)
      if (states[s] == name) return s;
    fail(ErrorKind::UnknownSymbol, "unknown state '" + std::string(name) + "'");
  }
};

enum class AutomatonIssueKind { Shape, Probability, NegativeBet, BetSum };

struct AutomatonIssue {
  AutomatonIssueKind kind;
  std::string state;
  std::string symbol;  // empty for per-state issues
  std::string message;
};

inline std::string_view to_string(AutomatonIssueKind k) {
  switch (k) {
    case AutomatonIssueKind::Shape: return "Shape";
    case AutomatonIssueKind::Probability: return "Probability";
    case AutomatonIssueKind::NegativeBet: return "NegativeBet";
    case AutomatonIssueKind::BetSum: return "BetSum";
  }
  return "?";
}

/// Every violated row-sum and bet-sum invariant; empty when valid.
template <class T>
std::vector<AutomatonIssue> validate_automaton(const BettingAutomaton<T>& b) {
  std::vector<AutomatonIssue> issues;
  const std::size_t n = b.states.size();
  const std::size_t k = b.alphabet.size();
  if (n == 0 || k == 0) {
    issues.push_back({AutomatonIssueKind::Shape, "", "", "automaton needs states and symbols"});
    return issues;
  }
  if (b.initial >= n) issues.push_back({AutomatonIssueKind::Shape, "", "", "initial state out of range"});
  if (b.delta.size() != n || b.gamma.size() != n) {
    issues.push_back({AutomatonIssueKind::Shape, "", "", "transition or bet table has the wrong size"});
    return issues;
  }
  const double tol = is_exact_v<T> ? 0.0 : b.eps;
  for (std::size_t s = 0; s < n; ++s) {
    if (b.delta[s].size() != k || b.gamma[s].size() != k) {
      issues.push_back({AutomatonIssueKind::Shape, b.states[s], "", "row does not cover the alphabet"});
      continue;
    }
    T bets(0);
    for (std::size_t a = 0; a < k; ++a) {
      const auto& row = b.delta[s][a];
      if (row.size() != n) {
        issues.push_back({AutomatonIssueKind::Shape, b.states[s], b.alphabet[a], "distribution has the wrong length"});
        continue;
      }
      T total(0);
      bool bad_entry = false;
      for (const auto& p : row) {
        total += p;
        if (ScalarTraits<T>::sign(p) < 0 || ScalarTraits<T>::sign(T(p - T(1)), tol) > 0) bad_entry = true;
      }
      if (bad_entry || ScalarTraits<T>::sign(T(total - T(1)), tol) != 0)
        issues.push_back({AutomatonIssueKind::Probability, b.states[s], b.alphabet[a],
                          "transition probabilities sum to " + to_string(total)});
      if (ScalarTraits<T>::sign(b.gamma[s][a]) < 0)
        issues.push_back({AutomatonIssueKind::NegativeBet, b.states[s], b.alphabet[a], "negative bet"});
      bets += b.gamma[s][a];
    }
    if (ScalarTraits<T>::sign(T(bets - T(static_cast<long>(k))), tol * static_cast<double>(k)) != 0)
      issues.push_back({AutomatonIssueKind::BetSum, b.states[s], "",
                        "bets sum to " + to_string(bets) + " instead of " + std::to_string(k)});
  }
  return issues;
}

template <class T>
void require_valid(const BettingAutomaton<T>& b) {
  const auto issues = validate_automaton(b);
  if (issues.empty()) return;
  std::string msg;
  bool shape = false;
  for (const auto& i : issues) {
    if (!msg.empty()) msg += "; ";
    msg += (i.state.empty() ? "" : i.state + (i.symbol.empty() ? "" : "/" + i.symbol) + ": ") + i.message;
    shape = shape || i.kind == AutomatonIssueKind::Shape;
  }
  fail(shape ? ErrorKind::Malformed : ErrorKind::NotSuperfair, msg);
}

template <class T>
struct ConvertedAutomaton {
  MatrixFamily<T> family;
  Vector<T> start;  // indicator of the initial state
};

/// M_a(s, s') = gamma(s, a) * delta(s, a)(s').
template <class T>
ConvertedAutomaton<T> to_matrix_family(const BettingAutomaton<T>& b) {
  require_valid(b);
  const std::size_t n = b.states.size();
  std::vector<Matrix<T>> ms;
  for (std::size_t a = 0; a < b.alphabet.size(); ++a) {
    Matrix<T> m(n, n);
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t t = 0; t < n; ++t) m(s, t) = b.gamma[s][a] * b.delta[s][a][t];
    ms.push_back(std::move(m));
  }
  return {MatrixFamily<T>(b.alphabet, std::move(ms), b.eps), unit_basis<T>(n, b.initial)};
}

/// E[C_n] along the given prefix, via xi_{k+1} = xi_k M_{X_{k+1}}.
template <class T>
T expected_capital(const BettingAutomaton<T>& b, const Word& prefix) {
  const auto conv = to_matrix_family(b);
  return norm1(apply_word(conv.family, conv.start, prefix));
}

template <class T>
T expected_capital(const BettingAutomaton<T>& b, SequenceSource& src, std::size_t n) {
  return expected_capital(b, take(src, n));
}

struct CapitalEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
};

namespace detail {

struct RunningMoments {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x) {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }

  void merge(const RunningMoments& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    const double total = static_cast<double>(count + o.count);
    const double d = o.mean - mean;
    mean += d * static_cast<double>(o.count) / total;
    m2 += o.m2 + d * d * static_cast<double>(count) * static_cast<double>(o.count) / total;
    count += o.count;
  }
};

}  // namespace detail

/// Monte Carlo estimate of E[C_n]. Trial t draws from stream t of the seed,
/// and blocks merge in a fixed order, so results do not depend on threads.
template <class T>
CapitalEstimate mc_capital(const BettingAutomaton<T>& b, const Word& prefix, std::size_t trials, std::uint64_t seed) {
  require_valid(b);
  if (trials == 0) fail(ErrorKind::Usage, "Monte Carlo needs at least one trial");
  const std::size_t n = b.states.size();
  const std::size_t k = b.alphabet.size();
  std::vector<std::vector<std::vector<double>>> cdf(n, std::vector<std::vector<double>>(k));
  std::vector<std::vector<double>> bet(n, std::vector<double>(k));
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t a = 0; a < k; ++a) {
      double acc = 0.0;
      for (const auto& p : b.delta[s][a]) cdf[s][a].push_back(acc += to_double(p));
      bet[s][a] = to_double(b.gamma[s][a]);
    }
  const CounterRng root(seed);
  auto run_block = [&](std::size_t begin, std::size_t end) {
    detail::RunningMoments acc;
    for (std::size_t t = begin; t < end; ++t) {
      CounterRng rng = root.split(t);
      std::size_t s = b.initial;
      double capital = 1.0;
      for (auto a : prefix) {
        capital *= bet[s][a];
        if (capital == 0.0) break;
        const double u = rng.uniform01() * cdf[s][a].back();
        const auto& c = cdf[s][a];
        s = static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), u) - c.begin());
        if (s >= n) s = n - 1;
      }
      acc.push(capital);
    }
    return acc;
  };

  constexpr std::size_t block = 4096;
  const std::size_t blocks = (trials + block - 1) / block;
  const std::size_t workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  std::vector<detail::RunningMoments> parts(blocks);
  for (std::size_t first = 0; first < blocks; first += workers) {
    std::vector<std::future<detail::RunningMoments>> jobs;
    for (std::size_t i = first; i < std::min(blocks, first + workers); ++i)
      jobs.push_back(std::async(std::launch::async, run_block, i * block, std::min(trials, (i + 1) * block)));
    for (std::size_t i = 0; i < jobs.size(); ++i) parts[first + i] = jobs[i].get();
  }
  detail::RunningMoments total;
  for (const auto& p : parts) total.merge(p);

  CapitalEstimate est;
  est.mean = total.mean;
  est.trials = trials;
  est.seed = seed;
  est.std_error = trials > 1 ? std::sqrt(total.m2 / static_cast<double>(trials - 1)) / std::sqrt(static_cast<double>(trials)) : 0.0;
  return est;
}

template <class T>
CapitalEstimate mc_capital(const BettingAutomaton<T>& b, SequenceSource& src, std::size_t n, std::size_t trials,
                           std::uint64_t seed) {
  return mc_capital(b, take(src, n), trials, seed);
}

template <class To, class From>
BettingAutomaton<To> automaton_cast(const BettingAutomaton<From>& b) {
  BettingAutomaton<To> out;
  out.states = b.states;
  out.alphabet = b.alphabet;
  out.initial = b.initial;
  out.eps = b.eps;
  for (const auto& row : b.delta) {
    out.delta.emplace_back();
    for (const auto& d : row) out.delta.back().push_back(vector_cast<To>(d));
  }
  for (const auto& row : b.gamma) {
    out.gamma.emplace_back();
    for (const auto& g : row) out.gamma.back().push_back(scalar_cast<To>(g));
  }
  return out;
}

}  // namespace nbet
