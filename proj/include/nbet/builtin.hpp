#pragma once

#include <string>
#include <vector>

#include "nbet/betting.hpp"
#include "nbet/family.hpp"

namespace nbet::builtin {

namespace detail {

inline Rational q(const char* text) { return parse_rational(text); }

inline BettingAutomaton<Rational> blank(std::vector<std::string> states, Alphabet alphabet) {
  BettingAutomaton<Rational> b;
  const std::size_t n = states.size(), k = alphabet.size();
  b.states = std::move(states);
  b.alphabet = std::move(alphabet);
  b.delta.assign(n, std::vector<Vector<Rational>>(k, Vector<Rational>(n, Rational(0))));
  b.gamma.assign(n, std::vector<Rational>(k, Rational(0)));
  return b;
}

/// Same distribution on every symbol.
inline void move_all(BettingAutomaton<Rational>& b, std::size_t s, const Vector<Rational>& dist) {
  for (auto& row : b.delta[s]) row = dist;
}

}  // namespace detail

/// One state that doubles on 0 and loses everything on 1.
inline BettingAutomaton<Rational> sudden_death_automaton() {
  auto b = detail::blank({"q"}, {"0", "1"});
  detail::move_all(b, 0, {Rational(1)});
  b.gamma[0] = {Rational(2), Rational(0)};
  return b;
}

/// Two states betting everything on 0 and on 1; s0 stays with probability
/// p1, s1 stays with probability p2.
inline BettingAutomaton<Rational> ruin_automaton(const Rational& p1 = Rational(3, 10),
                                                 const Rational& p2 = Rational(3, 5)) {
  if (p1 < 0 || p1 > 1 || p2 < 0 || p2 > 1) fail(ErrorKind::Usage, "probabilities must lie in [0, 1]");
  auto b = detail::blank({"s0", "s1"}, {"0", "1"});
  detail::move_all(b, 0, {p1, Rational(1 - p1)});
  detail::move_all(b, 1, {Rational(1 - p2), p2});
  b.gamma[0] = {Rational(2), Rational(0)};
  b.gamma[1] = {Rational(0), Rational(2)};
  return b;
}

/// Four states whose long-run capital stabilizes.
inline BettingAutomaton<Rational> stabilizing_automaton() {
  using detail::q;
  auto b = detail::blank({"s0", "s1", "s2", "s3"}, {"0", "1"});
  detail::move_all(b, 0, {q("1/8"), q("5/8"), q("1/4"), q("0")});
  detail::move_all(b, 1, {q("1/10"), q("1/2"), q("2/5"), q("0")});
  detail::move_all(b, 2, {q("1/4"), q("0"), q("1/3"), q("5/12")});
  detail::move_all(b, 3, {q("3/10"), q("0"), q("1/5"), q("1/2")});
  b.gamma[0] = {Rational(2), Rational(0)};
  b.gamma[1] = {Rational(0), Rational(2)};
  b.gamma[2] = {Rational(2), Rational(0)};
  b.gamma[3] = {Rational(0), Rational(2)};
  return b;
}

/// Four-state automaton over {a, b} with fractional bets.
inline BettingAutomaton<Rational> two_letter_automaton() {
  using detail::q;
  auto b = detail::blank({"s0", "s1", "s2", "s3"}, {"a", "b"});
  const std::size_t A = 0, B = 1;
  b.delta[0][A] = {q("0"), q("1"), q("0"), q("0")};
  b.delta[0][B] = {q("0"), q("0"), q("1/2"), q("1/2")};
  b.delta[1][A] = {q("0"), q("1"), q("0"), q("0")};
  b.delta[1][B] = {q("0"), q("0"), q("0"), q("1")};
  b.delta[2][A] = {q("0"), q("0"), q("1/2"), q("1/2")};
  b.delta[2][B] = {q("0"), q("0"), q("1"), q("0")};
  b.delta[3][A] = {q("1/2"), q("1/2"), q("0"), q("0")};
  b.delta[3][B] = {q("0"), q("0"), q("0"), q("1")};
  const Rational bet_a[] = {q("1"), q("3/2"), q("1/2"), q("1/2")};
  for (std::size_t s = 0; s < 4; ++s) b.gamma[s] = {bet_a[s], Rational(2 - bet_a[s])};
  return b;
}

/// The ruin automaton where both betting states also fall, with probability
/// 1/4, into an absorbing state that never bets.
inline BettingAutomaton<Rational> leaking_automaton() {
  using detail::q;
  auto b = detail::blank({"s0", "s1", "sink"}, {"0", "1"});
  detail::move_all(b, 0, {q("9/40"), q("21/40"), q("1/4")});
  detail::move_all(b, 1, {q("3/10"), q("9/20"), q("1/4")});
  detail::move_all(b, 2, {q("0"), q("0"), q("1")});
  b.gamma[0] = {Rational(2), Rational(0)};
  b.gamma[1] = {Rational(0), Rational(2)};
  b.gamma[2] = {Rational(1), Rational(1)};
  return b;
}

/// diag(first, second) over a shared alphabet.
template <class T>
MatrixFamily<T> block_diagonal(const MatrixFamily<T>& first, const MatrixFamily<T>& second) {
  if (first.alphabet() != second.alphabet()) fail(ErrorKind::Malformed, "block families need the same alphabet");
  const std::size_t m1 = first.dim(), m = m1 + second.dim();
  std::vector<Matrix<T>> ms;
  for (std::size_t a = 0; a < first.letters(); ++a) {
    Matrix<T> out(m, m);
    for (std::size_t i = 0; i < m1; ++i)
      for (std::size_t j = 0; j < m1; ++j) out(i, j) = first.matrix(a)(i, j);
    for (std::size_t i = 0; i < second.dim(); ++i)
      for (std::size_t j = 0; j < second.dim(); ++j) out(m1 + i, m1 + j) = second.matrix(a)(i, j);
    ms.push_back(std::move(out));
  }
  return MatrixFamily<T>(first.alphabet(), std::move(ms), first.eps());
}

inline MatrixFamily<Rational> sudden_death_family() { return to_matrix_family(sudden_death_automaton()).family; }
inline MatrixFamily<Rational> ruin_family(const Rational& p1 = Rational(3, 10), const Rational& p2 = Rational(3, 5)) {
  return to_matrix_family(ruin_automaton(p1, p2)).family;
}
inline MatrixFamily<Rational> stabilizing_family() { return to_matrix_family(stabilizing_automaton()).family; }
inline MatrixFamily<Rational> leaking_family() { return to_matrix_family(leaking_automaton()).family; }
inline MatrixFamily<Rational> mixed_family() { return block_diagonal(ruin_family(), stabilizing_family()); }

}  // namespace nbet::builtin
