#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nbet/family.hpp"
#include "nbet/geometry.hpp"
#include "nbet/linalg.hpp"
#include "nbet/lp.hpp"
#include "nbet/perron.hpp"
#include "nbet/rng.hpp"
#include "nbet/support.hpp"

namespace nbet {

// ---------------------------------------------------------------------------
// Fixed direction
// ---------------------------------------------------------------------------

template <class T>
struct FixedDirection {
  Vector<T> x;
  double residual = 0.0;        // d_H(x.w, x); 0 when exact
  std::size_t iterations = 0;   // power iterations used by the float route
  bool exact = false;           // x certified by exact arithmetic
  IndexSet mixing_rows;         // rows of the support mapped onto F by w
  double eigenvalue = 0.0;      // |x M_w| for unit x
  std::optional<Rational> exact_eigenvalue;
};

struct FixedDirectionOptions {
  double tolerance = 1e-12;
  std::size_t max_iterations = 1000000;
};

namespace detail {

inline FixedDirection<double> float_fixed_direction(const Matrix<double>& mw, IndexSet f_set, double eps,
                                                    const FixedDirectionOptions& opt) {
  FixedDirection<double> fd;
  const std::size_t m = mw.rows();
  Vector<double> v = indicator<double>(f_set, m);
  for (auto& e : v) e /= static_cast<double>(f_set.size());
  double lambda = 1.0;
  for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
    Vector<double> next = vec_mat(v, mw);
    lambda = norm1(next);
    if (lambda <= 0.0) fail(ErrorKind::NumericalFailure, "fixed-direction iteration vanished");
    for (auto& e : next) e /= lambda;
    for (std::size_t i = 0; i < m; ++i)
      if (!f_set.contains(i)) next[i] = 0.0;
    double d = std::numeric_limits<double>::infinity();
    try {
      d = hilbert_distance(v, next, eps);
    } catch (const Error&) {
    }
    v = std::move(next);
    fd.iterations = it;
    fd.residual = d;
    if (d < opt.tolerance) break;
  }
  fd.x = std::move(v);
  fd.eigenvalue = lambda;
  return fd;
}

}  // namespace detail

/// The unit vector x with support F fixed by the pseudo-mixing word w.
template <class T>
FixedDirection<T> fixed_direction(const MatrixFamily<T>& f, IndexSet f_set, const Word& w,
                                  const FixedDirectionOptions& opt = {}) {
  const SupportAction act(f);
  if (!is_pseudo_mixing(act, w, f_set))
    fail(ErrorKind::NotPseudoMixing, "word does not pseudo-mix " + f_set.to_string());
  IndexSet rows;
  for (auto i : f_set.members())
    if (act.act(IndexSet::singleton(i), w) == f_set) rows.insert(i);
  const Matrix<T> mw = word_matrix(f, w);

  if constexpr (is_exact_v<T>) {
    const Matrix<Rational> block = submatrix(mw, rows, rows);
    if (auto pp = rational_perron(block)) {
      FixedDirection<T> fd;
      fd.mixing_rows = rows;
      Vector<Rational> y(f.dim(), Rational(0));
      const auto idx = rows.members();
      for (std::size_t k = 0; k < idx.size(); ++k) y[idx[k]] = pp->left[k];
      Vector<Rational> x = vec_mat(y, mw);
      const Rational total = norm1(x);
      for (auto& e : x) e /= total;
      const Vector<Rational> image = vec_mat(x, mw);
      for (std::size_t i = 0; i < x.size(); ++i)
        if (image[i] != pp->value * x[i])
          fail(ErrorKind::InternalContradiction, "exact fixed direction failed its eigen-equation");
      if (support(x) != f_set) fail(ErrorKind::InternalContradiction, "fixed direction has the wrong support");
      fd.x = std::move(x);
      fd.exact = true;
      fd.exact_eigenvalue = pp->value;
      fd.eigenvalue = pp->value.get_d();
      return fd;
    }
    auto fl = detail::float_fixed_direction(matrix_cast<double>(mw), f_set, f.eps(), opt);
    FixedDirection<T> fd;
    fd.x = vector_cast<Rational>(fl.x);
    fd.residual = fl.residual;
    fd.iterations = fl.iterations;
    fd.eigenvalue = fl.eigenvalue;
    fd.mixing_rows = rows;
    return fd;
  } else {
    auto fd = detail::float_fixed_direction(mw, f_set, f.eps(), opt);
    fd.mixing_rows = rows;
    return fd;
  }
}

// ---------------------------------------------------------------------------
// Betting subspace and Live
// ---------------------------------------------------------------------------

template <class T>
struct BettingSubspace {
  std::size_t dim = 0;
  std::vector<Vector<T>> basis;
  std::vector<std::size_t> per_letter_dims;
  std::vector<std::size_t> dims_by_depth;   // dim of the joint span using words of length <= k
  std::size_t stabilization_depth = 0;      // first k after which no growth occurs
};

namespace detail {

template <class T>
Vector<T> letter_seed(const Matrix<T>& m) {
  Vector<T> c(m.rows(), T(1));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) c[i] -= m(i, j);
  return c;
}

/// Span closure of `seeds` under c -> M_b c. Records the dimension reached
/// after each word length.
template <class T>
SpanBuilder<T> span_closure(const MatrixFamily<T>& f, const std::vector<Vector<T>>& seeds,
                            std::vector<std::size_t>* dims_by_depth) {
  SpanBuilder<T> span(f.dim());
  std::vector<Vector<T>> fresh;
  for (const auto& s : seeds)
    if (span.add(s)) fresh.push_back(s);
  if (dims_by_depth) dims_by_depth->push_back(span.rank());
  while (!fresh.empty()) {
    std::vector<Vector<T>> next;
    for (const auto& c : fresh)
      for (const auto& m : f.matrices()) {
        Vector<T> d = mat_vec(m, c);
        if (span.add(d)) next.push_back(std::move(d));
      }
    if (dims_by_depth) dims_by_depth->push_back(span.rank());
    fresh = std::move(next);
  }
  return span;
}

}  // namespace detail

/// V = sum over letters of span{M_w (I - M_a) 1}.
template <class T>
BettingSubspace<T> betting_subspace(const MatrixFamily<T>& f) {
  BettingSubspace<T> out;
  out.dim = f.dim();
  std::vector<Vector<T>> seeds;
  for (const auto& m : f.matrices()) {
    seeds.push_back(detail::letter_seed(m));
    out.per_letter_dims.push_back(detail::span_closure(f, {seeds.back()}, nullptr).rank());
  }
  auto span = detail::span_closure(f, seeds, &out.dims_by_depth);
  out.basis = span.basis();
  // The last entry repeats the final dimension, so growth stopped one level earlier.
  out.stabilization_depth = out.dims_by_depth.size() >= 2 ? out.dims_by_depth.size() - 2 : 0;
  return out;
}

template <class T>
Vector<T> moments(const std::vector<Vector<T>>& basis, const Vector<T>& v) {
  Vector<T> out;
  for (const auto& b : basis) out.push_back(dot(v, b));
  return out;
}

/// Live(v) = |v| - max{|s| : s >= 0, s orthogonal to V, s <= v}.
/// Float mode solves the equivalent minimum of sum(t) over 0 <= t <= v with
/// the same moments as v, on the normalized vector, to keep small values.
template <class T>
T live(const BettingSubspace<T>& bs, const Vector<T>& v, double tol = 1e-11) {
  const T total = norm1(v);
  if (ScalarTraits<T>::sign(total) <= 0 || bs.basis.empty()) return T(0);
  if constexpr (is_exact_v<T>) {
    return Rational(total - lp_max_capped(v, bs.basis));
  } else {
    Vector<double> u = v;
    for (auto& e : u) e /= total;
    std::vector<std::optional<double>> upper(u.begin(), u.end());
    auto r = lp_min_mass(upper, bs.basis, moments(bs.basis, u), tol);
    if (!r) return total;
    return total * std::clamp(r->value, 0.0, 1.0);
  }
}

/// v is non-negative and orthogonal to every basis vector of V.
template <class T>
bool in_nonbetting_cone(const BettingSubspace<T>& bs, const Vector<T>& v, double tol = 1e-9) {
  for (const auto& e : v)
    if (ScalarTraits<T>::sign(e) < 0) return false;
  for (const auto& b : bs.basis) {
    const T d = dot(v, b);
    if constexpr (is_exact_v<T>) {
      if (sgn(d) != 0) return false;
    } else {
      if (std::fabs(d) >= tol * abs_norm1(b) * std::max(1.0, norm1(v))) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Trichotomy
// ---------------------------------------------------------------------------

enum class CaseKind { Case0, Case1, Case2 };

inline std::string_view case_label(CaseKind c) {
  switch (c) {
    case CaseKind::Case0: return "0";
    case CaseKind::Case1: return "1";
    case CaseKind::Case2: return "2";
  }
  return "?";
}

template <class T>
struct Classification {
  CaseKind kind = CaseKind::Case0;
  FairnessKind fairness = FairnessKind::Fair;
  std::size_t automaton_states = 0;
  bool null_bscc_present = false;
  std::optional<IndexSet> f_set;
  std::optional<Word> pseudo_mixing_word;
  std::optional<FixedDirection<T>> direction;
  std::optional<BettingSubspace<T>> subspace;
  std::optional<Word> witness;            // Case1 evidence: z with risk at x.z > 0
  std::optional<double> delta_at_witness;
  bool orthogonality_exact = false;
  double max_orthogonality_defect = 0.0;  // max |x.b| / |b|
  std::optional<T> live_of_x;
};

struct ClassifyOptions {
  PseudoMixingOptions pseudo_mixing;
  FixedDirectionOptions fixed_direction;
  double orthogonality_tol = 1e-9;
  double float_risk_tol = 1e-12;        // float-mode threshold for a positive risk
  std::size_t witness_cap = 0;          // 0 means 4m + |w|
  std::size_t witness_max_nodes = 200000;
};

/// Risk at u is positive: exact mode tests norm preservation exactly.
template <class T>
bool risk_positive(const MatrixFamily<T>& f, const Vector<T>& u, double float_tol) {
  if constexpr (is_exact_v<T>) {
    (void)float_tol;
    const T total = norm1(u);
    for (const auto& m : f.matrices())
      if (norm1(vec_mat(u, m)) != total) return true;
    return false;
  } else {
    return delta_risk(f, u) > float_tol;
  }
}

namespace detail {

template <class T>
Vector<T> normalized(Vector<T> v) {
  const T total = norm1(v);
  for (auto& e : v) e /= total;
  return v;
}

/// Breadth-first search for the shortest z with positive risk at x.z.
template <class T>
std::optional<Word> find_witness(const MatrixFamily<T>& f, const Vector<T>& x, std::size_t cap, std::size_t max_nodes,
                                 double float_tol) {
  struct Node {
    Vector<T> v;
    Word z;
  };
  std::set<Vector<T>> seen;
  std::vector<Node> frontier{{normalized(x), {}}};
  seen.insert(frontier.front().v);
  for (std::size_t depth = 0; depth <= cap && !frontier.empty(); ++depth) {
    std::vector<Node> next;
    for (auto& node : frontier) {
      if (risk_positive(f, node.v, float_tol)) return node.z;
      if (depth == cap) continue;
      for (std::size_t a = 0; a < f.letters(); ++a) {
        Vector<T> u = vec_mat(node.v, f.matrix(a));
        if (ScalarTraits<T>::sign(norm1(u)) <= 0) continue;
        u = normalized(std::move(u));
        if (seen.size() >= max_nodes || !seen.insert(u).second) continue;
        Word z = node.z;
        z.push_back(a);
        next.push_back({std::move(u), std::move(z)});
      }
    }
    frontier = std::move(next);
  }
  return std::nullopt;
}

}  // namespace detail

/// Case decision for a family whose index graph is strongly connected.
template <class T>
Classification<T> classify_star(const MatrixFamily<T>& f, const ClassifyOptions& opt = {}) {
  Classification<T> c;
  const auto verdict = validate(f);
  c.fairness = verdict.kind;
  if (verdict.kind == FairnessKind::NotSuperfair) fail(ErrorKind::NotSuperfair, "family is not superfair");
  const auto aut = build_support_automaton(f);
  if (!aut.star_holds) fail(ErrorKind::StarViolated, "index reachability graph is not strongly connected");
  const auto bs = bscc_structure(aut);
  c.automaton_states = aut.states.size();
  c.null_bscc_present = bs.null_bscc_present;
  if (!bs.minimal_member) {
    c.kind = CaseKind::Case0;
    return c;
  }
  c.f_set = *bs.minimal_member;
  c.pseudo_mixing_word = pseudo_mixing_word(aut, bs, *c.f_set, opt.pseudo_mixing);
  c.direction = fixed_direction(f, *c.f_set, *c.pseudo_mixing_word, opt.fixed_direction);
  c.subspace = betting_subspace(f);
  const Vector<T>& x = c.direction->x;

  bool orthogonal = true;
  c.orthogonality_exact = is_exact_v<T> && c.direction->exact;
  for (const auto& b : c.subspace->basis) {
    const T d = dot(x, b);
    const double defect = std::fabs(to_double(d)) / to_double(abs_norm1(b));
    c.max_orthogonality_defect = std::max(c.max_orthogonality_defect, defect);
    if (c.orthogonality_exact) {
      if (ScalarTraits<T>::sign(d) != 0) orthogonal = false;
    } else if (defect >= opt.orthogonality_tol) {
      orthogonal = false;
    }
  }
  if (orthogonal) {
    c.kind = CaseKind::Case2;
    c.live_of_x = c.orthogonality_exact ? live(*c.subspace, x) : T(0);
    return c;
  }
  c.kind = CaseKind::Case1;
  const std::size_t cap = opt.witness_cap ? opt.witness_cap : 4 * f.dim() + c.pseudo_mixing_word->size();
  c.witness = detail::find_witness(f, x, cap, opt.witness_max_nodes, opt.float_risk_tol);
  if (c.witness) c.delta_at_witness = delta_risk(f, apply_word(f, x, *c.witness));
  return c;
}

// ---------------------------------------------------------------------------
// Contraction probe
// ---------------------------------------------------------------------------

struct ProbeResult {
  double alpha_hat = 0.0;             // +inf when the median factor is 0
  double fraction_contracting = 0.0;
  double median_factor = 0.0;
  std::size_t length = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
};

/// Samples uniform words z of length N and measures the worst ratio
/// Live(e_i M_z) / Live(e_i) over basis vectors with positive Live.
template <class T>
ProbeResult live_contraction_probe(const MatrixFamily<T>& f, std::size_t length, std::size_t trials,
                                   std::uint64_t seed) {
  if (trials == 0) fail(ErrorKind::Usage, "probe needs at least one trial");
  const auto bs = betting_subspace(f);
  std::vector<std::size_t> active;
  std::vector<T> base;
  for (std::size_t i = 0; i < f.dim(); ++i) {
    const T l = live(bs, unit_basis<T>(f.dim(), i));
    if (ScalarTraits<T>::sign(l) > 0) {
      active.push_back(i);
      base.push_back(l);
    }
  }
  if (active.empty()) fail(ErrorKind::DegenerateLiveCone, "every basis vector has zero Live");

  const CounterRng root(seed);
  std::vector<double> factors(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    CounterRng rng = root.split(t);
    Word z(length);
    for (auto& a : z) a = static_cast<std::size_t>(rng.below(f.letters()));
    double worst = 0.0;
    for (std::size_t k = 0; k < active.size(); ++k) {
      const Vector<T> v = apply_word(f, unit_basis<T>(f.dim(), active[k]), z);
      const T l = live(bs, v);
      double ratio;
      if constexpr (is_exact_v<T>) {
        ratio = sgn(l) == 0 ? 0.0 : std::exp(log_of(l) - log_of(base[k]));
      } else {
        ratio = l / base[k];
      }
      worst = std::max(worst, ratio);
    }
    factors[t] = worst;
  }
  ProbeResult r;
  r.length = length;
  r.trials = trials;
  r.seed = seed;
  r.fraction_contracting =
      static_cast<double>(std::count_if(factors.begin(), factors.end(), [](double x) { return x <= 1.0; })) /
      static_cast<double>(trials);
  std::vector<double> sorted = factors;
  std::sort(sorted.begin(), sorted.end());
  r.median_factor = sorted[(trials - 1) / 2];
  r.alpha_hat = r.median_factor <= 0.0 ? std::numeric_limits<double>::infinity()
                                       : -std::log(r.median_factor) / static_cast<double>(std::max<std::size_t>(length, 1));
  return r;
}

// ---------------------------------------------------------------------------
// General case
// ---------------------------------------------------------------------------

template <class T>
struct ComponentReport {
  IndexSet members;
  FairnessKind fairness = FairnessKind::Fair;
  Classification<T> verdict;
};

template <class T>
struct GeneralReport {
  ReachabilityGraph graph;
  std::vector<ComponentReport<T>> components;
  bool mixed = false;
  bool strict_components_consistent = true;
  std::optional<ProbeResult> probe;
  bool probe_degenerate = false;
};

struct GeneralOptions {
  ClassifyOptions classify;
  bool run_probe = true;
  std::size_t probe_length = 50;
  std::size_t probe_trials = 200;
  std::uint64_t probe_seed = 1;
};

template <class T>
GeneralReport<T> classify_general(const MatrixFamily<T>& f, const GeneralOptions& opt = {}) {
  if (validate(f).kind == FairnessKind::NotSuperfair) fail(ErrorKind::NotSuperfair, "family is not superfair");
  GeneralReport<T> rep;
  rep.graph = reachability_graph(f);
  std::set<CaseKind> live_cases;
  for (const auto& k : rep.graph.components) {
    ComponentReport<T> cr;
    cr.members = k;
    const auto sub = restrict_family(f, k);
    cr.fairness = validate(sub).kind;
    cr.verdict = classify_star(sub, opt.classify);
    if (cr.verdict.kind != CaseKind::Case0) live_cases.insert(cr.verdict.kind);
    if (cr.fairness == FairnessKind::SuperfairStrict && cr.verdict.kind == CaseKind::Case2)
      rep.strict_components_consistent = false;
    rep.components.push_back(std::move(cr));
  }
  rep.mixed = live_cases.size() > 1;
  if (!rep.strict_components_consistent)
    fail(ErrorKind::InternalContradiction, "a strictly superfair component was classified as stabilizing");
  if (opt.run_probe) {
    try {
      rep.probe = live_contraction_probe(f, opt.probe_length, opt.probe_trials, opt.probe_seed);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateLiveCone) throw;
      rep.probe_degenerate = true;
    }
  }
  return rep;
}

}  // namespace nbet
