// Acceptance run: one PASS/FAIL line per criterion with its wall time.
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "generators.hpp"
#include "nbet/cli.hpp"
#include "nbet/nbet.hpp"
#include "oracles.hpp"

using namespace nbet;
using Q = Rational;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

const Vector<Q> kX{Q(1, 5), Q(1, 4), Q(3, 10), Q(1, 4)};

Json run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) fail(ErrorKind::InternalContradiction, "nbet " + args.front() + " exited with " + std::to_string(code));
  return Json::parse(out.str());
}

std::string fmt(double x) {
  std::ostringstream ss;
  ss << std::setprecision(6) << x;
  return ss.str();
}

Outcome golden_matrices() {
  Outcome o;
  const auto doc = automaton_from_json(run_cli({"examples", "case2", "--automaton"}));
  const auto conv = to_matrix_family(doc.automaton);
  const Matrix<Q> m0{{Q(1, 4), Q(5, 4), Q(1, 2), Q(0)},
                     {Q(0), Q(0), Q(0), Q(0)},
                     {Q(1, 2), Q(0), Q(2, 3), Q(5, 6)},
                     {Q(0), Q(0), Q(0), Q(0)}};
  const Matrix<Q> m1{{Q(0), Q(0), Q(0), Q(0)},
                     {Q(1, 5), Q(1), Q(4, 5), Q(0)},
                     {Q(0), Q(0), Q(0), Q(0)},
                     {Q(3, 5), Q(0), Q(2, 5), Q(1)}};
  const Matrix<Q> m10{{Q(0), Q(0), Q(0), Q(0)},
                      {Q(9, 20), Q(1, 4), Q(19, 30), Q(2, 3)},
                      {Q(0), Q(0), Q(0), Q(0)},
                      {Q(7, 20), Q(3, 4), Q(17, 30), Q(1, 3)}};
  o.require(conv.family.matrix(0) == m0, "first matrix differs");
  o.require(conv.family.matrix(1) == m1, "second matrix differs");
  o.require(word_matrix(conv.family, conv.family.parse_word("10")) == m10, "product for \"10\" differs");
  const auto fam = family_from_json(run_cli({"examples", "case2"})).family;
  o.require(fam.matrices() == conv.family.matrices(), "family and automaton examples disagree");
  return o;
}

Outcome fixed_direction_check() {
  Outcome o;
  const auto f = family_from_json(run_cli({"examples", "case2"})).family;
  const auto exact = classify_star(f);
  o.require(exact.kind == CaseKind::Case2 && exact.direction && exact.direction->x == kX, "exact direction differs");
  const auto fl = classify_star(family_cast<double>(f));
  double err = fl.direction ? 0.0 : 1.0;
  if (fl.direction)
    for (std::size_t i = 0; i < 4; ++i) err = std::max(err, std::fabs(fl.direction->x[i] - kX[i].get_d()));
  o.require(err <= 1e-9, "float direction off by " + fmt(err));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("float max error ") + fmt(err);
  return o;
}

Outcome trichotomy() {
  Outcome o;
  auto kind = [](const std::vector<std::string>& args) {
    return classify_star(family_from_json(run_cli(args)).family).kind;
  };
  o.require(kind({"examples", "case0"}) == CaseKind::Case0, "case0 example misclassified");
  o.require(kind({"examples", "case1", "--p1", "0.3", "--p2", "0.6"}) == CaseKind::Case1, "case1 example misclassified");
  o.require(kind({"examples", "case2"}) == CaseKind::Case2, "case2 example misclassified");
  const auto half = family_from_json(run_cli({"examples", "case1", "--p1", "1/2", "--p2", "1/2"})).family;
  const auto c = classify_star(half);
  o.require(c.kind == CaseKind::Case2, "boundary family not never-betting");
  if (c.direction) {
    o.require(!oracle::some_risk(gen::to_oracle(half), {c.direction->x.begin(), c.direction->x.end()}, 6),
              "brute force finds risk at the boundary");
    for (const auto& z : oracle::all_words(2, 6))
      if (delta_risk(half, apply_word(half, c.direction->x, Word(z.begin(), z.end()))) != 0.0) {
        o.require(false, "nonzero risk after " + half.format_word(Word(z.begin(), z.end())));
        break;
      }
  }
  return o;
}

Outcome expected_capital_check() {
  Outcome o;
  const auto b = automaton_from_json(run_cli({"examples", "fig1", "--automaton"})).automaton;
  const auto w = parse_word(b.alphabet, "bb");
  const Q e = expected_capital(b, w);
  o.require(e == Q(3, 2), "exact capital " + e.get_str());
  const auto mc = mc_capital(b, w, 100000, 42);
  const double z = mc.std_error > 0 ? std::fabs(mc.mean - 1.5) / mc.std_error : (mc.mean == 1.5 ? 0.0 : INFINITY);
  o.require(z <= 3.0, "Monte Carlo " + fmt(z) + " standard errors away");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("mc mean ") + fmt(mc.mean) + " se " + fmt(mc.std_error);
  return o;
}

Outcome ruin_rate() {
  Outcome o;
  const auto f = family_cast<double>(builtin::ruin_family(Q(3, 10), Q(3, 5)));
  ChampernowneSource src(2);
  const auto recs = evolve(f, Vector<double>{0.5, 0.5}, src, 50000);
  bool positive = true;
  for (const auto& r : recs) positive = positive && !r.dead && std::isfinite(r.log_norm);
  o.require(positive, "capital hit zero");
  const auto fit = rate_fit(recs, FitTarget::Norm, RateFitOptions{true, 0.9});
  o.require(recs.back().log_norm < recs[fit.window_begin].log_norm, "log capital not decreasing over the fit window");
  o.require(fit.beta && *fit.beta > 0.01, "beta " + (fit.beta ? fmt(*fit.beta) : std::string("null")));
  o.require(fit.r_squared >= 0.95, "r^2 " + fmt(fit.r_squared));
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("slope ") + fmt(fit.slope) + " r^2 " + fmt(fit.r_squared) +
              " final log capital " + fmt(recs.back().log_norm);
  return o;
}

struct StabilizationRun {
  double tail_oscillation = 0;
  double final_norm = 0;
  std::optional<RateFit> live_fit;
  std::string live_error;
};

StabilizationRun stabilization_run(const Vector<double>& start) {
  const auto f = family_cast<double>(builtin::stabilizing_family());
  const auto c = classify_star(builtin::stabilizing_family());
  EvolveOptions<double> opt;
  opt.live = true;
  opt.live_every = 100;
  opt.x = vector_cast<double>(c.direction->x);
  opt.subspace = c.subspace ? std::optional<BettingSubspace<double>>(betting_subspace(f)) : std::nullopt;
  ChampernowneSource src(2);
  const auto recs = evolve(f, start, src, 50000, opt);
  StabilizationRun out;
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t n = recs.size() - 10000; n < recs.size(); ++n) {
    lo = std::min(lo, recs[n].norm);
    hi = std::max(hi, recs[n].norm);
  }
  out.tail_oscillation = hi - lo;
  out.final_norm = recs.back().norm;
  try {
    out.live_fit = rate_fit(recs, FitTarget::Live);
  } catch (const Error& e) {
    out.live_error = std::string(to_string(e.kind())) + ": " + e.what();
  }
  return out;
}

Outcome stabilization() {
  Outcome o;
  const auto run = stabilization_run({1.0, 0.0, 0.0, 0.0});
  o.require(run.tail_oscillation < 1e-6, "tail oscillation " + fmt(run.tail_oscillation));
  if (run.live_fit) {
    o.require(run.live_fit->beta && *run.live_fit->beta > 0.01,
              "live beta " + (run.live_fit->beta ? fmt(*run.live_fit->beta) : std::string("null")));
  } else {
    o.require(false, "live fit impossible (" + run.live_error + ")");
  }
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("final capital ") + fmt(run.final_norm);
  return o;
}

Outcome property_suites() {
  Outcome o;
  gen::Rng rng(2024);
  constexpr int kCases = 1000;
  int bad = 0;

  for (int t = 0; t < kCases;) {
    const auto m = static_cast<std::size_t>(gen::uniform_int(rng, 1, 4));
    const auto s = IndexSet(static_cast<std::uint64_t>(gen::uniform_int(rng, 1, (1L << m) - 1)));
    const auto u = gen::with_support(rng, s, m), v = gen::with_support(rng, s, m);
    const auto mat = gen::nonneg_matrix(rng, m, 0.4);
    const auto um = vec_mat(u, mat), vm = vec_mat(v, mat);
    if (norm1(um) == 0) continue;
    ++t;
    if (support(um) != support(vm) || hilbert_distance(um, vm) > hilbert_distance(u, v) + 1e-12) ++bad;
  }
  o.require(bad == 0, std::to_string(bad) + " distance expansions");

  bad = 0;
  for (int t = 0; t < kCases; ++t) {
    const auto m = static_cast<std::size_t>(gen::uniform_int(rng, 1, 5));
    const auto s = IndexSet(static_cast<std::uint64_t>(gen::uniform_int(rng, 1, (1L << m) - 1)));
    auto u = gen::with_support(rng, s, m), v = gen::with_support(rng, s, m);
    u = scaled(u, Q(1 / norm1(u)));
    v = scaled(v, Q(1 / norm1(v)));
    Q gap = 0;
    for (std::size_t i = 0; i < m; ++i) gap += abs(Q(u[i] - v[i]));
    if (gap.get_d() > hilbert_distance(u, v) + 1e-12) ++bad;
  }
  o.require(bad == 0, std::to_string(bad) + " l1 gaps above the distance");

  bad = 0;
  for (int t = 0; t < kCases; ++t) {
    const auto m = static_cast<std::size_t>(gen::uniform_int(rng, 1, 4));
    const auto mat = gen::nonneg_matrix(rng, m, 0.0);
    const double tau = birkhoff_tau(mat);
    const auto u = gen::positive_vector(rng, m), v = gen::positive_vector(rng, m);
    if (!(tau < 1.0) || hilbert_distance(vec_mat(u, mat), vec_mat(v, mat)) > tau * hilbert_distance(u, v) + 1e-12)
      ++bad;
  }
  o.require(bad == 0, std::to_string(bad) + " contraction failures");

  bad = 0;
  for (int t = 0; t < kCases;) {
    const auto m = static_cast<std::size_t>(gen::uniform_int(rng, 1, 3));
    const auto k = static_cast<std::size_t>(gen::uniform_int(rng, 2, 3));
    const auto f = gen::superfair_family(rng, m, k, 0.3, 0.5);
    const auto v = gen::nonneg_vector(rng, m);
    const auto w = gen::word(rng, k, 4);
    const double lw = log_capital(f, v, w);
    if (!std::isfinite(lw)) continue;
    double avg = 0;
    bool finite = true;
    for (std::size_t a = 0; a < k && finite; ++a) {
      Word wa = w;
      wa.push_back(a);
      const double l = log_capital(f, v, wa);
      finite = std::isfinite(l);
      avg += l + cumulative_risk(f, v, wa).value;
    }
    if (!finite) continue;
    ++t;
    if (avg / static_cast<double>(k) > lw + cumulative_risk(f, v, w).value + 1e-12) ++bad;
  }
  o.require(bad == 0, std::to_string(bad) + " supermartingale violations");

  bad = 0;
  for (int t = 0; t < kCases; ++t) {
    const auto f = gen::star_family(rng, 3);
    const auto bs = betting_subspace(f);
    const auto u = gen::nonneg_vector(rng, f.dim()), v = gen::nonneg_vector(rng, f.dim());
    Vector<Q> sum(f.dim());
    for (std::size_t i = 0; i < f.dim(); ++i) sum[i] = u[i] + v[i];
    const Q lu = live(bs, u), lv = live(bs, v);
    const Q lambda = gen::small_rational(rng);
    bool ok = live(bs, sum) <= lu + lv && live(bs, scaled(u, lambda)) == lambda * lu && lu >= 0 && lu <= norm1(u);
    const Q bound = Q(static_cast<long>(f.letters())) * lu;
    for (const auto& mat : f.matrices()) ok = ok && abs(Q(norm1(vec_mat(u, mat)) - norm1(u))) <= bound;
    if (!ok) ++bad;
  }
  o.require(bad == 0, std::to_string(bad) + " Live property violations");

  bad = 0;
  for (int t = 0; t < kCases; ++t) {
    const auto m = static_cast<std::size_t>(gen::uniform_int(rng, 1, 5));
    const auto f = gen::superfair_family(rng, m, 2, 0.6, 0.3);
    const IndexSet e(static_cast<std::uint64_t>(gen::uniform_int(rng, 0, (1L << m) - 1)));
    const IndexSet e2(static_cast<std::uint64_t>(gen::uniform_int(rng, 0, (1L << m) - 1)));
    const auto w = gen::word(rng, 2, 6);
    if (act_set(f, e | e2, w) != (act_set(f, e, w) | act_set(f, e2, w))) ++bad;
  }
  o.require(bad == 0, std::to_string(bad) + " union incompatibilities");

  // Span of M_w (I - M_a) 1 over |w| <= m-1 against |w| <= m+1, by an
  // independent rank computation.
  bad = 0;
  for (int t = 0; t < kCases; ++t) {
    const auto m = static_cast<std::size_t>(gen::uniform_int(rng, 1, 4));
    const auto f = gen::superfair_family(rng, m, 2, 0.5, 0.3);
    const auto fam = gen::to_oracle(f);
    const auto bs = betting_subspace(f);
    bool ok = bs.stabilization_depth + 1 <= std::max<std::size_t>(m, 1);
    for (std::size_t a = 0; a < 2 && ok; ++a) {
      oracle::QVec c(m);
      for (std::size_t i = 0; i < m; ++i) {
        c[i] = 1;
        for (std::size_t j = 0; j < m; ++j) c[i] -= fam[a][i][j];
      }
      auto span_rank = [&](std::size_t depth) {
        std::vector<oracle::QVec> rows;
        for (const auto& w : oracle::all_words(2, depth)) {
          const auto p = oracle::product(fam, w, m);
          oracle::QVec r(m, 0);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) r[i] += p[i][j] * c[j];
          rows.push_back(r);
        }
        return oracle::rank(rows);
      };
      const auto short_rank = span_rank(m - 1);
      ok = short_rank == span_rank(m + 1) && short_rank == bs.per_letter_dims[a];
    }
    if (!ok) ++bad;
  }
  o.require(bad == 0, std::to_string(bad) + " spans still growing after depth m-1");
  return o;
}

Outcome oracle_equivalence() {
  Outcome o;
  gen::Rng rng(8);
  int cone_bad = 0, verdict_bad = 0;
  for (int t = 0; t < 200; ++t) {
    const auto f = gen::star_family(rng, 3);
    const auto fam = gen::to_oracle(f);
    const auto bs = betting_subspace(f);
    const auto c = classify_star(f);
    std::vector<Vector<Q>> probes{gen::nonneg_vector(rng, f.dim()), gen::positive_vector(rng, f.dim())};
    for (std::size_t i = 0; i < f.dim(); ++i) probes.push_back(unit_basis<Q>(f.dim(), i));
    if (c.direction) probes.push_back(c.direction->x);
    for (const auto& v : probes)
      if (in_nonbetting_cone(bs, v) != oracle::norm_constant(fam, {v.begin(), v.end()}, 6)) ++cone_bad;
    if (c.kind == CaseKind::Case0) {
      if (!oracle::only_null_bottom(fam, f.dim())) ++verdict_bad;
      continue;
    }
    const bool risky = c.direction->exact
                           ? oracle::some_risk(fam, {c.direction->x.begin(), c.direction->x.end()}, 6)
                           : oracle::some_risk_float(gen::to_oracle_double(f), vector_cast<double>(c.direction->x), 6, 1e-9);
    if ((c.kind == CaseKind::Case2) == risky) ++verdict_bad;
  }
  o.require(cone_bad == 0, std::to_string(cone_bad) + " cone disagreements");
  o.require(verdict_bad == 0, std::to_string(verdict_bad) + " verdict disagreements");
  return o;
}

Outcome general_case() {
  Outcome o;
  const auto mixed = family_from_json(run_cli({"examples", "blockdiag"})).family;
  const auto r = classify_general(mixed);
  std::multiset<CaseKind> kinds;
  for (const auto& c : r.components) kinds.insert(c.verdict.kind);
  o.require(r.mixed, "block-diagonal family not reported mixed");
  o.require(kinds == std::multiset<CaseKind>{CaseKind::Case1, CaseKind::Case2}, "component verdicts differ");

  const auto leak = family_from_json(run_cli({"examples", "leakage"})).family;
  const auto lr = classify_general(leak, GeneralOptions{{}, false});
  std::optional<IndexSet> strict;
  for (const auto& c : lr.components)
    if (c.fairness == FairnessKind::SuperfairStrict) {
      strict = c.members;
      o.require(c.verdict.kind != CaseKind::Case2, "strict component reported never-betting");
    }
  o.require(strict.has_value(), "no strictly superfair component");
  if (strict) {
    const auto probe = live_contraction_probe(restrict_family(leak, *strict), 100, 1000, 1);
    o.require(probe.fraction_contracting >= 0.95, "fraction contracting " + fmt(probe.fraction_contracting));
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("fraction contracting ") +
                fmt(probe.fraction_contracting) + " alpha " + fmt(probe.alpha_hat);
  }
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "golden matrix conversion", 1, golden_matrices},
      {2, "fixed direction", 1, fixed_direction_check},
      {3, "trichotomy on the worked examples", 5, trichotomy},
      {4, "expected capital", 5, expected_capital_check},
      {5, "ruin rate", 30, ruin_rate},
      {6, "stabilization", 60, stabilization},
      {7, "property suites", 60, property_suites},
      {8, "small-instance oracle equivalence", 120, oracle_equivalence},
      {9, "general case", 60, general_case},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_seconds) o.require(false, "over the " + fmt(c.budget_seconds) + " s budget");
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << " (" << std::fixed
              << std::setprecision(2) << secs << " s)" << std::defaultfloat;
    if (!o.detail.empty()) std::cout << " - " << o.detail;
    std::cout << std::endl;
    if (c.id == 6) {
      const auto alt = stabilization_run({0.0, 1.0, 0.0, 0.0});
      std::cout << "INFO 6 from (0,1,0,0): tail oscillation " << fmt(alt.tail_oscillation) << ", final capital "
                << fmt(alt.final_norm) << ", live beta "
                << (alt.live_fit && alt.live_fit->beta ? fmt(*alt.live_fit->beta) : std::string("null"))
                << std::endl;
    }
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failures == 0 ? 0 : 1;
}
